#include "nkit/linalg.hpp"

#include <algorithm>
#include <map>

namespace nkit {

namespace {
void check_same_ring(const PrecisionCtx& a, const PrecisionCtx& b) {
  if (!a.same_ring(b)) throw Error(ErrorKind::internal, "mixed coefficient rings");
}
}  // namespace

ZMatrix::ZMatrix(const PrecisionCtx& ctx, int rows, int cols)
    : ctx_(ctx), rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0) {}

ZMatrix ZMatrix::identity(const PrecisionCtx& ctx, int n) {
  ZMatrix m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1 % ctx.pN;
  return m;
}

ZMatrix ZMatrix::from_rows(const PrecisionCtx& ctx,
                           const std::vector<std::vector<std::int64_t>>& rows) {
  int r = static_cast<int>(rows.size());
  int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
  ZMatrix m(ctx, r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c)
      throw Error(ErrorKind::internal, "ragged matrix literal");
    for (int j = 0; j < c; ++j) m.at(i, j) = ctx.reduce_i64(rows[i][j]);
  }
  return m;
}

bool ZMatrix::is_zero() const {
  for (auto x : a_)
    if (x != 0) return false;
  return true;
}

ZMatrix ZMatrix::transpose() const {
  ZMatrix t(ctx_, cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

std::vector<std::uint64_t> ZMatrix::row(int i) const {
  return {a_.begin() + static_cast<std::size_t>(i) * cols_,
          a_.begin() + static_cast<std::size_t>(i + 1) * cols_};
}

std::vector<std::uint64_t> ZMatrix::col(int j) const {
  std::vector<std::uint64_t> v(rows_);
  for (int i = 0; i < rows_; ++i) v[i] = at(i, j);
  return v;
}

void ZMatrix::set_row(int i, const std::vector<std::uint64_t>& v) {
  for (int j = 0; j < cols_; ++j) at(i, j) = v[j] % ctx_.pN;
}

ZMatrix operator*(const ZMatrix& a, const ZMatrix& b) {
  check_same_ring(a.ctx_, b.ctx_);
  if (a.cols_ != b.rows_) throw Error(ErrorKind::internal, "matrix shape mismatch in product");
  ZMatrix r(a.ctx_, a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      std::uint64_t aik = a.at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < b.cols_; ++j)
        r.at(i, j) = a.ctx_.add(r.at(i, j), a.ctx_.mul(aik, b.at(k, j)));
    }
  return r;
}

ZMatrix operator+(const ZMatrix& a, const ZMatrix& b) {
  check_same_ring(a.ctx_, b.ctx_);
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw Error(ErrorKind::internal, "matrix shape mismatch in sum");
  ZMatrix r = a;
  for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] = a.ctx_.add(a.a_[i], b.a_[i]);
  return r;
}

ZMatrix operator-(const ZMatrix& a, const ZMatrix& b) {
  check_same_ring(a.ctx_, b.ctx_);
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw Error(ErrorKind::internal, "matrix shape mismatch in difference");
  ZMatrix r = a;
  for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] = a.ctx_.sub(a.a_[i], b.a_[i]);
  return r;
}

ZMatrix ZMatrix::scale(std::uint64_t c) const {
  ZMatrix r = *this;
  c %= ctx_.pN;
  for (auto& x : r.a_) x = ctx_.mul(x, c);
  return r;
}

bool ZMatrix::operator==(const ZMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
}

std::vector<std::uint64_t> ZMatrix::apply(const std::vector<std::uint64_t>& x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw Error(ErrorKind::internal, "vector length mismatch in apply");
  std::vector<std::uint64_t> y(rows_, 0);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) y[i] = ctx_.add(y[i], ctx_.mul(at(i, j), x[j]));
  return y;
}

ZMatrix SmithForm::diagonal(const PrecisionCtx& ctx, int rows, int cols) const {
  ZMatrix d(ctx, rows, cols);
  for (std::size_t t = 0; t < exps.size(); ++t) d.at(static_cast<int>(t), static_cast<int>(t)) = ctx.ppow(exps[t]);
  return d;
}

int SmithForm::det_valuation(const PrecisionCtx& ctx) const {
  int s = 0;
  for (int e : exps) {
    if (e >= ctx.N) return ctx.N;
    s += e;
    if (s >= ctx.N) return ctx.N;
  }
  return s;
}

SmithForm snf(const ZMatrix& A0) {
  const PrecisionCtx ctx = A0.ctx();
  ZMatrix A = A0;
  int m = A.rows(), n = A.cols();
  SmithForm s;
  s.U = ZMatrix::identity(ctx, m);
  s.Uinv = ZMatrix::identity(ctx, m);
  s.V = ZMatrix::identity(ctx, n);
  s.Vinv = ZMatrix::identity(ctx, n);
  int d = std::min(m, n);
  s.exps.assign(d, ctx.N);

  auto row_sub = [&](int i, std::uint64_t f, int t) {  // row_i -= f * row_t
    for (int j = 0; j < n; ++j) A.at(i, j) = ctx.sub(A.at(i, j), ctx.mul(f, A.at(t, j)));
    for (int j = 0; j < m; ++j) s.U.at(i, j) = ctx.sub(s.U.at(i, j), ctx.mul(f, s.U.at(t, j)));
    for (int j = 0; j < m; ++j) s.Uinv.at(j, t) = ctx.add(s.Uinv.at(j, t), ctx.mul(f, s.Uinv.at(j, i)));
  };
  auto col_sub = [&](int j, std::uint64_t f, int t) {  // col_j -= f * col_t
    for (int i = 0; i < m; ++i) A.at(i, j) = ctx.sub(A.at(i, j), ctx.mul(f, A.at(i, t)));
    for (int i = 0; i < n; ++i) s.V.at(i, j) = ctx.sub(s.V.at(i, j), ctx.mul(f, s.V.at(i, t)));
    for (int i = 0; i < n; ++i) s.Vinv.at(t, i) = ctx.add(s.Vinv.at(t, i), ctx.mul(f, s.Vinv.at(j, i)));
  };
  auto row_swap = [&](int i, int t) {
    if (i == t) return;
    for (int j = 0; j < n; ++j) std::swap(A.at(i, j), A.at(t, j));
    for (int j = 0; j < m; ++j) std::swap(s.U.at(i, j), s.U.at(t, j));
    for (int j = 0; j < m; ++j) std::swap(s.Uinv.at(j, i), s.Uinv.at(j, t));
  };
  auto col_swap = [&](int j, int t) {
    if (j == t) return;
    for (int i = 0; i < m; ++i) std::swap(A.at(i, j), A.at(i, t));
    for (int i = 0; i < n; ++i) std::swap(s.V.at(i, j), s.V.at(i, t));
    for (int i = 0; i < n; ++i) std::swap(s.Vinv.at(j, i), s.Vinv.at(t, i));
  };
  auto row_scale = [&](int i, std::uint64_t w) {  // w a unit
    std::uint64_t wi = ctx.inv_unit(w);
    for (int j = 0; j < n; ++j) A.at(i, j) = ctx.mul(A.at(i, j), wi);
    for (int j = 0; j < m; ++j) s.U.at(i, j) = ctx.mul(s.U.at(i, j), wi);
    for (int j = 0; j < m; ++j) s.Uinv.at(j, i) = ctx.mul(s.Uinv.at(j, i), w);
  };

  for (int t = 0; t < d; ++t) {
    // pivot: minimal p-valuation, ties by smallest row then column index
    int bv = ctx.N + 1, bi = -1, bj = -1;
    for (int i = t; i < m; ++i)
      for (int j = t; j < n; ++j) {
        int v = ctx.vp(A.at(i, j));
        if (v < bv) bv = v, bi = i, bj = j;
      }
    if (bi < 0 || bv >= ctx.N) break;  // all zero
    row_swap(bi, t);
    col_swap(bj, t);
    row_scale(t, A.at(t, t) / ctx.ppow(bv));  // pivot becomes p^bv
    for (int i = t + 1; i < m; ++i)
      if (A.at(i, t) != 0) row_sub(i, A.at(i, t) / ctx.ppow(bv), t);
    for (int j = t + 1; j < n; ++j)
      if (A.at(t, j) != 0) col_sub(j, A.at(t, j) / ctx.ppow(bv), t);
    s.exps[t] = bv;
  }
  return s;
}

bool is_unimodular(const ZMatrix& A) {
  if (A.rows() != A.cols()) return false;
  for (int e : snf(A).exps)
    if (e != 0) return false;
  return true;
}

ZMatrix inverse_unimodular(const ZMatrix& A) {
  SmithForm s = snf(A);
  for (int e : s.exps)
    if (e != 0) throw Error(ErrorKind::unit_expected, "matrix is not invertible over Z/p^N");
  return s.V * s.U;  // A = Uinv * I * Vinv, so A^{-1} = V * U
}

// ---- Howell form ----

Submodule Submodule::zero(const PrecisionCtx& ctx, int ambient) {
  Submodule s;
  s.ctx_ = ctx;
  s.ambient_ = ambient;
  s.basis_ = ZMatrix(ctx, 0, ambient);
  return s;
}

Submodule Submodule::full(const PrecisionCtx& ctx, int ambient) {
  return from_rows(ZMatrix::identity(ctx, ambient));
}

Submodule Submodule::from_rows(const ZMatrix& gens) {
  const PrecisionCtx ctx = gens.ctx();
  int n = gens.cols();
  // pivot col -> (row values, pivot exponent)
  std::map<int, std::pair<std::vector<std::uint64_t>, int>> piv;
  std::vector<std::vector<std::uint64_t>> work;
  for (int i = 0; i < gens.rows(); ++i) work.push_back(gens.row(i));

  auto leading = [&](const std::vector<std::uint64_t>& v) {
    for (int c = 0; c < n; ++c)
      if (v[c] != 0) return c;
    return n;
  };

  while (!work.empty()) {
    std::vector<std::uint64_t> v = std::move(work.back());
    work.pop_back();
    for (;;) {
      int c = leading(v);
      if (c == n) break;  // reduced to zero
      int vv = ctx.vp(v[c]);
      auto it = piv.find(c);
      if (it == piv.end()) {
        // normalize leading unit part to 1 and install as pivot
        std::uint64_t w = ctx.inv_unit(v[c] / ctx.ppow(vv));
        for (auto& x : v) x = ctx.mul(x, w);
        if (vv > 0) {
          // Howell completion: the p^{N-vv} multiple has a later leading column
          std::vector<std::uint64_t> tail(n);
          std::uint64_t f = ctx.ppow(ctx.N - vv);
          for (int j = 0; j < n; ++j) tail[j] = ctx.mul(v[j], f);
          work.push_back(std::move(tail));
        }
        piv.emplace(c, std::make_pair(std::move(v), vv));
        break;
      }
      auto& [pv, pe] = it->second;
      if (vv >= pe) {
        std::uint64_t f = v[c] / ctx.ppow(pe);
        for (int j = 0; j < n; ++j) v[j] = ctx.sub(v[j], ctx.mul(f, pv[j]));
      } else {
        std::swap(v, pv);
        pe = vv;
        std::uint64_t w = ctx.inv_unit(pv[c] / ctx.ppow(vv));
        for (auto& x : pv) x = ctx.mul(x, w);
        if (vv > 0) {
          std::vector<std::uint64_t> tail(n);
          std::uint64_t f = ctx.ppow(ctx.N - vv);
          for (int j = 0; j < n; ++j) tail[j] = ctx.mul(pv[j], f);
          work.push_back(std::move(tail));
        }
        // displaced row continues reducing
      }
    }
  }

  // canonical reduction of entries at later pivot columns
  std::vector<int> cols;
  for (auto& [c, _] : piv) cols.push_back(c);
  for (int c : cols) {
    auto& [pr, pe] = piv.at(c);
    std::uint64_t pc = ctx.ppow(pe);
    for (int c2 : cols) {
      if (c2 >= c) continue;
      auto& r2 = piv.at(c2).first;
      std::uint64_t q = r2[c] / pc;  // canonical representative in [0, p^pe)
      if (q == 0) continue;
      for (int j = 0; j < n; ++j) r2[j] = ctx.sub(r2[j], ctx.mul(q, pr[j]));
    }
  }

  Submodule s;
  s.ctx_ = ctx;
  s.ambient_ = n;
  s.basis_ = ZMatrix(ctx, static_cast<int>(piv.size()), n);
  int i = 0;
  for (auto& [c, rp] : piv) {
    s.basis_.set_row(i, rp.first);
    s.pivot_col_.push_back(c);
    s.pivot_exp_.push_back(rp.second);
    ++i;
  }
  return s;
}

int Submodule::size_exp() const {
  int e = 0;
  for (int x : pivot_exp_) e += ctx_.N - x;
  return e;
}

Submodule::Reduction Submodule::reduce(const std::vector<std::uint64_t>& v0) const {
  Reduction r;
  r.residual = v0;
  for (auto& x : r.residual) x %= ctx_.pN;
  r.coords.assign(basis_.rows(), 0);
  for (int i = 0; i < basis_.rows(); ++i) {
    int c = pivot_col_[i];
    // columns before c of the residual are final; pivot rows are in column order
    std::uint64_t x = r.residual[c];
    if (x == 0) continue;
    if (ctx_.vp(x) < pivot_exp_[i]) break;  // cannot eliminate, not a member
    std::uint64_t f = x / ctx_.ppow(pivot_exp_[i]);
    r.coords[i] = f;
    for (int j = 0; j < ambient_; ++j)
      r.residual[j] = ctx_.sub(r.residual[j], ctx_.mul(f, basis_.at(i, j)));
  }
  r.member = true;
  for (auto x : r.residual)
    if (x != 0) {
      r.member = false;
      break;
    }
  return r;
}

bool Submodule::contains(const std::vector<std::uint64_t>& v) const { return reduce(v).member; }

bool Submodule::contains(const Submodule& other) const {
  for (int i = 0; i < other.basis_.rows(); ++i)
    if (!contains(other.basis_.row(i))) return false;
  return true;
}

bool Submodule::operator==(const Submodule& o) const {
  return ambient_ == o.ambient_ && basis_ == o.basis_;
}

Submodule join(const Submodule& a, const Submodule& b) {
  if (a.ambient_ != b.ambient_) throw Error(ErrorKind::internal, "join: ambient mismatch");
  ZMatrix g(a.ctx_, a.basis_.rows() + b.basis_.rows(), a.ambient_);
  for (int i = 0; i < a.basis_.rows(); ++i) g.set_row(i, a.basis_.row(i));
  for (int i = 0; i < b.basis_.rows(); ++i) g.set_row(a.basis_.rows() + i, b.basis_.row(i));
  return Submodule::from_rows(g);
}

Submodule intersect(const Submodule& a, const Submodule& b) {
  if (a.ambient_ != b.ambient_) throw Error(ErrorKind::internal, "intersect: ambient mismatch");
  const PrecisionCtx& ctx = a.ctx_;
  int s = a.basis_.rows(), t = b.basis_.rows(), n = a.ambient_;
  if (s == 0 || t == 0) return Submodule::zero(ctx, n);
  // rows (x | y) with x*Ga = y*Gb; elements are x*Ga
  ZMatrix C(ctx, s + t, n);
  for (int i = 0; i < s; ++i) C.set_row(i, a.basis_.row(i));
  for (int i = 0; i < t; ++i) {
    auto r = b.basis_.row(i);
    for (auto& x : r) x = ctx.neg(x);
    C.set_row(s + i, r);
  }
  Submodule rel = kernel_of(C.transpose());
  ZMatrix gens(ctx, rel.num_gens(), n);
  for (int i = 0; i < rel.num_gens(); ++i) {
    auto c = rel.basis().row(i);
    std::vector<std::uint64_t> e(n, 0);
    for (int k = 0; k < s; ++k)
      for (int j = 0; j < n; ++j) e[j] = ctx.add(e[j], ctx.mul(c[k], a.basis_.at(k, j)));
    gens.set_row(i, e);
  }
  return Submodule::from_rows(gens);
}

Submodule kernel_of(const ZMatrix& A) {
  const PrecisionCtx& ctx = A.ctx();
  SmithForm s = snf(A);
  int n = A.cols();
  int d = static_cast<int>(s.exps.size());
  std::vector<std::vector<std::uint64_t>> gens;
  for (int t = 0; t < d; ++t) {
    if (s.exps[t] == 0) continue;
    std::uint64_t f = ctx.ppow(ctx.N - s.exps[t]);  // 1 when exps == N
    auto c = s.V.col(t);
    for (auto& x : c) x = ctx.mul(x, f);
    gens.push_back(std::move(c));
  }
  for (int t = d; t < n; ++t) gens.push_back(s.V.col(t));
  ZMatrix g(ctx, static_cast<int>(gens.size()), n);
  for (std::size_t i = 0; i < gens.size(); ++i) g.set_row(static_cast<int>(i), gens[i]);
  return Submodule::from_rows(g);
}

Submodule row_span(const ZMatrix& A) { return Submodule::from_rows(A); }
Submodule col_span(const ZMatrix& A) { return Submodule::from_rows(A.transpose()); }

// ---- quotients ----

QuotientPresentation::QuotientPresentation(const Submodule& big, const Submodule& small) {
  ctx_ = big.ctx();
  big_ = big;
  if (small.ambient() != big.ambient())
    throw Error(ErrorKind::internal, "quotient: ambient mismatch");
  int k = big.num_gens();

  // relation rows in the k generator coordinates: small's coordinates plus
  // the kernel of the presentation map c -> c * basis(big)
  std::vector<std::vector<std::uint64_t>> rel;
  for (int i = 0; i < small.num_gens(); ++i) {
    auto red = big.reduce(small.basis().row(i));
    if (!red.member)
      throw Error(ErrorKind::containment, "quotient: small module is not inside big");
    rel.push_back(red.coords);
  }
  if (k > 0) {
    Submodule ker = kernel_of(big.basis().transpose());
    for (int i = 0; i < ker.num_gens(); ++i) rel.push_back(ker.basis().row(i));
  }
  ZMatrix R(ctx_, static_cast<int>(rel.size()), k);
  for (std::size_t i = 0; i < rel.size(); ++i) R.set_row(static_cast<int>(i), rel[i]);

  SmithForm s = snf(R);
  V_ = s.V;
  coord_exp_.assign(k, ctx_.N);
  for (std::size_t t = 0; t < s.exps.size(); ++t) coord_exp_[t] = s.exps[t];

  for (int t = 0; t < k; ++t) {
    if (coord_exp_[t] == 0) continue;  // unit relation, coordinate dies
    if (coord_exp_[t] >= ctx_.N) {
      free_idx_.push_back(t);
      profile_.free_rank += 1;
    } else {
      tor_idx_.push_back(t);
      profile_.torsion.push_back(coord_exp_[t]);
    }
  }
  std::vector<std::size_t> order(profile_.torsion.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return profile_.torsion[a] < profile_.torsion[b]; });
  std::vector<int> sorted_t;
  std::vector<int> sorted_idx;
  for (auto i : order) {
    sorted_t.push_back(profile_.torsion[i]);
    sorted_idx.push_back(tor_idx_[i]);
  }
  profile_.torsion = sorted_t;
  tor_idx_ = sorted_idx;

  // representatives: row t of Vinv in generator coordinates, mapped to the ambient
  auto rep_of = [&](int t) {
    std::vector<std::uint64_t> amb(big.ambient(), 0);
    for (int g = 0; g < k; ++g) {
      std::uint64_t c = s.Vinv.at(t, g);
      if (c == 0) continue;
      for (int j = 0; j < big.ambient(); ++j)
        amb[j] = ctx_.add(amb[j], ctx_.mul(c, big.basis().at(g, j)));
    }
    return amb;
  };
  free_reps_ = ZMatrix(ctx_, static_cast<int>(free_idx_.size()), big.ambient());
  for (std::size_t i = 0; i < free_idx_.size(); ++i)
    free_reps_.set_row(static_cast<int>(i), rep_of(free_idx_[i]));
  torsion_reps_ = ZMatrix(ctx_, static_cast<int>(tor_idx_.size()), big.ambient());
  for (std::size_t i = 0; i < tor_idx_.size(); ++i)
    torsion_reps_.set_row(static_cast<int>(i), rep_of(tor_idx_[i]));
}

bool QuotientPresentation::ClassCoords::is_zero() const {
  for (auto x : free_part)
    if (x != 0) return false;
  for (auto x : torsion_part)
    if (x != 0) return false;
  return true;
}

QuotientPresentation::ClassCoords QuotientPresentation::coords(
    const std::vector<std::uint64_t>& ambient_row) const {
  ClassCoords out;
  auto red = big_.reduce(ambient_row);
  if (!red.member) return out;
  out.in_big = true;
  int k = big_.num_gens();
  std::vector<std::uint64_t> z(k, 0);
  for (int t = 0; t < k; ++t)
    for (int g = 0; g < k; ++g) z[t] = ctx_.add(z[t], ctx_.mul(red.coords[g], V_.at(g, t)));
  for (int t : free_idx_) out.free_part.push_back(z[t]);
  for (std::size_t i = 0; i < tor_idx_.size(); ++i)
    out.torsion_part.push_back(z[tor_idx_[i]] % ctx_.ppow(profile_.torsion[i]));
  return out;
}

DivisorProfile quotient_divisors(const Submodule& big, const Submodule& small) {
  return QuotientPresentation(big, small).profile();
}

std::optional<std::vector<std::uint64_t>> linear_solve(const ZMatrix& A,
                                                       const std::vector<std::uint64_t>& b) {
  DenomSolution s = solve_denominated(A, b, 0);
  if (!s.ok || s.residual_val < A.ctx().N) return std::nullopt;
  return s.x;
}

DenomSolution solve_denominated(const ZMatrix& A, const std::vector<std::uint64_t>& b,
                                int max_den) {
  const PrecisionCtx& ctx = A.ctx();
  if (static_cast<int>(b.size()) != A.rows())
    throw Error(ErrorKind::internal, "solve: rhs length mismatch");
  SmithForm s = snf(A);
  std::vector<std::uint64_t> ub(A.rows(), 0);
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.rows(); ++j) ub[i] = ctx.add(ub[i], ctx.mul(s.U.at(i, j), b[j]));

  DenomSolution out;
  out.residual_val = ctx.N;
  int d = static_cast<int>(s.exps.size());
  int need = 0;
  for (int t = 0; t < d; ++t) {
    int e = s.exps[t];
    if (e >= ctx.N) {
      out.residual_val = std::min(out.residual_val, ctx.vp(ub[t]));
      continue;
    }
    need = std::max(need, e - ctx.vp(ub[t]));
  }
  for (int t = d; t < A.rows(); ++t) out.residual_val = std::min(out.residual_val, ctx.vp(ub[t]));
  if (need < 0) need = 0;
  if (need > max_den) {
    out.ok = false;
    out.den = need;
    return out;
  }
  out.den = need;
  // y_t = p^den * ub_t / p^{e_t}
  std::vector<std::uint64_t> y(A.cols(), 0);
  for (int t = 0; t < d; ++t) {
    int e = s.exps[t];
    if (e >= ctx.N) continue;
    int v = ctx.vp(ub[t]);
    std::uint64_t unit_part = ub[t] == 0 ? 0 : ub[t] / ctx.ppow(std::min(v, e));
    if (v >= e) {
      y[t] = ctx.mul(ctx.ppow(need), ub[t] / ctx.ppow(e));
    } else {
      // denominator absorbs the missing valuation
      y[t] = ctx.mul(ctx.ppow(need - (e - v)), unit_part);
    }
  }
  out.x.assign(A.cols(), 0);
  for (int i = 0; i < A.cols(); ++i)
    for (int t = 0; t < A.cols(); ++t) out.x[i] = ctx.add(out.x[i], ctx.mul(s.V.at(i, t), y[t]));
  out.ok = true;
  return out;
}

}  // namespace nkit
