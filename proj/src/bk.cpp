#include "nkit/bk.hpp"

#include <algorithm>

namespace nkit {

namespace {
bool equal_within_uprec(const TruncSeries& a, const TruncSeries& b) {
  int w = std::min(a.uprec(), b.uprec());
  for (int k = 0; k < w; ++k)
    if (a.coeff(k) != b.coeff(k)) return false;
  return true;
}
}  // namespace

SeriesMatrix::SeriesMatrix(const PrecisionCtx& ctx, int rows, int cols)
    : ctx_(ctx), rows_(rows), cols_(cols),
      a_(static_cast<std::size_t>(rows) * cols, TruncSeries::zero(ctx)) {}

SeriesMatrix SeriesMatrix::identity(const PrecisionCtx& ctx, int n) {
  SeriesMatrix m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = TruncSeries::constant(ctx, 1);
  return m;
}

SeriesMatrix SeriesMatrix::eis_identity(const PrecisionCtx& ctx, int n, int power) {
  SeriesMatrix m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = eis_pow(ctx, power);
  return m;
}

SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorKind::internal, "series matrix shape mismatch");
  SeriesMatrix r(a.ctx_, a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int j = 0; j < b.cols_; ++j) {
      TruncSeries s = TruncSeries::zero(a.ctx_);
      for (int k = 0; k < a.cols_; ++k) s = s + a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

SeriesMatrix operator+(const SeriesMatrix& a, const SeriesMatrix& b) {
  SeriesMatrix r = a;
  for (int i = 0; i < a.rows_; ++i)
    for (int j = 0; j < a.cols_; ++j) r.at(i, j) = a.at(i, j) + b.at(i, j);
  return r;
}

SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b) {
  SeriesMatrix r = a;
  for (int i = 0; i < a.rows_; ++i)
    for (int j = 0; j < a.cols_; ++j) r.at(i, j) = a.at(i, j) - b.at(i, j);
  return r;
}

SeriesMatrix SeriesMatrix::scale(const TruncSeries& f) const {
  SeriesMatrix r = *this;
  for (auto& e : r.a_) e = e * f;
  return r;
}

bool SeriesMatrix::operator==(const SeriesMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  for (std::size_t i = 0; i < a_.size(); ++i)
    if (!(a_[i] == o.a_[i])) return false;
  return true;
}

namespace {
SeriesMatrix minor_of(const SeriesMatrix& m, int di, int dj) {
  SeriesMatrix r(m.ctx(), m.rows() - 1, m.cols() - 1);
  for (int i = 0, ri = 0; i < m.rows(); ++i) {
    if (i == di) continue;
    for (int j = 0, rj = 0; j < m.cols(); ++j) {
      if (j == dj) continue;
      r.at(ri, rj) = m.at(i, j);
      ++rj;
    }
    ++ri;
  }
  return r;
}
}  // namespace

TruncSeries SeriesMatrix::det() const {
  if (rows_ != cols_) throw Error(ErrorKind::internal, "determinant of non-square matrix");
  if (rows_ == 0) return TruncSeries::constant(ctx_, 1);
  if (rows_ == 1) return at(0, 0);
  TruncSeries d = TruncSeries::zero(ctx_);
  for (int i = 0; i < rows_; ++i) {
    TruncSeries term = at(i, 0) * minor_of(*this, i, 0).det();
    d = (i % 2 == 0) ? d + term : d - term;
  }
  return d;
}

SeriesMatrix SeriesMatrix::adjugate() const {
  if (rows_ != cols_) throw Error(ErrorKind::internal, "adjugate of non-square matrix");
  SeriesMatrix r(ctx_, rows_, cols_);
  if (rows_ == 0) return r;
  if (rows_ == 1) {
    r.at(0, 0) = TruncSeries::constant(ctx_, 1);
    return r;
  }
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) {
      TruncSeries c = minor_of(*this, i, j).det();
      r.at(j, i) = ((i + j) % 2 == 0) ? c : -c;
    }
  return r;
}

ZMatrix SeriesMatrix::ev_p_matrix() const {
  ZMatrix r(ctx_, rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = ev_p(at(i, j)).num;
  return r;
}

SeriesMatrix SeriesMatrix::frob_entrywise() const {
  SeriesMatrix r = *this;
  for (auto& e : r.a_) e = frob(e);
  return r;
}

SeriesMatrix SeriesMatrix::ddu_entrywise() const {
  SeriesMatrix r = *this;
  for (auto& e : r.a_) e = ddu(e);
  return r;
}

int SeriesMatrix::min_uprec() const {
  int w = ctx_.M;
  for (const auto& e : a_) w = std::min(w, e.uprec());
  return w;
}

BKModule instantiate(const BKSpec& spec) { return instantiate(spec, spec.N); }

BKModule instantiate(const BKSpec& spec, int n_override) {
  auto ctx = PrecisionCtx::make(spec.p, n_override, spec.M);
  if (spec.rank < 0) throw Error(ErrorKind::schema, "negative rank");
  if (spec.height < 0) throw Error(ErrorKind::schema, "negative height");
  if (static_cast<int>(spec.frob.size()) != spec.rank)
    throw Error(ErrorKind::schema, "frobenius row count does not match rank");
  BKModule bk;
  bk.ctx = ctx;
  bk.rank = spec.rank;
  bk.height = spec.height;
  bk.assume_crystalline = spec.assume_crystalline;
  bk.frobenius = SeriesMatrix(ctx, spec.rank, spec.rank);
  for (int i = 0; i < spec.rank; ++i) {
    if (static_cast<int>(spec.frob[i].size()) != spec.rank)
      throw Error(ErrorKind::schema, "frobenius column count does not match rank");
    for (int j = 0; j < spec.rank; ++j) {
      const auto& cs = spec.frob[i][j];
      for (std::size_t k = ctx.M; k < cs.size(); ++k)
        if (ctx.reduce_i64(cs[k]) != 0)
          throw Error(ErrorKind::precision, "frobenius coefficient beyond u-truncation");
      std::vector<std::int64_t> head(cs.begin(),
                                     cs.begin() + std::min<std::size_t>(cs.size(), ctx.M));
      bk.frobenius.at(i, j) = TruncSeries::from_ints(ctx, head);
    }
  }
  return bk;
}

SeriesMatrix validate_bk(const BKModule& bk) {
  const PrecisionCtx& ctx = bk.ctx;
  const SeriesMatrix& A = bk.frobenius;
  int r = bk.rank, h = bk.height;
  if (r == 0) return SeriesMatrix(ctx, 0, 0);

  TruncSeries d = A.det();
  if (d.is_zero())
    throw Error(ErrorKind::not_finite_height, "determinant vanishes at this precision");
  int dval = 0;
  TruncSeries c = d;
  while (dval <= r * h) {
    auto [q, rem] = eis_divide(c, 1);
    if (!rem.is_zero()) break;
    c = q;
    ++dval;
    if (c.is_zero())
      throw Error(ErrorKind::not_finite_height, "determinant vanishes at this precision");
  }
  if (dval > r * h)
    throw Error(ErrorKind::not_finite_height, "determinant divisible beyond rank*height");
  if (!c.is_unit())
    throw Error(ErrorKind::not_finite_height,
                "determinant is not a unit times an Eisenstein power");
  TruncSeries cinv = invert_unit(c);

  SeriesMatrix B(ctx, r, r);
  SeriesMatrix adj = A.adjugate();
  if (dval <= h) {
    TruncSeries f = eis_pow(ctx, h - dval) * cinv;
    B = adj.scale(f);
  } else {
    int e = dval - h;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        auto [q, rem] = eis_divide(adj.at(i, j), e);
        if (!rem.is_zero())
          throw Error(ErrorKind::not_finite_height, "height certificate does not exist");
        B.at(i, j) = q * cinv;
      }
  }

  SeriesMatrix lhs = A * B, rhs = B * A, eh = SeriesMatrix::eis_identity(ctx, r, h);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (!equal_within_uprec(lhs.at(i, j), eh.at(i, j)) ||
          !equal_within_uprec(rhs.at(i, j), eh.at(i, j)))
        throw Error(ErrorKind::not_finite_height, "height certificate verification failed");
  return B;
}

ZMatrix nygaard_action_matrix(const BKModule& bk, int i) {
  const PrecisionCtx& ctx = bk.ctx;
  int r = bk.rank;
  ZMatrix m(ctx, r * i, r * i);
  for (int j = 0; j < r; ++j)
    for (int a = 0; a < i; ++a) {
      int col = j * i + a;
      for (int k = 0; k < r; ++k) {
        TruncSeries rem = eis_remainder(bk.frobenius.at(k, j).shift(a), i);
        for (int b = 0; b < i; ++b) m.at(k * i + b, col) = rem.coeff(b);
      }
    }
  return m;
}

ZMatrix eis_step_matrix(const PrecisionCtx& ctx, int rank, int i) {
  ZMatrix m(ctx, rank * (i + 1), rank * i);
  std::uint64_t mp = ctx.neg(ctx.p % ctx.pN);
  for (int j = 0; j < rank; ++j)
    for (int a = 0; a < i; ++a) {
      int col = j * i + a;
      m.at(j * (i + 1) + a + 1, col) = 1;
      m.at(j * (i + 1) + a, col) = mp;
    }
  return m;
}

ZMatrix eis_drop_matrix(const PrecisionCtx& ctx, int rank, int i) {
  ZMatrix m(ctx, rank * i, rank * (i + 1));
  TruncSeries top = eis_remainder(TruncSeries::monomial(ctx, i), i);
  for (int j = 0; j < rank; ++j) {
    for (int a = 0; a < i; ++a) m.at(j * i + a, j * (i + 1) + a) = 1;
    for (int b = 0; b < i; ++b) m.at(j * i + b, j * (i + 1) + i) = top.coeff(b);
  }
  return m;
}

NygaardFiltration nygaard(const BKModule& bk, int i_max) {
  const PrecisionCtx& ctx = bk.ctx;
  if (i_max < 0) throw Error(ErrorKind::usage, "negative filtration bound");
  if (i_max > ctx.M)
    throw Error(ErrorKind::precision, "filtration bound exceeds u-truncation order");
  NygaardFiltration nyg;
  nyg.rank = bk.rank;
  nyg.i_max = i_max;
  nyg.level.push_back(Submodule::zero(ctx, 0));
  for (int i = 1; i <= i_max; ++i) nyg.level.push_back(kernel_of(nygaard_action_matrix(bk, i)));
  return nyg;
}

HodgeData hodge_fil(const BKModule& bk, const NygaardFiltration& nyg) {
  const PrecisionCtx& ctx = bk.ctx;
  int r = bk.rank;
  HodgeData h;
  h.rank = r;
  h.i_max = nyg.i_max;
  h.fil.push_back(Submodule::full(ctx, r));
  for (int i = 1; i <= nyg.i_max; ++i) {
    const Submodule& K = nyg.level[i];
    ZMatrix gens(ctx, K.num_gens(), r);
    for (int g = 0; g < K.num_gens(); ++g) {
      auto row = K.basis().row(g);
      std::vector<std::uint64_t> v(r, 0);
      for (int j = 0; j < r; ++j) {
        std::uint64_t pw = 1;
        for (int a = 0; a < i; ++a) {
          v[j] = ctx.add(v[j], ctx.mul(row[j * i + a], pw));
          pw = ctx.mul(pw, ctx.p % ctx.pN);
        }
      }
      gens.set_row(g, v);
    }
    h.fil.push_back(Submodule::from_rows(gens));
  }
  return h;
}

std::vector<int> GradedReport::torsion_indices() const {
  std::vector<int> out;
  for (int i = 0; i < i_max; ++i)
    if (gr[i].has_torsion()) out.push_back(i);
  return out;
}

GradedReport graded(const HodgeData& hodge) {
  GradedReport rep;
  rep.i_max = hodge.i_max;
  for (int i = 0; i < hodge.i_max; ++i)
    rep.gr.push_back(quotient_divisors(hodge.fil[i], hodge.fil[i + 1]));
  return rep;
}

namespace {
// generators of the preimage of K_i inside (S/E^{i+1})^r: lifted kernel rows
// plus the rows E^i e_j
Submodule nygaard_preimage(const PrecisionCtx& ctx, int r, int i, const Submodule& Ki) {
  std::vector<std::vector<std::uint64_t>> rows;
  for (int g = 0; g < Ki.num_gens(); ++g) {
    auto src = Ki.basis().row(g);
    std::vector<std::uint64_t> v(static_cast<std::size_t>(r) * (i + 1), 0);
    for (int j = 0; j < r; ++j)
      for (int a = 0; a < i; ++a) v[j * (i + 1) + a] = src[j * i + a];
    rows.push_back(std::move(v));
  }
  TruncSeries ei = eis_pow(ctx, i);
  for (int j = 0; j < r; ++j) {
    std::vector<std::uint64_t> v(static_cast<std::size_t>(r) * (i + 1), 0);
    for (int a = 0; a <= i; ++a) v[j * (i + 1) + a] = ei.coeff(a);
    rows.push_back(std::move(v));
  }
  ZMatrix m(ctx, static_cast<int>(rows.size()), r * (i + 1));
  for (std::size_t k = 0; k < rows.size(); ++k) m.set_row(static_cast<int>(k), rows[k]);
  return Submodule::from_rows(m);
}
}  // namespace

ConjFiltration conj_fil(const BKModule& bk, const NygaardFiltration& nyg) {
  const PrecisionCtx& ctx = bk.ctx;
  int r = bk.rank;
  ConjFiltration cf;
  cf.i_max = nyg.i_max;
  for (int i = 0; i + 1 <= nyg.i_max; ++i) {
    Submodule Fi = nygaard_preimage(ctx, r, i, nyg.level[i]);
    QuotientPresentation pres(Fi, nyg.level[i + 1]);
    if (!pres.profile().torsion.empty())
      throw Error(ErrorKind::freeness_violation,
                  "conjugate filtration layer has torsion at this precision");
    ConjLayer layer{i, pres.profile().free_rank, pres.free_reps(), pres};
    cf.layers.push_back(std::move(layer));
  }
  for (std::size_t i = 0; i + 1 < cf.layers.size(); ++i) {
    const ConjLayer& src = cf.layers[i];
    const ConjLayer& dst = cf.layers[i + 1];
    ZMatrix step = eis_step_matrix(ctx, r, static_cast<int>(i) + 1);
    ZMatrix T(ctx, dst.rank, src.rank);
    for (int g = 0; g < src.rank; ++g) {
      auto img = step.apply(src.basis_reps.row(g));
      auto cc = dst.pres.coords(img);
      if (!cc.in_big)
        throw Error(ErrorKind::containment, "transition leaves the next filtration step");
      for (auto t : cc.torsion_part)
        if (t != 0)
          throw Error(ErrorKind::freeness_violation, "transition image meets torsion");
      for (int row = 0; row < dst.rank; ++row) T.at(row, g) = cc.free_part[row];
    }
    cf.transitions.push_back(std::move(T));
  }
  int s = static_cast<int>(cf.transitions.size());
  for (int t = s - 1; t >= 0; --t) {
    const ZMatrix& T = cf.transitions[t];
    if (T.rows() == T.cols() && is_unimodular(T))
      s = t;
    else
      break;
  }
  cf.stabilization = s;
  return cf;
}

int HTWeights::total() const {
  int t = 0;
  for (auto& [w, m] : weights) t += m;
  return t;
}

bool HTWeights::contains(int w) const {
  for (auto& [x, m] : weights)
    if (x == w) return true;
  return false;
}

HTWeights ht_weights(const GradedReport& report) {
  HTWeights ht;
  for (int i = 0; i < report.i_max; ++i)
    if (report.gr[i].free_rank > 0) ht.weights.emplace_back(i, report.gr[i].free_rank);
  return ht;
}

TheoremVerdict check_theorem(const GradedReport& report, const HTWeights& ht,
                             const PrecisionCtx& ctx, bool assume_crystalline) {
  TheoremVerdict v;
  v.crystalline_assumed = assume_crystalline;
  for (int i : report.torsion_indices()) {
    bool admissible = false;
    for (auto& [w, m] : ht.weights)
      if (i > w && (i - w) % static_cast<int>(ctx.p) == 0) {
        admissible = true;
        break;
      }
    if (!admissible) v.offending.push_back(i);
  }
  v.pass = v.offending.empty();
  return v;
}

TheoremVerdict check_effective_di(const GradedReport& report, const PrecisionCtx& ctx,
                                  bool assume_crystalline) {
  TheoremVerdict v;
  v.crystalline_assumed = assume_crystalline;
  for (int i : report.torsion_indices())
    if (i < static_cast<int>(ctx.p)) v.offending.push_back(i);
  v.pass = v.offending.empty();
  return v;
}

EscalationReport precision_escalate(const BKSpec& spec, int n1, int n2, int i_max) {
  if (n1 >= n2) throw Error(ErrorKind::usage, "escalation requires n1 < n2");
  auto run_at = [&](int n) {
    try {
      BKModule bk = instantiate(spec, n);
      validate_bk(bk);
      auto nyg = nygaard(bk, i_max);
      return graded(hodge_fil(bk, nyg));
    } catch (const Error& e) {
      if (e.kind == ErrorKind::precision)
        throw Error(ErrorKind::uncertified_precision, e.what());
      throw;
    }
  };
  EscalationReport rep;
  rep.n_low = n1;
  rep.n_high = n2;
  rep.low = run_at(n1);
  rep.high = run_at(n2);
  for (int i = 0; i < i_max; ++i) {
    std::vector<int> low_t = rep.low.gr[i].torsion;
    std::vector<int> high_small;
    for (int e : rep.high.gr[i].torsion) {
      if (e >= n1)
        throw Error(ErrorKind::uncertified_precision,
                    "torsion emerged between the two precisions");
      high_small.push_back(e);
    }
    if (low_t != high_small)
      throw Error(ErrorKind::uncertified_precision, "torsion profiles disagree");
    if (rep.low.gr[i].free_rank != rep.high.gr[i].free_rank)
      throw Error(ErrorKind::uncertified_precision, "free ranks disagree");
  }
  rep.stable = true;
  return rep;
}

int default_i_max(const BKModule& bk) {
  return bk.height + 3 * static_cast<int>(bk.ctx.p);
}

}  // namespace nkit
