#include "nkit/theta.hpp"

#include <algorithm>
#include <optional>
#include <random>

namespace nkit {

namespace {

std::vector<std::uint64_t> vec_add(const PrecisionCtx& ctx, const std::vector<std::uint64_t>& a,
                                   const std::vector<std::uint64_t>& b) {
  std::vector<std::uint64_t> r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = ctx.add(a[k], b[k]);
  return r;
}

std::vector<std::uint64_t> vec_scale(const PrecisionCtx& ctx, const std::vector<std::uint64_t>& a,
                                     std::uint64_t c) {
  std::vector<std::uint64_t> r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = ctx.mul(a[k], c);
  return r;
}

bool vec_is_zero(const std::vector<std::uint64_t>& a) {
  return std::all_of(a.begin(), a.end(), [](std::uint64_t x) { return x == 0; });
}

ZMatrix theta_plus(const PrecisionCtx& ctx, const ZMatrix& theta, int scalar) {
  return theta + ZMatrix::identity(ctx, theta.rows()).scale(ctx.reduce_i64(scalar));
}

// c with a*c = b mod p^f, if any
std::optional<std::uint64_t> solve_scalar(const PrecisionCtx& ctx, std::uint64_t a,
                                          std::uint64_t b, int f) {
  std::uint64_t pf = ctx.ppow(f);  // 0 encodes p^N
  std::uint64_t bf = (f >= ctx.N) ? b : b % pf;
  if (bf == 0) return 0;
  int va = ctx.vp(a);
  if (va >= f) return std::nullopt;
  if (ctx.vp(bf) < va) return std::nullopt;
  std::uint64_t unit = ctx.div_ppow(a, va);
  return ctx.mul(ctx.div_ppow(bf, va), ctx.inv_unit(unit));
}

struct GenInfo {
  std::vector<std::uint64_t> rep;
  int exp;  // N for free generators
};

std::vector<GenInfo> graded_generators(const PrecisionCtx& ctx, const QuotientPresentation& pres) {
  std::vector<GenInfo> gens;
  for (int g = 0; g < pres.free_reps().rows(); ++g)
    gens.push_back({pres.free_reps().row(g), ctx.N});
  for (int t = 0; t < pres.torsion_reps().rows(); ++t)
    gens.push_back({pres.torsion_reps().row(t), pres.torsion_exps()[t]});
  return gens;
}

}  // namespace

const FTMLayer& FilteredThetaModule::layer(int i) const {
  if (!in_range(i)) throw Error(ErrorKind::usage, "layer index out of range");
  return layers[static_cast<std::size_t>(i - i_lo())];
}

std::vector<FTMViolation> validate_ftm(const FilteredThetaModule& m) {
  std::vector<FTMViolation> out;
  const PrecisionCtx& ctx = m.ctx;
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const FTMLayer& L = m.layers[k];
    if (k > 0 && L.index != m.layers[k - 1].index + 1) {
      out.push_back({L.index, "layer indices are not consecutive"});
      return out;
    }
    int r = L.theta.rows();
    if (L.theta.cols() != r) {
      out.push_back({L.index, "theta is not square"});
      return out;
    }
    int prev = (k == 0) ? 0 : m.layers[k - 1].theta.rows();
    if (L.inclusion.rows() != r || L.inclusion.cols() != prev) {
      out.push_back({L.index, "inclusion shape does not match layer ranks"});
      return out;
    }
  }
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const FTMLayer& L = m.layers[k];
    if (k > 0) {
      for (int e : snf(L.inclusion).exps)
        if (e >= ctx.N) {
          out.push_back({L.index, "inclusion is not injective"});
          break;
        }
      ZMatrix lhs = L.theta * L.inclusion;
      ZMatrix rhs = L.inclusion * m.layers[k - 1].theta;
      if (!(lhs == rhs)) out.push_back({L.index, "theta does not commute with the inclusion"});
    }
    Submodule image = col_span(L.inclusion);
    ZMatrix tp = theta_plus(ctx, L.theta, L.index);
    for (int j = 0; j < L.rank(); ++j)
      if (!image.contains(tp.col(j))) {
        out.push_back({L.index, "(theta + i) does not map into the previous layer"});
        break;
      }
  }
  return out;
}

QuotientPresentation ftm_graded(const FilteredThetaModule& m, int i) {
  const FTMLayer& L = m.layer(i);
  return QuotientPresentation(Submodule::full(m.ctx, L.rank()), col_span(L.inclusion));
}

std::vector<std::pair<int, DivisorProfile>> ftm_profiles(const FilteredThetaModule& m) {
  std::vector<std::pair<int, DivisorProfile>> out;
  for (const FTMLayer& L : m.layers) out.emplace_back(L.index, ftm_graded(m, L.index).profile());
  return out;
}

AdTheta ad_theta(const FilteredThetaModule& m, int i, int j) {
  if (!m.in_range(i) || !m.in_range(j)) throw Error(ErrorKind::usage, "layer index out of range");
  if (j >= i) throw Error(ErrorKind::usage, "ad_theta requires j < i");
  AdTheta r;
  r.diff = static_cast<std::int64_t>(i) - j;
  r.value = m.ctx.reduce_i64(r.diff);
  r.unit = m.ctx.is_unit(r.value);
  return r;
}

namespace {

void require_valid(const FilteredThetaModule& m) {
  auto v = validate_ftm(m);
  if (!v.empty()) throw Error(ErrorKind::schema, "invalid filtered theta-module: " + v[0].what);
}

// complete per-generator solver: x - incl*w = rep, (theta+i)x = 0, p^e x = 0
std::optional<std::vector<std::uint64_t>> section_column(const PrecisionCtx& ctx,
                                                         const FTMLayer& L, const ZMatrix& tp,
                                                         const GenInfo& gen) {
  int r = L.rank(), prev = L.inclusion.cols();
  bool torsion = gen.exp < ctx.N;
  int rows = (torsion ? 3 : 2) * r;
  ZMatrix A(ctx, rows, r + prev);
  std::vector<std::uint64_t> b(rows, 0);
  for (int k = 0; k < r; ++k) {
    A.at(k, k) = 1;
    for (int c = 0; c < prev; ++c) A.at(k, r + c) = ctx.neg(L.inclusion.at(k, c));
    b[k] = gen.rep[k];
    for (int c = 0; c < r; ++c) A.at(r + k, c) = tp.at(k, c);
    if (torsion) A.at(2 * r + k, k) = ctx.ppow(gen.exp);
  }
  auto sol = linear_solve(A, b);
  if (!sol) return std::nullopt;
  return std::vector<std::uint64_t>(sol->begin(), sol->begin() + r);
}

}  // namespace

SplitOutcome split_layer(const FilteredThetaModule& m, int i, std::uint64_t seed) {
  require_valid(m);
  const PrecisionCtx& ctx = m.ctx;
  const FTMLayer& L = m.layer(i);
  int r = L.rank();

  SplitOutcome out;
  out.graded = ftm_graded(m, i);
  auto gens = graded_generators(ctx, out.graded);
  int n = static_cast<int>(gens.size());
  out.section = ZMatrix(ctx, r, n);
  ZMatrix tp = theta_plus(ctx, L.theta, i);

  // composed inclusions Fil_j -> Fil_i and graded data per lower layer
  std::vector<ZMatrix> into(m.layers.size());
  std::vector<QuotientPresentation> pres(m.layers.size());
  for (int j = i - 1; j >= m.i_lo(); --j) {
    into[j - m.i_lo()] =
        (j == i - 1) ? L.inclusion : into[j + 1 - m.i_lo()] * m.layer(j + 1).inclusion;
    pres[j - m.i_lo()] = ftm_graded(m, j);
  }

  bool blocked = false, torsion_failed = false;
  int first_block = m.i_lo();
  for (int g = 0; g < n && !blocked; ++g) {
    std::vector<std::uint64_t> x = gens[g].rep;
    if (seed != 0 && L.inclusion.cols() > 0) {
      std::mt19937_64 rng(seed * 1000003ull + static_cast<std::uint64_t>(g));
      std::vector<std::uint64_t> z(L.inclusion.cols());
      for (auto& e : z) e = rng() % ctx.pN;
      x = vec_add(ctx, x, L.inclusion.apply(z));
    }
    for (int j = i - 1; j >= m.i_lo() && !blocked; --j) {
      auto defect = tp.apply(x);
      if (vec_is_zero(defect)) break;
      auto w = linear_solve(into[j - m.i_lo()], defect);
      if (!w) {
        blocked = true;
        first_block = j;
        break;
      }
      const auto& pj = pres[j - m.i_lo()];
      auto cls = pj.coords(*w);
      auto gj = graded_generators(ctx, pj);
      std::vector<std::uint64_t> X(m.layer(j).rank(), 0);
      std::uint64_t a = ctx.reduce_i64(static_cast<std::int64_t>(i) - j);
      for (std::size_t t = 0; t < gj.size(); ++t) {
        std::uint64_t comp = (t < cls.free_part.size())
                                 ? cls.free_part[t]
                                 : cls.torsion_part[t - cls.free_part.size()];
        auto c = solve_scalar(ctx, a, ctx.neg(comp), gj[t].exp);
        if (!c) {
          blocked = true;
          first_block = j;
          break;
        }
        X = vec_add(ctx, X, vec_scale(ctx, gj[t].rep, *c));
      }
      if (blocked) break;
      x = vec_add(ctx, x, into[j - m.i_lo()].apply(X));
    }
    if (blocked) break;
    if (!vec_is_zero(tp.apply(x))) {
      blocked = true;
      first_block = m.i_lo();
      break;
    }
    if (gens[g].exp < ctx.N && !vec_is_zero(vec_scale(ctx, x, ctx.ppow(gens[g].exp))))
      torsion_failed = true;
    for (int k = 0; k < r; ++k) out.section.at(k, g) = x[k];
  }

  if (!blocked && !torsion_failed) {
    out.ok = true;
    return out;
  }

  // the descent is greedy; fall back to the full linear system per generator
  ZMatrix full(ctx, r, n);
  bool all = true;
  for (int g = 0; g < n && all; ++g) {
    auto col = section_column(ctx, L, tp, gens[g]);
    if (!col) {
      all = false;
      break;
    }
    for (int k = 0; k < r; ++k) full.at(k, g) = (*col)[k];
  }
  if (all) {
    out.ok = true;
    out.section = full;
    return out;
  }
  out.ok = false;
  out.blocking_layer = first_block;
  return out;
}

DecomposeReport decompose(const FilteredThetaModule& m) {
  require_valid(m);
  DecomposeReport rep;
  for (const FTMLayer& L : m.layers) {
    auto pres = ftm_graded(m, L.index);
    if (pres.free_rank() == 0 && pres.torsion_exps().empty()) continue;
    auto split = split_layer(m, L.index);
    if (!split.ok) {
      rep.skipped.push_back(L.index);
      continue;
    }
    ZMatrix G = split.section;
    for (int j = L.index + 1; j <= m.i_hi(); ++j) G = m.layer(j).inclusion * G;
    rep.summands.push_back({L.index, G.transpose()});
  }
  return rep;
}

PropVerdict check_prop(const FilteredThetaModule& m) {
  require_valid(m);
  auto profiles = ftm_profiles(m);
  PropVerdict v;
  for (auto& [idx, prof] : profiles)
    if (prof.free_rank > 0) v.ht.emplace_back(idx, prof.free_rank);
  std::int64_t p = static_cast<std::int64_t>(m.ctx.p);
  for (auto& [idx, prof] : profiles) {
    if (!prof.has_torsion()) continue;
    bool admissible = false;
    for (auto& [w, mult] : v.ht)
      if (idx > w && (static_cast<std::int64_t>(idx) - w) % p == 0) admissible = true;
    if (!admissible) {
      v.pass = false;
      v.offending.push_back(idx);
    }
  }
  return v;
}

bool hom_vanish(const FilteredThetaModule& m, int i) {
  require_valid(m);
  if (!m.in_range(i)) throw Error(ErrorKind::usage, "layer index out of range");
  if (i == m.i_lo()) return true;
  const PrecisionCtx& ctx = m.ctx;
  auto pres = ftm_graded(m, i);
  std::vector<int> exps;
  if (pres.free_rank() > 0) exps.push_back(ctx.N);
  for (int e : pres.torsion_exps()) exps.push_back(e);
  std::sort(exps.begin(), exps.end());
  exps.erase(std::unique(exps.begin(), exps.end()), exps.end());

  const FTMLayer& below = m.layer(i - 1);
  int r = below.rank();
  if (r == 0) return true;
  ZMatrix tp = theta_plus(ctx, below.theta, i);
  for (int e : exps) {
    ZMatrix A(ctx, 2 * r, r);
    for (int k = 0; k < r; ++k) {
      for (int c = 0; c < r; ++c) A.at(k, c) = tp.at(k, c);
      A.at(r + k, k) = ctx.ppow(e);
    }
    if (kernel_of(A).num_gens() != 0) return false;
  }
  return true;
}

namespace {

ZMatrix random_unimodular(const PrecisionCtx& ctx, int n, std::mt19937_64& rng) {
  ZMatrix W = ZMatrix::identity(ctx, n);
  if (n < 2) return W;
  int ops = 2 * n + static_cast<int>(rng() % 3);
  for (int t = 0; t < ops; ++t) {
    int a = static_cast<int>(rng() % n);
    int b = static_cast<int>(rng() % n);
    if (a == b) continue;
    std::uint64_t c = ctx.reduce_i64(static_cast<std::int64_t>(rng() % 5) - 2);
    for (int k = 0; k < n; ++k) W.at(a, k) = ctx.add(W.at(a, k), ctx.mul(c, W.at(b, k)));
  }
  return W;
}

}  // namespace

FilteredThetaModule random_ftm(std::uint64_t p, int N, std::uint64_t seed, int max_rank,
                               int max_window) {
  PrecisionCtx ctx = PrecisionCtx::make(p, N, 4);
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + p * 131 + static_cast<std::uint64_t>(N));
  FilteredThetaModule m;
  m.ctx = ctx;

  bool torsion_tower = (rng() % 4 == 0) && max_window > static_cast<int>(p);
  if (torsion_tower) {
    int w = static_cast<int>(rng() % 2);
    int r = 1 + static_cast<int>(rng() % std::min(2, max_rank));
    int top = w + static_cast<int>(p);
    ZMatrix theta = ZMatrix::identity(ctx, r).scale(ctx.reduce_i64(-w));
    ZMatrix prev_w;
    for (int i = w; i <= top; ++i) {
      ZMatrix incl = (i == w) ? ZMatrix(ctx, r, 0)
                              : ZMatrix::identity(ctx, r).scale(i == top ? p : 1);
      ZMatrix W = random_unimodular(ctx, r, rng);
      if (i > w) incl = W * incl * inverse_unimodular(prev_w);
      m.layers.push_back({i, std::move(incl), W * theta * inverse_unimodular(W)});
      prev_w = W;
    }
  } else {
    int i_lo = static_cast<int>(rng() % 3);
    int L = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_window - 1));
    std::vector<int> g(L, 0);
    int total = 0;
    for (int k = 0; k < L; ++k) {
      int want = (k == 0) ? 1 + static_cast<int>(rng() % 2) : static_cast<int>(rng() % 3);
      g[k] = std::min(want, max_rank - total);
      total += g[k];
    }
    if (total == 0) g[0] = total = 1;
    // top-layer theta: diagonal blocks -(i_lo + b), random coupling above
    ZMatrix top(ctx, total, total);
    std::vector<int> start(L + 1, 0);
    for (int k = 0; k < L; ++k) start[k + 1] = start[k] + g[k];
    for (int b = 0; b < L; ++b)
      for (int d = start[b]; d < start[b + 1]; ++d) {
        top.at(d, d) = ctx.reduce_i64(-(i_lo + b));
        for (int c = 0; c < start[b]; ++c) top.at(c, d) = rng() % ctx.pN;
      }
    ZMatrix prev_w;
    for (int k = 0; k < L; ++k) {
      int r = start[k + 1];
      ZMatrix theta(ctx, r, r);
      for (int a = 0; a < r; ++a)
        for (int c = 0; c < r; ++c) theta.at(a, c) = top.at(a, c);
      ZMatrix incl(ctx, r, start[k]);
      for (int a = 0; a < start[k]; ++a) incl.at(a, a) = 1;
      ZMatrix W = random_unimodular(ctx, r, rng);
      if (k > 0) incl = W * incl * inverse_unimodular(prev_w);
      m.layers.push_back({i_lo + k, std::move(incl), W * theta * inverse_unimodular(W)});
      prev_w = W;
    }
  }
  auto v = validate_ftm(m);
  if (!v.empty()) throw Error(ErrorKind::internal, "random module failed validation");
  return m;
}

}  // namespace nkit
