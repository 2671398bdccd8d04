#include "nkit/connection.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace nkit {

namespace {

using std::int64_t;
using std::uint64_t;

constexpr int kInfV = FloatCoef::kInf;
constexpr long long kFloorBottom = -(1LL << 24);

int clamp_val(long long v) {
  if (v >= kInfV) return kInfV;
  if (v <= kFloorBottom) return static_cast<int>(kFloorBottom);
  return static_cast<int>(v);
}

// kInf-absorbing addition for valuations and floors
long long vadd(long long a, long long b) {
  if (a >= kInfV || b >= kInfV) return kInfV;
  long long s = a + b;
  return s <= kFloorBottom ? kFloorBottom : s;
}

bool exact_zero(const FloatCoef& c) { return c.unit == 0 && c.val >= kInfV; }

FloatCoef fc_ball(long long val) {
  FloatCoef z;
  z.val = clamp_val(val);
  z.unit = 0;
  z.rel = 0;
  return z;
}

uint64_t addm(const PrecisionCtx& ctx, uint64_t a, uint64_t b) {
  uint64_t s = a + b;
  if (s >= ctx.pN) s -= ctx.pN;
  return s;
}

// p^val * unit with the residue unit known to rel digits
FloatCoef fc_norm(const PrecisionCtx& ctx, long long val, uint64_t unit, long long rel) {
  if (rel > ctx.N) rel = ctx.N;
  if (rel <= 0) return fc_ball(val);
  if (unit == 0) return fc_ball(val + rel);
  int t = ctx.vp(unit);
  if (t >= rel) return fc_ball(val + rel);
  FloatCoef r;
  r.val = clamp_val(val + t);
  r.unit = ctx.div_ppow(unit, t);
  r.rel = static_cast<int>(rel - t);
  return r;
}

// residue of an exactly known integer (canonical lift)
FloatCoef fc_exact_residue(const PrecisionCtx& ctx, uint64_t r) {
  if (r == 0) return FloatCoef{};
  return fc_norm(ctx, 0, r, ctx.N);
}

// residue of an integer only known mod p^N
FloatCoef fc_mod_residue(const PrecisionCtx& ctx, uint64_t r) {
  if (r == 0) return fc_ball(ctx.N);
  return fc_norm(ctx, 0, r, ctx.N);
}

int vp_i64(uint64_t p, int64_t v) {
  int t = 0;
  while (v != 0 && v % static_cast<int64_t>(p) == 0) {
    v /= static_cast<int64_t>(p);
    ++t;
  }
  return t;
}

FloatSeries fs_blank(const PrecisionCtx& ctx) {
  FloatSeries s;
  s.ctx = ctx;
  s.c.assign(static_cast<std::size_t>(ctx.M), FloatCoef{});
  s.uwin = ctx.M;
  s.tail_floor = kInfV;
  return s;
}

// first index that is not exactly zero, capped at uwin
int ord_of(const FloatSeries& s) {
  for (int k = 0; k < s.uwin; ++k)
    if (!exact_zero(s.c[static_cast<std::size_t>(k)])) return k;
  return s.uwin;
}

// min over known k >= from of vp(c_k) + k
long long anchor_known_min(const FloatSeries& s, int from) {
  long long m = kInfV;
  for (int k = std::max(from, 0); k < s.uwin; ++k) {
    const FloatCoef& c = s.c[static_cast<std::size_t>(k)];
    if (exact_zero(c)) continue;
    m = std::min(m, static_cast<long long>(c.val) + k);
  }
  return m;
}

// lower bound on inf_k (vp(c_k) + k) over the whole series
long long gauss_val(const FloatSeries& s) {
  return std::min(anchor_known_min(s, 0), vadd(s.tail_floor, s.uwin));
}

FloatSeries fs_neg(const FloatSeries& a) {
  FloatSeries r = a;
  for (int k = 0; k < r.uwin; ++k)
    r.c[static_cast<std::size_t>(k)] = fc_neg(r.ctx, r.c[static_cast<std::size_t>(k)]);
  return r;
}

bool fs_repr_eq(const FloatSeries& a, const FloatSeries& b) {
  if (a.uwin != b.uwin || a.tail_floor != b.tail_floor) return false;
  for (std::size_t k = 0; k < a.c.size(); ++k) {
    if (a.c[k].val != b.c[k].val || a.c[k].unit != b.c[k].unit || a.c[k].rel != b.c[k].rel)
      return false;
  }
  return true;
}

FSMatrix fsm_neg(const FSMatrix& a) {
  FSMatrix r = a;
  for (auto& e : r.e) e = fs_neg(e);
  return r;
}

FSMatrix fsm_map(const FSMatrix& a, FloatSeries (*f)(const FloatSeries&)) {
  FSMatrix r = a;
  for (auto& e : r.e) e = f(e);
  return r;
}

// memoized Laplace expansion over column subsets, rows taken in order
class DetTable {
 public:
  explicit DetTable(const FSMatrix& a) : a_(a), ctx_(a.e.front().ctx) {}

  // determinant of the minor using all rows except skip_row (-1: none) and
  // the columns in mask
  const FloatSeries& det(int skip_row, unsigned mask) {
    auto key = std::make_pair(skip_row, mask);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    FloatSeries d;
    int want = popcount(mask);
    if (want == 0) {
      d = fs_one(ctx_);
    } else {
      int row = nth_row(skip_row, count_rows(skip_row) - want);
      d = fs_blank(ctx_);
      int pos = 0;
      for (int j = 0; j < a_.cols; ++j) {
        if (!(mask & (1u << j))) continue;
        const FloatSeries& sub = det(skip_row, mask & ~(1u << j));
        FloatSeries term = fs_mul(a_.at(row, j), sub);
        d = (pos % 2 == 0) ? fs_add(d, term) : fs_sub(d, term);
        ++pos;
      }
    }
    return memo_.emplace(key, std::move(d)).first->second;
  }

 private:
  static int popcount(unsigned m) {
    int c = 0;
    while (m) {
      m &= m - 1;
      ++c;
    }
    return c;
  }
  int count_rows(int skip_row) const { return a_.rows - (skip_row >= 0 ? 1 : 0); }
  int nth_row(int skip_row, int n) const {
    for (int r = 0;; ++r) {
      if (r == skip_row) continue;
      if (n == 0) return r;
      --n;
    }
  }

  const FSMatrix& a_;
  PrecisionCtx ctx_;
  std::map<std::pair<int, unsigned>, FloatSeries> memo_;
};

FSMatrix frob_matrix(const PrecisionCtx& wctx, const BKSpec& spec) {
  FSMatrix c(wctx, spec.rank, spec.rank);
  for (int i = 0; i < spec.rank; ++i)
    for (int j = 0; j < spec.rank; ++j)
      c.at(i, j) = fs_frob(fs_from_ipoly(wctx, spec.frob[static_cast<std::size_t>(i)]
                                                       [static_cast<std::size_t>(j)]));
  return c;
}

// one application of the horizontality recursion N -> (p u^{p-1} C phi(N) - C') Ci
FSMatrix connection_step(const PrecisionCtx& wctx, const FSMatrix& c, const FSMatrix& cp,
                         const FSMatrix& ci, const FSMatrix& n) {
  FSMatrix f = fsm_map(n, &fs_frob);
  FSMatrix t = fsm_mul(c, f);
  FloatCoef pc = fc_from_i64(wctx, static_cast<int64_t>(wctx.p));
  for (auto& e : t.e) e = fs_shift(fs_scale(e, pc), static_cast<int>(wctx.p) - 1);
  return fsm_mul(fsm_sub(t, cp), ci);
}

HorizontalityReport horizontality_core(const FSMatrix& c, const FSMatrix& cp,
                                       const FSMatrix& n) {
  const PrecisionCtx& wctx = c.e.front().ctx;
  FSMatrix f = fsm_map(n, &fs_frob);
  FSMatrix t = fsm_mul(c, f);
  FloatCoef pc = fc_from_i64(wctx, static_cast<int64_t>(wctx.p));
  for (auto& e : t.e) e = fs_shift(fs_scale(e, pc), static_cast<int>(wctx.p) - 1);
  FSMatrix r = fsm_sub(fsm_add(fsm_mul(n, c), cp), t);
  HorizontalityReport rep;
  rep.zero = true;
  long long val = kInfV, uord = kInfV;
  for (const auto& e : r.e) {
    uord = std::min(uord, static_cast<long long>(e.uwin));
    for (int k = 0; k < e.uwin; ++k) {
      const FloatCoef& x = e.c[static_cast<std::size_t>(k)];
      if (exact_zero(x)) continue;
      if (x.unit != 0) rep.zero = false;
      val = std::min(val, static_cast<long long>(x.abs_prec()));
    }
  }
  rep.certified_val = clamp_val(val);
  rep.certified_uorder = clamp_val(uord);
  return rep;
}

void require_conn(const BKSpec& spec, const ConnectionMatrix& conn) {
  if (conn.rank != spec.rank || conn.wctx.p != spec.p)
    throw Error(ErrorKind::usage, "connection does not match the instance");
}

// powers of u reduced mod E^L as residue rows of length L
std::vector<std::vector<uint64_t>> upow_table(const PrecisionCtx& ctx, int L, int kmax) {
  // g = u^L - E^L, the reduction of u^L
  IntPoly eis = ipoly_eis_pow(ctx.p, L);
  std::vector<uint64_t> g(static_cast<std::size_t>(L), 0);
  for (int a = 0; a < L; ++a)
    g[static_cast<std::size_t>(a)] =
        (ctx.pN - ctx.reduce_i64(eis[static_cast<std::size_t>(a)])) % ctx.pN;
  std::vector<std::vector<uint64_t>> up(static_cast<std::size_t>(kmax),
                                        std::vector<uint64_t>(static_cast<std::size_t>(L), 0));
  for (int k = 0; k < std::min(L, kmax); ++k) up[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = 1;
  for (int k = L; k < kmax; ++k) {
    const auto& prev = up[static_cast<std::size_t>(k - 1)];
    uint64_t t = prev[static_cast<std::size_t>(L - 1)];
    auto& row = up[static_cast<std::size_t>(k)];
    row[0] = ctx.mul(t, g[0]);
    for (int a = 1; a < L; ++a)
      row[static_cast<std::size_t>(a)] =
          addm(ctx, prev[static_cast<std::size_t>(a - 1)], ctx.mul(t, g[static_cast<std::size_t>(a)]));
  }
  return up;
}

// coordinates of a series mod E^L in the u-power basis, with a tail ball
std::vector<FloatCoef> reduce_mod_eis(const FloatSeries& s, int L,
                                       const std::vector<std::vector<uint64_t>>& up) {
  const PrecisionCtx& ctx = s.ctx;
  std::vector<FloatCoef> out(static_cast<std::size_t>(L), FloatCoef{});
  for (int a = 0; a < L; ++a) {
    FloatCoef acc;
    for (int k = 0; k < s.uwin; ++k) {
      const FloatCoef& ck = s.c[static_cast<std::size_t>(k)];
      if (exact_zero(ck)) continue;
      FloatCoef w = fc_mod_residue(ctx, up[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)]);
      if (exact_zero(w)) continue;
      acc = fc_add(ctx, acc, fc_mul(ctx, ck, w));
    }
    // coefficient a of u^k mod E^L has valuation at least k - a
    if (s.tail_floor < kInfV / 2)
      acc = fc_add(ctx, acc, fc_ball(vadd(s.tail_floor, s.uwin - a)));
    out[static_cast<std::size_t>(a)] = acc;
  }
  return out;
}

// exact polynomial vectors over the escalated word ring
struct PolyVec {
  std::vector<std::vector<uint64_t>> comp;  // coefficient residues per component
};

// generators of Fil^i: kernel rows at level i plus E^i times the unit vectors
std::vector<PolyVec> fil_generators(const PrecisionCtx& ctx, const NygaardFiltration& nyg,
                                    int rank, int i) {
  std::vector<PolyVec> out;
  if (i > 0) {
    const ZMatrix& b = nyg.level[static_cast<std::size_t>(i)].basis();
    for (int g = 0; g < b.rows(); ++g) {
      PolyVec z;
      z.comp.assign(static_cast<std::size_t>(rank), {});
      for (int j = 0; j < rank; ++j) {
        auto& cj = z.comp[static_cast<std::size_t>(j)];
        cj.assign(static_cast<std::size_t>(i), 0);
        for (int a = 0; a < i; ++a) cj[static_cast<std::size_t>(a)] = b.at(g, j * i + a);
      }
      out.push_back(std::move(z));
    }
  }
  IntPoly ei = ipoly_eis_pow(ctx.p, i);
  for (int j = 0; j < rank; ++j) {
    PolyVec z;
    z.comp.assign(static_cast<std::size_t>(rank), {});
    auto& cj = z.comp[static_cast<std::size_t>(j)];
    cj.assign(ei.size(), 0);
    for (std::size_t a = 0; a < ei.size(); ++a) cj[a] = ctx.reduce_i64(ei[a]);
    out.push_back(std::move(z));
  }
  return out;
}

// ambient padding used by the conjugate-layer presentations: a polynomial
// vector of degree < width placed into (S/E^width)^rank coordinates
std::vector<uint64_t> pad_poly_vec(const PolyVec& z, int rank, int width) {
  std::vector<uint64_t> v(static_cast<std::size_t>(rank) * width, 0);
  for (int j = 0; j < rank; ++j) {
    const auto& cj = z.comp[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < cj.size() && static_cast<int>(a) < width; ++a)
      v[static_cast<std::size_t>(j) * width + a] = cj[a];
  }
  return v;
}

// span of u^a z_j mod E^L for the Fil^{i-1} generators z_j
struct GriffithsLattice {
  int layer = 0;
  int L = 0;
  std::vector<PolyVec> z;                        // lattice generators
  std::vector<std::vector<uint64_t>> cols;       // column j*L + a, length rank*L
};

GriffithsLattice build_lattice(const PrecisionCtx& ctx, const NygaardFiltration& nyg,
                               int rank, int i) {
  GriffithsLattice lat;
  lat.layer = i;
  lat.L = i + 1;
  lat.z = fil_generators(ctx, nyg, rank, i - 1);
  int kmax = std::max(ctx.M, 2 * lat.L) + 1;
  auto up = upow_table(ctx, lat.L, kmax);
  for (const auto& z : lat.z) {
    for (int a = 0; a < lat.L; ++a) {
      std::vector<uint64_t> col(static_cast<std::size_t>(rank) * lat.L, 0);
      for (int cidx = 0; cidx < rank; ++cidx) {
        const auto& poly = z.comp[static_cast<std::size_t>(cidx)];
        for (std::size_t k = 0; k < poly.size(); ++k) {
          if (poly[k] == 0) continue;
          const auto& row = up[k + static_cast<std::size_t>(a)];
          for (int b = 0; b < lat.L; ++b) {
            auto& slot = col[static_cast<std::size_t>(cidx) * lat.L + b];
            slot = addm(ctx, slot, ctx.mul(poly[k], row[static_cast<std::size_t>(b)]));
          }
        }
      }
      lat.cols.push_back(std::move(col));
    }
  }
  return lat;
}

FloatSeries fs_from_residues(const PrecisionCtx& ctx, const std::vector<uint64_t>& coeffs) {
  FloatSeries s = fs_blank(ctx);
  for (std::size_t k = 0; k < coeffs.size() && static_cast<int>(k) < ctx.M; ++k)
    s.c[k] = fc_exact_residue(ctx, coeffs[k]);
  return s;
}

struct SourceSolve {
  bool within_cap = true;    // certified denominators stay under the budget
  bool solvable = true;
  bool integral = true;
  int dt = 0;
  int ncert = 0;
  std::vector<uint64_t> evnum;      // per lattice generator, mod p^ncert
  std::vector<uint64_t> evnum_alt;  // from a kernel-shifted solution
  bool has_alt = false;
};

// solve D(x) = sum c_j z_j mod E^L with p-power denominators and certify the
// evaluations at u = p
SourceSolve solve_source(const BKSpec& spec, const ConnectionMatrix& conn,
                         const PrecisionCtx& ctx_s, const GriffithsLattice& lat,
                         const std::vector<std::vector<uint64_t>>& x_comps, bool want_alt,
                         uint64_t alt_seed) {
  const PrecisionCtx& wctx = conn.wctx;
  int r = spec.rank;
  int L = lat.L;
  int cap = spec.N / 2;

  std::vector<FloatSeries> x;
  x.reserve(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) x.push_back(fs_from_residues(wctx, x_comps[static_cast<std::size_t>(j)]));
  std::vector<FloatSeries> dx = apply_nabla(conn, x);

  int kmax = std::max(wctx.M, 2 * L) + 1;
  auto up = upow_table(ctx_s, L, kmax);
  std::vector<FloatCoef> coords;
  coords.reserve(static_cast<std::size_t>(r) * L);
  for (int j = 0; j < r; ++j) {
    auto red = reduce_mod_eis(dx[static_cast<std::size_t>(j)], L, up);
    coords.insert(coords.end(), red.begin(), red.end());
  }

  long long min_val_all = kInfV, min_val_hard = kInfV, min_abs = kInfV;
  for (const auto& c : coords) {
    if (exact_zero(c)) continue;
    min_val_all = std::min(min_val_all, static_cast<long long>(c.val));
    min_abs = std::min(min_abs, static_cast<long long>(c.abs_prec()));
    if (c.unit != 0) min_val_hard = std::min(min_val_hard, static_cast<long long>(c.val));
  }

  SourceSolve out;
  if (min_val_hard < -cap) {
    out.within_cap = false;
    out.dt = static_cast<int>(-min_val_hard);
    return out;
  }
  if (min_val_all < -cap)
    throw Error(ErrorKind::uncertified_precision,
                "derivative coordinates carry an uncertified denominator");
  int d0 = static_cast<int>(std::max(0LL, min_val_all == kInfV ? 0LL : -min_val_all));
  long long ncert_ll = std::min(min_abs == kInfV ? static_cast<long long>(ctx_s.N)
                                                 : min_abs + d0,
                                static_cast<long long>(ctx_s.N));
  if (ncert_ll < spec.N + d0)
    throw Error(ErrorKind::uncertified_precision,
                "derivative coordinates are not certified to the instance precision");
  int ncert = static_cast<int>(ncert_ll);
  PrecisionCtx cctx = PrecisionCtx::make(spec.p, ncert, spec.M);

  ZMatrix A(cctx, r * L, static_cast<int>(lat.cols.size()));
  for (std::size_t j = 0; j < lat.cols.size(); ++j)
    for (int i2 = 0; i2 < r * L; ++i2)
      A.at(i2, static_cast<int>(j)) = lat.cols[j][static_cast<std::size_t>(i2)] % cctx.pN;

  std::vector<uint64_t> b(static_cast<std::size_t>(r) * L, 0);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const FloatCoef& c = coords[k];
    if (c.unit == 0) continue;
    long long e = static_cast<long long>(c.val) + d0;
    if (e >= ncert) continue;
    b[k] = cctx.mul(c.unit % cctx.pN, cctx.ppow(static_cast<int>(e)));
  }

  DenomSolution sol = solve_denominated(A, b, cap - d0);
  if (!sol.ok) {
    out.solvable = false;
    out.ncert = ncert;
    return out;
  }
  out.dt = sol.den + d0;
  out.ncert = ncert;
  if (ncert - out.dt < spec.N)
    throw Error(ErrorKind::uncertified_precision,
                "denominator certification falls below the instance precision");

  int nz = static_cast<int>(lat.z.size());
  auto eval_at_p = [&](const std::vector<uint64_t>& xs) {
    std::vector<uint64_t> ev(static_cast<std::size_t>(nz), 0);
    for (int j = 0; j < nz; ++j) {
      uint64_t acc = 0;
      for (int a = 0; a < L; ++a)
        acc = addm(cctx, acc, cctx.mul(xs[static_cast<std::size_t>(j) * L + a], cctx.ppow(a)));
      ev[static_cast<std::size_t>(j)] = acc;
    }
    return ev;
  };
  out.evnum = eval_at_p(sol.x);
  for (const auto& e : out.evnum)
    if (cctx.vp(e) < out.dt) out.integral = false;

  if (want_alt) {
    Submodule ker = kernel_of(A);
    if (!ker.is_zero()) {
      std::mt19937_64 rng(alt_seed * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
      std::vector<uint64_t> x2 = sol.x;
      for (int g = 0; g < ker.num_gens(); ++g) {
        uint64_t w = rng() % cctx.pN;
        for (std::size_t k = 0; k < x2.size(); ++k)
          x2[k] = addm(cctx, x2[k], cctx.mul(w, ker.basis().at(g, static_cast<int>(k))));
      }
      out.evnum_alt = eval_at_p(x2);
      out.has_alt = true;
    }
  }
  return out;
}

ZMatrix reduce_matrix(const ZMatrix& a, const PrecisionCtx& ctx) {
  ZMatrix r(ctx, a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j) % ctx.pN;
  return r;
}

}  // namespace

int word_digits(std::uint64_t p) {
  int n = 0;
  std::uint64_t pn = 1;
  while (pn <= (std::uint64_t(1) << 62) / p) {
    pn *= p;
    ++n;
  }
  return n;
}

PrecisionCtx word_ctx(std::uint64_t p, int M) {
  return PrecisionCtx::make(p, word_digits(p), std::max(M, 48));
}

FloatCoef fc_from_i64(const PrecisionCtx& ctx, std::int64_t v) {
  if (v == 0) return FloatCoef{};
  return fc_norm(ctx, 0, ctx.reduce_i64(v), ctx.N);
}

FloatCoef fc_rational(const PrecisionCtx& ctx, std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::usage, "rational coefficient with zero denominator");
  if (num == 0) return FloatCoef{};
  int dv = 0;
  while (den % static_cast<std::int64_t>(ctx.p) == 0) {
    den /= static_cast<std::int64_t>(ctx.p);
    ++dv;
  }
  std::uint64_t q = ctx.mul(ctx.reduce_i64(num), ctx.inv_unit(ctx.reduce_i64(den)));
  return fc_norm(ctx, -dv, q, ctx.N);
}

FloatCoef fc_add(const PrecisionCtx& ctx, const FloatCoef& a, const FloatCoef& b) {
  if (exact_zero(a)) return b;
  if (exact_zero(b)) return a;
  long long A = std::min(static_cast<long long>(a.abs_prec()), static_cast<long long>(b.abs_prec()));
  long long v = std::min(a.val, b.val);
  std::uint64_t s = 0;
  if (a.unit != 0) s = ctx.mul(a.unit, ctx.ppow(static_cast<int>(std::min<long long>(a.val - v, ctx.N))));
  if (b.unit != 0)
    s = addm(ctx, s, ctx.mul(b.unit, ctx.ppow(static_cast<int>(std::min<long long>(b.val - v, ctx.N)))));
  return fc_norm(ctx, v, s, A - v);
}

FloatCoef fc_neg(const PrecisionCtx& ctx, const FloatCoef& a) {
  if (a.unit == 0) return a;
  FloatCoef r = a;
  r.unit = ctx.pN - a.unit;
  return r;
}

FloatCoef fc_mul(const PrecisionCtx& ctx, const FloatCoef& a, const FloatCoef& b) {
  if (exact_zero(a) || exact_zero(b)) return FloatCoef{};
  if (a.unit == 0 || b.unit == 0) return fc_ball(static_cast<long long>(a.val) + b.val);
  return fc_norm(ctx, static_cast<long long>(a.val) + b.val, ctx.mul(a.unit, b.unit),
                 std::min(a.rel, b.rel));
}

FloatCoef fc_inv(const PrecisionCtx& ctx, const FloatCoef& a) {
  if (exact_zero(a)) throw Error(ErrorKind::unit_expected, "division by exact zero");
  if (a.unit == 0)
    throw Error(ErrorKind::uncertified_precision, "inverting a coefficient known only as a zero ball");
  FloatCoef r;
  r.val = clamp_val(-static_cast<long long>(a.val));
  r.unit = ctx.inv_unit(a.unit);
  r.rel = a.rel;
  return r;
}

bool fc_eq(const PrecisionCtx& ctx, const FloatCoef& a, const FloatCoef& b) {
  return fc_add(ctx, a, fc_neg(ctx, b)).unit == 0;
}

FloatSeries fs_zero(const PrecisionCtx& ctx) { return fs_blank(ctx); }

FloatSeries fs_one(const PrecisionCtx& ctx) {
  FloatSeries s = fs_blank(ctx);
  s.c[0] = fc_from_i64(ctx, 1);
  return s;
}

FloatSeries fs_eis(const PrecisionCtx& ctx) {
  FloatSeries s = fs_blank(ctx);
  s.c[0] = fc_from_i64(ctx, -static_cast<std::int64_t>(ctx.p));
  s.c[1] = fc_from_i64(ctx, 1);
  return s;
}

FloatSeries fs_from_ipoly(const PrecisionCtx& ctx, const IntPoly& poly) {
  FloatSeries s = fs_blank(ctx);
  long long fl = kInfV;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    if (static_cast<int>(k) < ctx.M) {
      s.c[k] = fc_from_i64(ctx, poly[k]);
    } else if (poly[k] != 0) {
      fl = std::min(fl, static_cast<long long>(vp_i64(ctx.p, poly[k])) + static_cast<long long>(k) -
                            ctx.M);
    }
  }
  s.tail_floor = clamp_val(fl);
  return s;
}

FloatSeries fs_add(const FloatSeries& a, const FloatSeries& b) {
  const PrecisionCtx& ctx = a.ctx;
  FloatSeries r = fs_blank(ctx);
  r.uwin = std::min(a.uwin, b.uwin);
  for (int k = 0; k < r.uwin; ++k)
    r.c[static_cast<std::size_t>(k)] =
        fc_add(ctx, a.c[static_cast<std::size_t>(k)], b.c[static_cast<std::size_t>(k)]);
  long long fl = std::min(vadd(a.tail_floor, a.uwin - r.uwin), vadd(b.tail_floor, b.uwin - r.uwin));
  fl = std::min(fl, vadd(anchor_known_min(a, r.uwin), -r.uwin));
  fl = std::min(fl, vadd(anchor_known_min(b, r.uwin), -r.uwin));
  r.tail_floor = clamp_val(fl);
  return r;
}

FloatSeries fs_sub(const FloatSeries& a, const FloatSeries& b) { return fs_add(a, fs_neg(b)); }

FloatSeries fs_mul(const FloatSeries& a, const FloatSeries& b) {
  const PrecisionCtx& ctx = a.ctx;
  int W = ctx.M;
  int orda = ord_of(a), ordb = ord_of(b);
  if (orda == a.uwin && a.tail_floor >= kInfV) return fs_blank(ctx);
  if (ordb == b.uwin && b.tail_floor >= kInfV) return fs_blank(ctx);
  FloatSeries r = fs_blank(ctx);
  long long uw = std::min<long long>(W, std::min<long long>(static_cast<long long>(a.uwin) + ordb,
                                                            static_cast<long long>(b.uwin) + orda));
  r.uwin = static_cast<int>(std::max(0LL, uw));
  for (int k = 0; k < r.uwin; ++k) {
    FloatCoef acc;
    int lo = std::max(0, k - (b.uwin - 1));
    int hi = std::min(k, a.uwin - 1);
    for (int i = lo; i <= hi; ++i) {
      const FloatCoef& ai = a.c[static_cast<std::size_t>(i)];
      if (exact_zero(ai)) continue;
      const FloatCoef& bj = b.c[static_cast<std::size_t>(k - i)];
      if (exact_zero(bj)) continue;
      acc = fc_add(ctx, acc, fc_mul(ctx, ai, bj));
    }
    r.c[static_cast<std::size_t>(k)] = acc;
  }
  long long fl = kInfV;
  if (a.tail_floor < kInfV) fl = std::min(fl, vadd(vadd(a.tail_floor, a.uwin), vadd(gauss_val(b), -r.uwin)));
  if (b.tail_floor < kInfV) fl = std::min(fl, vadd(vadd(b.tail_floor, b.uwin), vadd(gauss_val(a), -r.uwin)));
  // dropped known-times-known products landing at or beyond the window
  std::vector<long long> sufb(static_cast<std::size_t>(b.uwin) + 1, kInfV);
  for (int j = b.uwin - 1; j >= 0; --j) {
    const FloatCoef& bj = b.c[static_cast<std::size_t>(j)];
    sufb[static_cast<std::size_t>(j)] = sufb[static_cast<std::size_t>(j) + 1];
    if (!exact_zero(bj))
      sufb[static_cast<std::size_t>(j)] =
          std::min(sufb[static_cast<std::size_t>(j)], static_cast<long long>(bj.val) + j);
  }
  for (int i = 0; i < a.uwin; ++i) {
    const FloatCoef& ai = a.c[static_cast<std::size_t>(i)];
    if (exact_zero(ai)) continue;
    int start = std::max(0, r.uwin - i);
    if (start >= b.uwin) continue;
    fl = std::min(fl, vadd(vadd(static_cast<long long>(ai.val) + i, sufb[static_cast<std::size_t>(start)]),
                           -r.uwin));
  }
  r.tail_floor = clamp_val(fl);
  return r;
}

FloatSeries fs_scale(const FloatSeries& a, const FloatCoef& k) {
  const PrecisionCtx& ctx = a.ctx;
  if (exact_zero(k)) return fs_blank(ctx);
  FloatSeries r = a;
  for (int i = 0; i < r.uwin; ++i)
    r.c[static_cast<std::size_t>(i)] = fc_mul(ctx, a.c[static_cast<std::size_t>(i)], k);
  r.tail_floor = clamp_val(vadd(a.tail_floor, k.val));
  return r;
}

FloatSeries fs_ddu(const FloatSeries& a) {
  const PrecisionCtx& ctx = a.ctx;
  FloatSeries r = fs_blank(ctx);
  r.uwin = std::max(0, a.uwin - 1);
  for (int k = 0; k < r.uwin; ++k)
    r.c[static_cast<std::size_t>(k)] =
        fc_mul(ctx, a.c[static_cast<std::size_t>(k) + 1], fc_from_i64(ctx, k + 1));
  r.tail_floor = a.tail_floor;
  return r;
}

FloatSeries fs_frob(const FloatSeries& a) {
  const PrecisionCtx& ctx = a.ctx;
  int p = static_cast<int>(ctx.p);
  FloatSeries r = fs_blank(ctx);
  long long uw = std::min<long long>(ctx.M, static_cast<long long>(p) * a.uwin);
  r.uwin = static_cast<int>(uw);
  for (int k = 0; k * p < r.uwin; ++k) r.c[static_cast<std::size_t>(k) * p] = a.c[static_cast<std::size_t>(k)];
  long long fl = vadd(a.tail_floor, static_cast<long long>(p) * a.uwin - r.uwin);
  for (int k = 0; k < a.uwin; ++k) {
    if (static_cast<long long>(k) * p < r.uwin) continue;
    const FloatCoef& ck = a.c[static_cast<std::size_t>(k)];
    if (exact_zero(ck)) continue;
    fl = std::min(fl, static_cast<long long>(ck.val) + static_cast<long long>(k) * p - r.uwin);
  }
  r.tail_floor = clamp_val(fl);
  return r;
}

FloatSeries fs_shift(const FloatSeries& a, int k) {
  const PrecisionCtx& ctx = a.ctx;
  if (k < 0) throw Error(ErrorKind::usage, "series shift by a negative power");
  FloatSeries r = fs_blank(ctx);
  long long uw = std::min<long long>(ctx.M, static_cast<long long>(a.uwin) + k);
  r.uwin = static_cast<int>(uw);
  for (int i = 0; i + k < r.uwin; ++i) r.c[static_cast<std::size_t>(i + k)] = a.c[static_cast<std::size_t>(i)];
  long long fl = vadd(a.tail_floor, static_cast<long long>(a.uwin) + k - r.uwin);
  for (int i = 0; i < a.uwin; ++i) {
    if (i + k < r.uwin) continue;
    const FloatCoef& ci = a.c[static_cast<std::size_t>(i)];
    if (exact_zero(ci)) continue;
    fl = std::min(fl, static_cast<long long>(ci.val) + i + k - r.uwin);
  }
  r.tail_floor = clamp_val(fl);
  return r;
}

FloatSeries fs_inv(const FloatSeries& a) {
  const PrecisionCtx& ctx = a.ctx;
  if (a.uwin < 1 || exact_zero(a.c[0]))
    throw Error(ErrorKind::unit_expected, "series inverse requires a nonzero constant term");
  if (a.c[0].unit == 0)
    throw Error(ErrorKind::uncertified_precision,
                "series inverse requires a certified unit constant term");
  long long v0 = a.c[0].val;
  FloatSeries r = fs_blank(ctx);
  r.uwin = a.uwin;
  FloatCoef t0 = fc_inv(ctx, a.c[0]);
  r.c[0] = t0;
  for (int k = 1; k < r.uwin; ++k) {
    FloatCoef acc;
    for (int j = 1; j <= k; ++j) {
      const FloatCoef& sj = a.c[static_cast<std::size_t>(j)];
      if (exact_zero(sj)) continue;
      acc = fc_add(ctx, acc, fc_mul(ctx, sj, r.c[static_cast<std::size_t>(k - j)]));
    }
    r.c[static_cast<std::size_t>(k)] = fc_neg(ctx, fc_mul(ctx, t0, acc));
  }
  // slope bound: val(t_k) >= -v0 + k * beta with beta = min_j (val(s_j) - v0) / j
  long long bn = 1, bd = 0;  // beta = +inf
  auto fold = [&](long long num, long long den) {
    if (bd == 0 || num * bd < bn * den) {
      bn = num;
      bd = den;
    }
  };
  for (int j = 1; j < a.uwin; ++j) {
    const FloatCoef& sj = a.c[static_cast<std::size_t>(j)];
    if (exact_zero(sj)) continue;
    fold(static_cast<long long>(sj.val) - v0, j);
  }
  if (a.tail_floor < kInfV) {
    long long cc = vadd(a.tail_floor, a.uwin) - v0;
    if (cc >= 0)
      fold(-1, 1);
    else
      fold(cc - a.uwin, a.uwin);
  }
  long long fl;
  if (bd == 0) {
    fl = kInfV;
  } else if (bn + bd < 0) {
    fl = kFloorBottom;  // slope below -1: tail valuations unbounded
  } else {
    long long num = static_cast<long long>(r.uwin) * bn;
    long long q = num >= 0 ? num / bd : -((-num + bd - 1) / bd);
    fl = -v0 + q;
  }
  r.tail_floor = clamp_val(fl);
  return r;
}

FloatCoef fs_ev_p(const FloatSeries& a) {
  const PrecisionCtx& ctx = a.ctx;
  FloatCoef acc;
  for (int k = 0; k < a.uwin; ++k) {
    const FloatCoef& ck = a.c[static_cast<std::size_t>(k)];
    if (exact_zero(ck)) continue;
    FloatCoef pk;
    pk.val = k;
    pk.unit = 1;
    pk.rel = ctx.N;
    acc = fc_add(ctx, acc, fc_mul(ctx, ck, pk));
  }
  if (a.tail_floor < kInfV / 2) acc = fc_add(ctx, acc, fc_ball(vadd(a.tail_floor, a.uwin)));
  return acc;
}

bool fs_eq(const FloatSeries& a, const FloatSeries& b) {
  int w = std::min(a.uwin, b.uwin);
  for (int k = 0; k < w; ++k)
    if (!fc_eq(a.ctx, a.c[static_cast<std::size_t>(k)], b.c[static_cast<std::size_t>(k)])) return false;
  return true;
}

FSMatrix::FSMatrix(const PrecisionCtx& ctx, int rows_in, int cols_in) {
  rows = rows_in;
  cols = cols_in;
  e.assign(static_cast<std::size_t>(rows) * cols, fs_blank(ctx));
}

FSMatrix FSMatrix::identity(const PrecisionCtx& ctx, int n) {
  FSMatrix m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = fs_one(ctx);
  return m;
}

FSMatrix fsm_add(const FSMatrix& a, const FSMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw Error(ErrorKind::internal, "series matrix shape mismatch");
  FSMatrix r = a;
  for (std::size_t k = 0; k < r.e.size(); ++k) r.e[k] = fs_add(a.e[k], b.e[k]);
  return r;
}

FSMatrix fsm_sub(const FSMatrix& a, const FSMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw Error(ErrorKind::internal, "series matrix shape mismatch");
  FSMatrix r = a;
  for (std::size_t k = 0; k < r.e.size(); ++k) r.e[k] = fs_sub(a.e[k], b.e[k]);
  return r;
}

FSMatrix fsm_mul(const FSMatrix& a, const FSMatrix& b) {
  if (a.cols != b.rows) throw Error(ErrorKind::internal, "series matrix shape mismatch");
  const PrecisionCtx& ctx = a.e.empty() ? b.e.front().ctx : a.e.front().ctx;
  FSMatrix r(ctx, a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      FloatSeries acc = fs_blank(ctx);
      for (int k = 0; k < a.cols; ++k) acc = fs_add(acc, fs_mul(a.at(i, k), b.at(k, j)));
      r.at(i, j) = acc;
    }
  return r;
}

FSMatrix fsm_inv(const FSMatrix& a) {
  if (a.rows != a.cols) throw Error(ErrorKind::usage, "matrix inverse requires a square matrix");
  if (a.rows == 0) return a;
  const PrecisionCtx& ctx = a.e.front().ctx;
  if (a.rows > 12) throw Error(ErrorKind::usage, "series matrix inverse limited to rank 12");
  DetTable tab(a);
  unsigned full = (a.cols >= 32) ? 0u : ((1u << a.cols) - 1u);
  const FloatSeries& det = tab.det(-1, full);
  if (ord_of(det) == det.uwin && det.tail_floor >= kInfV)
    throw Error(ErrorKind::unit_expected, "series matrix is not invertible");
  FloatSeries di = fs_inv(det);
  FSMatrix r(ctx, a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      const FloatSeries& minor = tab.det(j, full & ~(1u << i));
      FloatSeries cof = ((i + j) % 2 == 0) ? minor : fs_neg(minor);
      r.at(i, j) = fs_mul(cof, di);
    }
  return r;
}

FSMatrix connection_seed(const BKSpec& spec) {
  PrecisionCtx wctx = word_ctx(spec.p, spec.M);
  FSMatrix c = frob_matrix(wctx, spec);
  FSMatrix cp = fsm_map(c, &fs_ddu);
  return fsm_neg(fsm_mul(cp, fsm_inv(c)));
}

ConnectionMatrix solve_connection(const BKSpec& spec) {
  PrecisionCtx wctx = word_ctx(spec.p, spec.M);
  FSMatrix c = frob_matrix(wctx, spec);
  FSMatrix cp = fsm_map(c, &fs_ddu);
  FSMatrix ci = fsm_inv(c);
  FSMatrix n = fsm_neg(fsm_mul(cp, ci));
  ConnectionMatrix conn;
  conn.wctx = wctx;
  conn.rank = spec.rank;
  int budget = 4 * wctx.M;
  bool settled = false;
  for (int it = 1; it <= budget; ++it) {
    FSMatrix next = connection_step(wctx, c, cp, ci, n);
    bool same = true;
    for (std::size_t k = 0; k < n.e.size() && same; ++k) same = fs_repr_eq(n.e[k], next.e[k]);
    n = std::move(next);
    conn.iterations = it;
    if (same) {
      settled = true;
      break;
    }
  }
  if (!settled)
    throw Error(ErrorKind::connection_diverged,
                "connection iteration did not stabilize within the budget");
  conn.n_mat = n;
  HorizontalityReport rep = horizontality_core(c, cp, n);
  if (!rep.zero)
    throw Error(ErrorKind::connection_diverged,
                "connection iteration stabilized without horizontality");
  conn.residual_val = rep.certified_val;
  conn.residual_uorder = rep.certified_uorder;
  return conn;
}

std::vector<FloatSeries> apply_nabla(const ConnectionMatrix& conn,
                                      const std::vector<FloatSeries>& x) {
  if (static_cast<int>(x.size()) != conn.rank)
    throw Error(ErrorKind::usage, "vector length does not match the connection rank");
  std::vector<FloatSeries> out;
  out.reserve(x.size());
  for (int i = 0; i < conn.rank; ++i) {
    FloatSeries acc = fs_ddu(x[static_cast<std::size_t>(i)]);
    for (int j = 0; j < conn.rank; ++j)
      acc = fs_add(acc, fs_mul(conn.n_mat.at(i, j), x[static_cast<std::size_t>(j)]));
    out.push_back(std::move(acc));
  }
  return out;
}

HorizontalityReport verify_horizontality(const BKSpec& spec, const ConnectionMatrix& conn) {
  require_conn(spec, conn);
  FSMatrix c = frob_matrix(conn.wctx, spec);
  FSMatrix cp = fsm_map(c, &fs_ddu);
  return horizontality_core(c, cp, conn.n_mat);
}

GriffithsReport verify_griffiths(const BKSpec& spec, const ConnectionMatrix& conn, int i) {
  require_conn(spec, conn);
  if (i < 1) throw Error(ErrorKind::usage, "transversality layer index must be at least 1");
  PrecisionCtx ctx_s = PrecisionCtx::make(spec.p, conn.wctx.N, spec.M);
  BKModule bk = instantiate(spec, ctx_s.N);
  NygaardFiltration nyg = nygaard(bk, i);
  GriffithsLattice lat = build_lattice(ctx_s, nyg, spec.rank, i);

  GriffithsReport rep;
  rep.layer = i;
  rep.ok = true;
  rep.certified_val = kInfV;
  std::vector<PolyVec> sources = fil_generators(ctx_s, nyg, spec.rank, i);
  for (const auto& src : sources) {
    std::vector<std::vector<uint64_t>> comps = src.comp;
    SourceSolve s = solve_source(spec, conn, ctx_s, lat, comps, false, 0);
    if (!s.within_cap || !s.solvable || !s.integral) {
      rep.ok = false;
      rep.max_denominator = std::max(rep.max_denominator, s.dt);
      continue;
    }
    rep.max_denominator = std::max(rep.max_denominator, s.dt);
    rep.certified_val = std::min(rep.certified_val, s.ncert - s.dt);
  }
  if (rep.certified_val >= kInfV) rep.certified_val = 0;
  return rep;
}

ConjThetaExport conj_theta(const BKSpec& spec, const ConnectionMatrix& conn, int i_max) {
  require_conn(spec, conn);
  PrecisionCtx ctx_s = PrecisionCtx::make(spec.p, conn.wctx.N, spec.M);
  PrecisionCtx ctx_n = PrecisionCtx::make(spec.p, spec.N, spec.M);
  BKModule bk = instantiate(spec, ctx_s.N);
  int imax = i_max < 0 ? default_i_max(bk) : i_max;
  if (imax < 1) throw Error(ErrorKind::usage, "conjugate window must contain at least one layer");
  NygaardFiltration nyg = nygaard(bk, imax);
  ConjFiltration conj = conj_fil(bk, nyg);

  ConjThetaExport out;
  out.ftm.ctx = ctx_n;
  out.dbar.assign(static_cast<std::size_t>(conj.i_max), ZMatrix(ctx_n, 0, 0));

  int rank0 = conj.layers[0].rank;
  FTMLayer bottom;
  bottom.index = 0;
  bottom.inclusion = ZMatrix(ctx_n, rank0, 0);
  bottom.theta = ZMatrix(ctx_n, rank0, rank0);
  out.ftm.layers.push_back(bottom);

  for (int i = 1; i < conj.i_max; ++i) {
    const ConjLayer& lay = conj.layers[static_cast<std::size_t>(i)];
    const ConjLayer& prev = conj.layers[static_cast<std::size_t>(i - 1)];
    GriffithsLattice lat = build_lattice(ctx_s, nyg, spec.rank, i);

    // classes of the lattice generators in the previous conjugate layer
    std::vector<std::vector<uint64_t>> zfree;
    zfree.reserve(lat.z.size());
    for (const auto& z : lat.z) {
      auto amb = pad_poly_vec(z, spec.rank, i);
      auto cls = prev.pres.coords(amb);
      if (!cls.in_big)
        throw Error(ErrorKind::internal, "lattice generator escapes the previous layer");
      zfree.push_back(cls.free_part);
    }

    ZMatrix dbar(ctx_n, prev.rank, lay.rank);
    for (int g = 0; g < lay.basis_reps.rows(); ++g) {
      std::vector<std::vector<uint64_t>> comps(static_cast<std::size_t>(spec.rank));
      for (int j = 0; j < spec.rank; ++j) {
        auto& cj = comps[static_cast<std::size_t>(j)];
        cj.assign(static_cast<std::size_t>(i) + 1, 0);
        for (int a = 0; a <= i; ++a) cj[static_cast<std::size_t>(a)] = lay.basis_reps.at(g, j * (i + 1) + a);
      }
      SourceSolve s = solve_source(spec, conn, ctx_s, lat, comps, g == 0,
                                   0xC0FFEEULL + static_cast<uint64_t>(i));
      if (!s.within_cap || !s.solvable)
        throw Error(ErrorKind::griffiths_violation,
                    "derivative of a conjugate class leaves the certified span");
      if (!s.integral)
        throw Error(ErrorKind::griffiths_violation,
                    "evaluation of a connection coefficient is not p-integral");
      PrecisionCtx cctx = PrecisionCtx::make(spec.p, s.ncert, spec.M);
      auto column_of = [&](const std::vector<uint64_t>& ev) {
        std::vector<uint64_t> col(static_cast<std::size_t>(prev.rank), 0);
        for (std::size_t j = 0; j < ev.size(); ++j) {
          uint64_t w = ev[j] % cctx.pN;
          if (w == 0) continue;
          for (int t = 0; t < prev.rank; ++t)
            col[static_cast<std::size_t>(t)] =
                addm(cctx, col[static_cast<std::size_t>(t)],
                     cctx.mul(w, zfree[j][static_cast<std::size_t>(t)] % cctx.pN));
        }
        for (auto& v : col) {
          if (cctx.vp(v) < s.dt)
            throw Error(ErrorKind::well_definedness,
                        "conjugate derivative class is not divisible by the denominator");
          v = cctx.div_ppow(v, s.dt) % ctx_n.pN;
        }
        return col;
      };
      auto col = column_of(s.evnum);
      if (s.has_alt && column_of(s.evnum_alt) != col)
        throw Error(ErrorKind::well_definedness,
                    "conjugate derivative depends on the chosen solution");
      for (int t = 0; t < prev.rank; ++t) dbar.at(t, g) = col[static_cast<std::size_t>(t)];
    }

    ZMatrix incl = reduce_matrix(conj.transitions[static_cast<std::size_t>(i - 1)], ctx_n);
    ZMatrix theta = incl * dbar - ZMatrix::identity(ctx_n, lay.rank).scale(ctx_n.reduce_i64(i));
    FTMLayer ftml;
    ftml.index = i;
    ftml.inclusion = incl;
    ftml.theta = theta;
    out.ftm.layers.push_back(ftml);
    out.dbar[static_cast<std::size_t>(i)] = dbar;
  }
  return out;
}

}  // namespace nkit
