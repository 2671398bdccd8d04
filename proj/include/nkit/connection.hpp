#pragma once

#include <cstdint>
#include <vector>

#include "nkit/bk.hpp"
#include "nkit/corpus.hpp"
#include "nkit/theta.hpp"

namespace nkit {

// Coefficient in Qp at floating word precision: value p^val * unit with unit a
// residue mod p^Nw (Nw = largest exponent fitting a machine word) known to rel
// digits. unit == 0 encodes a zero ball: vp(x) >= val, with kInf marking an
// exact zero.
struct FloatCoef {
  static constexpr int kInf = 1 << 26;
  int val = kInf;
  std::uint64_t unit = 0;
  int rel = 0;

  bool zero_ball() const { return unit == 0; }
  int abs_prec() const { return unit == 0 ? val : val + rel; }
};

// Largest N the working ring accepts (39 for p = 3, 26 for p = 5).
int word_digits(std::uint64_t p);
// Working ring for connection arithmetic: word digits, window >= max(M, 48).
PrecisionCtx word_ctx(std::uint64_t p, int M);

FloatCoef fc_from_i64(const PrecisionCtx& ctx, std::int64_t v);
FloatCoef fc_rational(const PrecisionCtx& ctx, std::int64_t num, std::int64_t den);
FloatCoef fc_add(const PrecisionCtx& ctx, const FloatCoef& a, const FloatCoef& b);
FloatCoef fc_neg(const PrecisionCtx& ctx, const FloatCoef& a);
FloatCoef fc_mul(const PrecisionCtx& ctx, const FloatCoef& a, const FloatCoef& b);
FloatCoef fc_inv(const PrecisionCtx& ctx, const FloatCoef& a);
// a == b to the shared known precision
bool fc_eq(const PrecisionCtx& ctx, const FloatCoef& a, const FloatCoef& b);

// Series over Qp with the coefficient window [0, ctx.M): entries at index
// >= uwin are unknown. tail_floor is an anchored bound for the tail:
// vp(c_k) >= tail_floor - (k - uwin) for every k >= uwin, so valuations may
// drop by at most one digit per step beyond the window.
struct FloatSeries {
  PrecisionCtx ctx;
  std::vector<FloatCoef> c;
  int uwin = 0;
  int tail_floor = FloatCoef::kInf;
};

FloatSeries fs_zero(const PrecisionCtx& ctx);
FloatSeries fs_one(const PrecisionCtx& ctx);
FloatSeries fs_eis(const PrecisionCtx& ctx);  // u - p
FloatSeries fs_from_ipoly(const PrecisionCtx& ctx, const IntPoly& poly);
FloatSeries fs_add(const FloatSeries& a, const FloatSeries& b);
FloatSeries fs_sub(const FloatSeries& a, const FloatSeries& b);
FloatSeries fs_mul(const FloatSeries& a, const FloatSeries& b);
FloatSeries fs_scale(const FloatSeries& a, const FloatCoef& k);
FloatSeries fs_ddu(const FloatSeries& a);
FloatSeries fs_frob(const FloatSeries& a);       // u -> u^p
FloatSeries fs_shift(const FloatSeries& a, int k);  // times u^k
FloatSeries fs_inv(const FloatSeries& a);        // invertible leading unit required
FloatCoef fs_ev_p(const FloatSeries& a);         // evaluate at u = p with tail ball
// a == b coefficientwise to the shared known precision and window
bool fs_eq(const FloatSeries& a, const FloatSeries& b);

struct FSMatrix {
  int rows = 0, cols = 0;
  std::vector<FloatSeries> e;

  FSMatrix() = default;
  FSMatrix(const PrecisionCtx& ctx, int rows, int cols);
  static FSMatrix identity(const PrecisionCtx& ctx, int n);
  FloatSeries& at(int i, int j) { return e[static_cast<std::size_t>(i) * cols + j]; }
  const FloatSeries& at(int i, int j) const { return e[static_cast<std::size_t>(i) * cols + j]; }
};

FSMatrix fsm_add(const FSMatrix& a, const FSMatrix& b);
FSMatrix fsm_sub(const FSMatrix& a, const FSMatrix& b);
FSMatrix fsm_mul(const FSMatrix& a, const FSMatrix& b);
FSMatrix fsm_inv(const FSMatrix& a);  // adjugate over the series field

// Derivation matrix on the dual module: D(x) = ddu(x) + n_mat * x, solving the
// Frobenius horizontality equation N*C + C' = p u^{p-1} C phi(N), C = frob(A).
struct ConnectionMatrix {
  PrecisionCtx wctx;
  int rank = 0;
  FSMatrix n_mat;
  int iterations = 0;
  int residual_val = 0;     // certified p-adic precision of the zero residual
  int residual_uorder = 0;  // certified u-adic window of the zero residual
};

// Seed N0 = -C' * C^{-1} of the fixed point (exposed for golden checks).
FSMatrix connection_seed(const BKSpec& spec);
ConnectionMatrix solve_connection(const BKSpec& spec);

std::vector<FloatSeries> apply_nabla(const ConnectionMatrix& conn,
                                      const std::vector<FloatSeries>& x);

struct HorizontalityReport {
  bool zero = false;
  int certified_val = 0;
  int certified_uorder = 0;
};
HorizontalityReport verify_horizontality(const BKSpec& spec, const ConnectionMatrix& conn);

// Certifies D(Fil^i) inside the span of the Fil^{i-1} generators with
// p-integral evaluations at u = p; denominators capped at N/2.
struct GriffithsReport {
  int layer = 0;
  bool ok = false;
  int max_denominator = 0;
  int certified_val = 0;
};
GriffithsReport verify_griffiths(const BKSpec& spec, const ConnectionMatrix& conn, int i);

// Conjugate layers with the induced derivation: theta_i = T_{i-1} dbar_i - i,
// assembled over the instance precision after certified escalated solves.
struct ConjThetaExport {
  FilteredThetaModule ftm;
  std::vector<ZMatrix> dbar;  // dbar[i]: layer i -> layer i-1 (dbar[0] unused)
};
ConjThetaExport conj_theta(const BKSpec& spec, const ConnectionMatrix& conn, int i_max = -1);

}  // namespace nkit
