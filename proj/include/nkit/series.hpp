#pragma once

#include <cstdint>
#include <vector>

#include "nkit/prec.hpp"

namespace nkit {

// Element of (Z/p^N)[u]/(u^M) with a precision ledger.
// pprec: coefficients are guaranteed mod p^pprec (<= N).
// uprec: coefficients below u^uprec are guaranteed (<= M).
class TruncSeries {
 public:
  TruncSeries() = default;
  TruncSeries(const PrecisionCtx& ctx, std::vector<std::uint64_t> coeffs, int pprec, int uprec);

  static TruncSeries zero(const PrecisionCtx& ctx);
  static TruncSeries constant(const PrecisionCtx& ctx, std::uint64_t c);
  static TruncSeries from_ints(const PrecisionCtx& ctx, const std::vector<std::int64_t>& cs);
  static TruncSeries monomial(const PrecisionCtx& ctx, int k, std::uint64_t c = 1);
  // E(u) = u - p, the fixed Eisenstein polynomial of this setting
  static TruncSeries eis(const PrecisionCtx& ctx);

  const PrecisionCtx& ctx() const { return ctx_; }
  int pprec() const { return pprec_; }
  int uprec() const { return uprec_; }
  const std::vector<std::uint64_t>& coeffs() const { return c_; }
  std::uint64_t coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : 0; }

  bool is_zero() const;
  // largest i with u^i | f, or uprec if none visible
  int u_valuation() const;
  bool is_unit() const { return ctx_.is_unit(coeff(0)); }

  TruncSeries with_prec(int pprec, int uprec) const;

  friend TruncSeries operator+(const TruncSeries& a, const TruncSeries& b);
  friend TruncSeries operator-(const TruncSeries& a, const TruncSeries& b);
  friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b);
  TruncSeries operator-() const;
  TruncSeries scale(std::uint64_t c) const;
  // multiply by u^k (drops the top k coefficients off the window)
  TruncSeries shift(int k) const;

  bool operator==(const TruncSeries& o) const;

 private:
  PrecisionCtx ctx_;
  std::vector<std::uint64_t> c_;  // size M, index = u-degree
  int pprec_ = 0;
  int uprec_ = 0;
};

struct EisDivResult {
  TruncSeries quotient;   // uprec reduced by i
  TruncSeries remainder;  // polynomial of degree < i; pprec min(f.pprec, f.uprec - i + 1)
};

// Division with remainder by E^i = (u - p)^i. Requires 0 <= i <= uprec(f).
EisDivResult eis_divide(const TruncSeries& f, int i);

// Reduction mod E^i only (degree < i polynomial part).
TruncSeries eis_remainder(const TruncSeries& f, int i);

struct EvalResult {
  PrecisionCtx ctx;
  std::uint64_t num = 0;  // value = num / p^denom_exp
  int denom_exp = 0;      // normalized: denom_exp == 0 or p does not divide num
  int certified = 0;      // value is guaranteed mod p^certified (absolute precision)

  // p-adic valuation as far as certified; returns certified when num == 0 within precision
  int valuation() const;
  bool certified_integral() const;      // v >= 0 provable at this precision
  bool certified_non_integral() const;  // v < 0 provable at this precision
};

// Evaluation u -> p (reduction along E); certified to min(pprec, uprec).
EvalResult ev_p(const TruncSeries& f);

// Frobenius u -> u^p; output uprec = min(M, p * uprec(f)).
TruncSeries frob(const TruncSeries& f);

// d/du; output uprec = uprec(f) - 1.
TruncSeries ddu(const TruncSeries& f);

// Inverse of a unit series (constant coefficient a p-adic unit).
TruncSeries invert_unit(const TruncSeries& f);

// E^k as a series
TruncSeries eis_pow(const PrecisionCtx& ctx, int k);

// p^{-d} * body with the ledger carried by the body.
struct ScaledSeries {
  int denom_exp = 0;
  TruncSeries body;

  static ScaledSeries from(const TruncSeries& f, int d = 0) { return {d, f}; }
  const PrecisionCtx& ctx() const { return body.ctx(); }
  // guaranteed absolute p-precision of the represented value
  int value_pprec() const { return body.pprec() - denom_exp; }

  // strip common p-powers from denominator and body (reduces body pprec accordingly)
  ScaledSeries normalized() const;

  friend ScaledSeries operator+(const ScaledSeries& a, const ScaledSeries& b);
  friend ScaledSeries operator-(const ScaledSeries& a, const ScaledSeries& b);
  friend ScaledSeries operator*(const ScaledSeries& a, const ScaledSeries& b);
  ScaledSeries operator-() const;
  bool same_value(const ScaledSeries& o) const;
};

EvalResult ev_p(const ScaledSeries& f);
ScaledSeries ddu(const ScaledSeries& f);

}  // namespace nkit
