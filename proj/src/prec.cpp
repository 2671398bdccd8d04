#include "nkit/prec.hpp"

namespace nkit {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::precision: return "PrecisionError";
    case ErrorKind::unit_expected: return "UnitExpected";
    case ErrorKind::not_finite_height: return "NotFiniteHeight";
    case ErrorKind::containment: return "ContainmentError";
    case ErrorKind::freeness_violation: return "FreenessViolation";
    case ErrorKind::uncertified_precision: return "UncertifiedPrecision";
    case ErrorKind::connection_diverged: return "ConnectionDiverged";
    case ErrorKind::griffiths_violation: return "GriffithsViolation";
    case ErrorKind::well_definedness: return "WellDefinednessFailure";
    case ErrorKind::schema: return "SchemaError";
    case ErrorKind::usage: return "UsageError";
    case ErrorKind::internal: return "InternalError";
  }
  return "Error";
}

bool is_small_prime(std::uint64_t p) {
  if (p < 2) return false;
  if (p % 2 == 0) return p == 2;
  for (std::uint64_t d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

PrecisionCtx PrecisionCtx::make(std::uint64_t p, int N, int M) {
  if (!is_small_prime(p)) throw Error(ErrorKind::schema, "p must be prime, got " + std::to_string(p));
  if (p == 2) throw Error(ErrorKind::schema, "p = 2 is out of scope; p must be odd");
  if (N < 1) throw Error(ErrorKind::schema, "N must be >= 1");
  if (M < 1) throw Error(ErrorKind::schema, "M must be >= 1");
  PrecisionCtx c;
  c.p = p;
  c.N = N;
  c.M = M;
  c.pN = 1;
  for (int i = 0; i < N; ++i) {
    if (c.pN > (std::uint64_t(1) << 62) / p)
      throw Error(ErrorKind::precision, "p^N exceeds the 63-bit working range");
    c.pN *= p;
  }
  return c;
}

std::uint64_t PrecisionCtx::ppow(int e) const {
  if (e < 0) throw Error(ErrorKind::internal, "ppow: negative exponent");
  if (e >= N) return 0;
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

int PrecisionCtx::vp(std::uint64_t a) const {
  if (a == 0) return N;
  int v = 0;
  while (a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

std::uint64_t PrecisionCtx::inv_unit(std::uint64_t a) const {
  a %= pN;
  if (!is_unit(a)) throw Error(ErrorKind::unit_expected, "inverse of non-unit " + std::to_string(a));
  // Newton lift of the mod-p inverse: x -> x(2 - ax) doubles correct digits.
  std::uint64_t x = 1, ap = a % p;
  for (std::uint64_t c = 1; c < p - 1; ++c) x = (x * ap) % p;  // ap^(p-2) mod p
  std::uint64_t digits = 1;
  while (digits < static_cast<std::uint64_t>(N)) {
    x = mulmod(x, sub(2 % pN, mul(a, x)), pN);
    digits *= 2;
  }
  return x;
}

std::uint64_t PrecisionCtx::div_ppow(std::uint64_t a, int e) const {
  std::uint64_t q = ppow(e);
  if (e >= N) {
    if (a != 0) throw Error(ErrorKind::internal, "div_ppow: nonzero residue at full valuation");
    return 0;
  }
  if (q == 0 || a % q != 0) throw Error(ErrorKind::internal, "div_ppow: inexact division");
  return a / q;
}

std::uint64_t PrecisionCtx::div_exact(std::uint64_t a, std::uint64_t b) const {
  int vb = vp(b);
  if (vb >= N) throw Error(ErrorKind::unit_expected, "division by zero residue");
  if (vp(a) < vb) throw Error(ErrorKind::internal, "div_exact: valuation mismatch");
  std::uint64_t unit = b / ppow(vb);
  return mul(a / ppow(vb), inv_unit(unit));
}

}  // namespace nkit
