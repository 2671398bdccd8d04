#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nkit {

enum class ErrorKind {
  precision,            // requested operation exceeds the (N, M) window
  unit_expected,        // inversion of a non-unit
  not_finite_height,    // no B with A*B = B*A = E^h
  containment,          // claimed submodule containment fails
  freeness_violation,   // a quotient that must be free shows torsion
  uncertified_precision,// result exists but cannot be certified at this precision
  connection_diverged,  // fixed-point iteration did not stabilize
  griffiths_violation,  // nabla does not map Fil^i into S_p * Fil^{i-1}
  well_definedness,     // representative-dependent answer detected
  schema,               // malformed instance document
  usage,                // bad command line
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  ErrorKind kind;
};

const char* error_kind_name(ErrorKind k);

// product mod m, safe for m < 2^63
inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

// Shared arithmetic context: coefficients live in Z/p^N, series are cut at u^M.
// Every value in a computation carries one of these; mixing contexts is an error.
struct PrecisionCtx {
  std::uint64_t p = 0;
  int N = 0;             // p-adic precision exponent
  int M = 0;             // u-adic truncation order
  std::uint64_t pN = 0;  // cached p^N

  static PrecisionCtx make(std::uint64_t p, int N, int M);

  bool same_ring(const PrecisionCtx& o) const { return p == o.p && N == o.N && pN == o.pN; }
  bool same(const PrecisionCtx& o) const { return same_ring(o) && M == o.M; }

  std::uint64_t reduce_i64(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(pN);
    if (r < 0) r += static_cast<std::int64_t>(pN);
    return static_cast<std::uint64_t>(r);
  }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;  // both < pN < 2^63, no overflow
    return s >= pN ? s - pN : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + pN - b; }
  std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : pN - a; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return mulmod(a, b, pN); }

  // p^e as a residue (0 for e >= N); requires e >= 0
  std::uint64_t ppow(int e) const;

  // p-adic valuation of a residue, in [0, N]; vp(0) = N
  int vp(std::uint64_t a) const;

  bool is_unit(std::uint64_t a) const { return a % p != 0; }

  // inverse of a unit; throws unit_expected otherwise
  std::uint64_t inv_unit(std::uint64_t a) const;

  // exact division by p^e; requires p^e | a as stored integers
  std::uint64_t div_ppow(std::uint64_t a, int e) const;

  // a / b where vp(a) >= vp(b); quotient is determined mod p^{N - vp(b)},
  // returned as the canonical lift of (a / p^vp(b)) * inv(unit part of b)
  std::uint64_t div_exact(std::uint64_t a, std::uint64_t b) const;
};

// deterministic trial-division primality for small p
bool is_small_prime(std::uint64_t p);

}  // namespace nkit
