#pragma once

#include <cstdint>
#include <vector>

#include "nkit/bk.hpp"

namespace nkit {

// Exact integer polynomials used to build instances without modular loss.
using IntPoly = std::vector<std::int64_t>;
IntPoly ipoly_add(const IntPoly& a, const IntPoly& b);
IntPoly ipoly_mul(const IntPoly& a, const IntPoly& b);
IntPoly ipoly_scale(const IntPoly& a, std::int64_t c);
IntPoly ipoly_frob(const IntPoly& a, std::uint64_t p);
IntPoly ipoly_eis_pow(std::uint64_t p, int k);  // (u - p)^k

using IntMat = std::vector<std::vector<IntPoly>>;
IntMat imat_identity(int n);
IntMat imat_mul(const IntMat& a, const IntMat& b);
IntMat imat_frob(const IntMat& a, std::uint64_t p);

// A = (E^{w_0}) + ... + (E^{w_{k-1}}) as a diagonal instance.
BKSpec diagonal_spec(std::uint64_t p, const std::vector<int>& weights, int N = 12, int M = 64);
BKSpec rank1_spec(std::uint64_t p, int weight, int N = 12, int M = 64);
BKSpec tate_spec(std::uint64_t p, int N = 12, int M = 64);

// Base change A -> U^{-1} A frob(U) by a deterministic unimodular U built
// from seeded elementary operations (det U = 1, so the inverse is exact).
BKSpec conjugate_spec(const BKSpec& spec, std::uint64_t seed);

// Crystalline-flagged instances: diagonal E-power modules over p in {3, 5}
// plus unimodular base changes of each.
std::vector<BKSpec> crystalline_corpus();

// Non-crystalline-flagged controls (triangular and kernel-pollution shapes).
std::vector<BKSpec> control_corpus();

}  // namespace nkit
