#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nkit/linalg.hpp"
#include "nkit/theta.hpp"

namespace nkit {

// Graded module over the Weyl relation D u - u D = 1 with deg(u) = -1 and
// deg(D) = +1, stored on a finite degree window. Components above the top
// degree are zero (the module is generated in degrees <= d_hi); below the
// bottom degree u is an isomorphism by convention.
struct GradedWeylModule {
  PrecisionCtx ctx;
  int d_lo = 0;               // degree of component 0
  std::vector<int> rank;      // rank[k] = rank of the degree d_lo + k component
  std::vector<ZMatrix> down;  // down[k]: multiplication by u, component k+1 -> k
  std::vector<ZMatrix> up;    // up[k]: the derivation D, component k -> k+1
  std::vector<int> gen_degrees;

  int window() const { return static_cast<int>(rank.size()); }
  int d_hi() const { return d_lo + window() - 1; }
  // structural equality; generator bookkeeping is not part of the module data
  bool operator==(const GradedWeylModule& o) const {
    return d_lo == o.d_lo && rank == o.rank && down == o.down && up == o.up;
  }
};

struct WeylViolation {
  int degree = 0;
  std::string what;
};

// Shape and axiom checks: operator degrees via matrix shapes, D u - u D = 1
// on every checkable component (the top component uses the zero-above-window
// convention, the bottom one the u-stabilization convention).
std::vector<WeylViolation> check_weyl(const GradedWeylModule& w);

// Fil_i = M^{deg = -i}: the same data indexed by filtration level, with the
// transition u: Fil_{i-1} -> Fil_i and the derivation D: Fil_i -> Fil_{i-1}.
struct ReesFiltration {
  PrecisionCtx ctx;
  int i_lo = 0;
  std::vector<int> rank;
  std::vector<ZMatrix> trans;  // trans[j]: layer j-1 -> j (trans[0] unused)
  std::vector<ZMatrix> der;    // der[j]: layer j -> j-1 (der[0] unused)

  int layers() const { return static_cast<int>(rank.size()); }
};

ReesFiltration rees(const GradedWeylModule& w);
GradedWeylModule unrees(const ReesFiltration& f);

// theta_i = u D - i on Fil_i; the bottom layer gets -i_lo (D exits the window).
std::vector<ZMatrix> theta_layers(const ReesFiltration& f);

// Layers plus theta operators as a filtered theta-module.
FilteredThetaModule rees_to_ftm(const ReesFiltration& f);

// Stabilized colimit of the filtration along u with its Sen operator.
struct SenModule {
  PrecisionCtx ctx;
  int rank = 0;
  int top_index = 0;
  ZMatrix theta;
};

// Requires the final transition to be an isomorphism; cross-checks the layer
// formula u D - i against D(m) + deg(m) m pushed into the colimit.
SenModule sen_module(const GradedWeylModule& w);

struct Coaction {
  int degree = 0;
  // terms[j] = D^j(m) in the degree + j component; empty above the window
  std::vector<std::vector<std::uint64_t>> terms;
};

// Iterated derivatives [m, D m, ..., D^k m]; also asserts the operator
// identity D^i u - u D^i = i D^{i-1} for 1 <= i <= k across the window.
Coaction coaction(const GradedWeylModule& w, int degree, const std::vector<std::uint64_t>& m,
                  int k);

// True iff (theta^p - theta) mod p is nilpotent; the module is free, so the
// reduction and the p-torsion kernel carry the same matrix.
bool nilpotence_check(const ZMatrix& theta);

// Free module on generators of the given weights (degrees -w) with
// D(g_j) = sum_l coupling[j][l] u^{w_j - w_l - 1} g_l; coupling entries must
// vanish unless w_l <= w_j - 1. depth: window levels kept below the heaviest
// weight. A null coupling means D = 0 on the generators.
GradedWeylModule weyl_module(std::uint64_t p, int N, const std::vector<int>& weights,
                             const std::vector<std::vector<std::int64_t>>& coupling, int depth);
GradedWeylModule weyl_from_weights(std::uint64_t p, int N, const std::vector<int>& weights,
                                   int depth);

GradedWeylModule random_weyl(std::uint64_t p, int N, std::uint64_t seed, int max_gens = 3,
                             int max_weight = 4);

}  // namespace nkit
