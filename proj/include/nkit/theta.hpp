#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nkit/linalg.hpp"

namespace nkit {

// One layer of a filtered theta-module: a free module of rank theta.rows()
// with the inclusion map from the previous layer (rank x prev_rank; the
// bottom layer carries a rank x 0 matrix) and the theta endomorphism.
struct FTMLayer {
  int index = 0;
  ZMatrix inclusion;
  ZMatrix theta;
  int rank() const { return theta.rows(); }
};

// Increasing filtration Fil_{i_lo} -> ... -> Fil_{i_hi} of free modules with
// compatible theta operators acting as -i on the i-th graded piece.
struct FilteredThetaModule {
  PrecisionCtx ctx;
  std::vector<FTMLayer> layers;  // consecutive indices, ascending

  int i_lo() const { return layers.empty() ? 0 : layers.front().index; }
  int i_hi() const { return layers.empty() ? -1 : layers.back().index; }
  bool in_range(int i) const { return !layers.empty() && i >= i_lo() && i <= i_hi(); }
  const FTMLayer& layer(int i) const;
};

struct FTMViolation {
  int index = 0;
  std::string what;
};

// Structural and axiom checks: consistent shapes, injective inclusions
// (full column rank), theta compatible with the inclusions, and
// (theta_i + i)(Fil_i) inside the image of the inclusion. Returns an empty
// list when the module is valid; never throws.
std::vector<FTMViolation> validate_ftm(const FilteredThetaModule& m);

// Graded piece Fil_i / incl(Fil_{i-1}) of each layer.
QuotientPresentation ftm_graded(const FilteredThetaModule& m, int i);
std::vector<std::pair<int, DivisorProfile>> ftm_profiles(const FilteredThetaModule& m);

struct AdTheta {
  std::int64_t diff = 0;       // i - j as an integer
  std::uint64_t value = 0;     // reduced mod p^N
  bool unit = false;
};

// Commutator scalar on Hom(gr_i, gr_j): X -> theta X - X theta is
// multiplication by i - j. Requires j < i, both in range.
AdTheta ad_theta(const FilteredThetaModule& m, int i, int j);

struct SplitOutcome {
  bool ok = false;
  // columns: section images in Fil_i of the graded generators (free then
  // torsion, in presentation order)
  ZMatrix section;
  int blocking_layer = 0;  // first layer j where the descent got stuck (when !ok)
  QuotientPresentation graded;
};

// Splits 0 -> Fil_{i-1} -> Fil_i -> gr_i -> 0 theta-equivariantly: lifts the
// graded generators, then corrects the defect (theta + i) layer by layer down
// the filtration solving (i-j) X = defect on Hom(gr_i, gr_j). A nonzero seed
// shifts the initial lift by a seeded element of the image of the inclusion.
SplitOutcome split_layer(const FilteredThetaModule& m, int i, std::uint64_t seed = 0);

struct Summand {
  int index = 0;
  ZMatrix gens;  // rows: generators expressed in Fil_{i_hi} coordinates
};

struct DecomposeReport {
  std::vector<Summand> summands;
  std::vector<int> skipped;  // layers where no section exists
};

// Applies split_layer bottom-up and pushes the resulting eigen-generators to
// the top layer; layers whose graded piece admits no section are reported.
DecomposeReport decompose(const FilteredThetaModule& m);

struct PropVerdict {
  bool pass = true;
  std::vector<int> offending;
  std::vector<std::pair<int, int>> ht;  // (index, free rank) with free rank > 0
};

// Torsion in gr_i is admissible only when i = w + m p with w a free-graded
// index and m > 0.
PropVerdict check_prop(const FilteredThetaModule& m);

// True when the only theta-equivariant map gr_i -> Fil_{i-1} at working
// precision is zero; governs uniqueness of the section at layer i.
bool hom_vanish(const FilteredThetaModule& m, int i);

// Seeded generator of valid modules: standard-embedding towers with diagonal
// blocks -i, random strictly-upper coupling, a scalar-tower torsion variant,
// and a random unimodular change of basis per layer.
FilteredThetaModule random_ftm(std::uint64_t p, int N, std::uint64_t seed, int max_rank = 6,
                               int max_window = 8);

}  // namespace nkit
