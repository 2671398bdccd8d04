#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nkit/linalg.hpp"
#include "nkit/series.hpp"

namespace nkit {

// Dense matrix over the truncated series ring.
class SeriesMatrix {
 public:
  SeriesMatrix() = default;
  SeriesMatrix(const PrecisionCtx& ctx, int rows, int cols);
  static SeriesMatrix identity(const PrecisionCtx& ctx, int n);
  static SeriesMatrix eis_identity(const PrecisionCtx& ctx, int n, int power);

  const PrecisionCtx& ctx() const { return ctx_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  TruncSeries& at(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const TruncSeries& at(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b);
  friend SeriesMatrix operator+(const SeriesMatrix& a, const SeriesMatrix& b);
  friend SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b);
  SeriesMatrix scale(const TruncSeries& f) const;
  bool operator==(const SeriesMatrix& o) const;

  TruncSeries det() const;
  SeriesMatrix adjugate() const;
  // entrywise evaluation at u = p (requires certified-integral entries)
  ZMatrix ev_p_matrix() const;
  SeriesMatrix frob_entrywise() const;
  SeriesMatrix ddu_entrywise() const;
  int min_uprec() const;

 private:
  PrecisionCtx ctx_;
  int rows_ = 0, cols_ = 0;
  std::vector<TruncSeries> a_;
};

// Exact integer description of a Breuil-Kisin instance; coefficients are
// plain integers so the same instance can be instantiated at several
// precisions.
struct BKSpec {
  std::uint64_t p = 3;
  int N = 12;
  int M = 64;
  int rank = 1;
  int height = 1;
  bool assume_crystalline = true;
  std::string name;
  // frob[i][j] = coefficient list (lowest degree first) of entry (i, j)
  std::vector<std::vector<std::vector<std::int64_t>>> frob;
};

struct BKModule {
  PrecisionCtx ctx;
  int rank = 0;
  int height = 0;
  bool assume_crystalline = true;
  SeriesMatrix frobenius;
};

BKModule instantiate(const BKSpec& spec);
BKModule instantiate(const BKSpec& spec, int n_override);

// Height certificate: B with A*B = B*A = E^height * I.
// Throws NotFiniteHeight when no such B exists at this precision.
SeriesMatrix validate_bk(const BKModule& bk);

struct NygaardFiltration {
  int rank = 0;
  int i_max = 0;
  // level[i] = kernel of multiplication by the Frobenius matrix on
  // (S/E^i)^rank in the basis u^a e_j (column index j*i + a); level[0] is the
  // zero module in ambient 0 (the whole module, nothing quotiented).
  std::vector<Submodule> level;
};

// Matrix of x -> A*x on (S/E^i)^rank in the u-power basis.
ZMatrix nygaard_action_matrix(const BKModule& bk, int i);
// Matrix of x -> E*x from (S/E^i)^rank into (S/E^{i+1})^rank.
ZMatrix eis_step_matrix(const PrecisionCtx& ctx, int rank, int i);
// Truncation (S/E^{i+1})^rank -> (S/E^i)^rank reducing each component mod E^i.
ZMatrix eis_drop_matrix(const PrecisionCtx& ctx, int rank, int i);

NygaardFiltration nygaard(const BKModule& bk, int i_max);

struct HodgeData {
  int rank = 0;
  int i_max = 0;
  std::vector<Submodule> fil;  // fil[i] inside (Z/p^N)^rank, 0 <= i <= i_max
};

HodgeData hodge_fil(const BKModule& bk, const NygaardFiltration& nyg);

struct GradedReport {
  int i_max = 0;  // examined window: gr[0 .. i_max-1]
  std::vector<DivisorProfile> gr;
  std::vector<int> torsion_indices() const;
  bool operator==(const GradedReport& o) const { return i_max == o.i_max && gr == o.gr; }
};

GradedReport graded(const HodgeData& hodge);

struct ConjLayer {
  int index = 0;
  int rank = 0;                     // certified free rank of Fil_i^conj
  ZMatrix basis_reps;               // rows: representatives in (S/E^{i+1})^r coords
  QuotientPresentation pres;        // F_i / K_{i+1}
};

struct ConjFiltration {
  int i_max = 0;
  std::vector<ConjLayer> layers;        // indices 0 .. i_max-1
  std::vector<ZMatrix> transitions;     // T[i]: layer i -> layer i+1, times E
  int stabilization = 0;                // all transitions from this index on are isos
};

ConjFiltration conj_fil(const BKModule& bk, const NygaardFiltration& nyg);

struct HTWeights {
  std::vector<std::pair<int, int>> weights;  // (index, multiplicity), ascending
  int total() const;
  bool contains(int w) const;
};

HTWeights ht_weights(const GradedReport& report);

struct TheoremVerdict {
  bool pass = true;
  bool crystalline_assumed = true;  // false: no guarantee claimed
  std::vector<int> offending;
};

// Torsion at index i is admissible only when i = w + m*p, w a weight, m > 0.
TheoremVerdict check_theorem(const GradedReport& report, const HTWeights& ht,
                             const PrecisionCtx& ctx, bool assume_crystalline);

// Effective module corollary: no torsion strictly below p.
TheoremVerdict check_effective_di(const GradedReport& report, const PrecisionCtx& ctx,
                                  bool assume_crystalline);

struct EscalationReport {
  int n_low = 0;
  int n_high = 0;
  GradedReport low;
  GradedReport high;
  bool stable = false;
};

// Recompute the graded report at two precisions and require agreement of all
// torsion below p^{N1} plus matching free ranks. Instability or a pipeline
// precision failure raises UncertifiedPrecision.
EscalationReport precision_escalate(const BKSpec& spec, int n1, int n2, int i_max);

int default_i_max(const BKModule& bk);

}  // namespace nkit
