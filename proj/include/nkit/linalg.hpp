#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nkit/prec.hpp"

namespace nkit {

// Dense matrix over Z/p^N. Operator matrices act on column vectors (x -> A*x);
// submodule generators are kept as row vectors.
class ZMatrix {
 public:
  ZMatrix() = default;
  ZMatrix(const PrecisionCtx& ctx, int rows, int cols);

  static ZMatrix identity(const PrecisionCtx& ctx, int n);
  static ZMatrix from_rows(const PrecisionCtx& ctx,
                           const std::vector<std::vector<std::int64_t>>& rows);

  const PrecisionCtx& ctx() const { return ctx_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::uint64_t& at(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  std::uint64_t at(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  bool is_zero() const;
  ZMatrix transpose() const;
  std::vector<std::uint64_t> row(int i) const;
  std::vector<std::uint64_t> col(int j) const;
  void set_row(int i, const std::vector<std::uint64_t>& v);

  friend ZMatrix operator*(const ZMatrix& a, const ZMatrix& b);
  friend ZMatrix operator+(const ZMatrix& a, const ZMatrix& b);
  friend ZMatrix operator-(const ZMatrix& a, const ZMatrix& b);
  ZMatrix scale(std::uint64_t c) const;
  bool operator==(const ZMatrix& o) const;

  std::vector<std::uint64_t> apply(const std::vector<std::uint64_t>& x) const;  // A*x

 private:
  PrecisionCtx ctx_;
  int rows_ = 0, cols_ = 0;
  std::vector<std::uint64_t> a_;
};

// Smith data over Z/p^N: U*A*V = D with unit U, V and D = diag(p^{exps[t]}),
// exps nondecreasing, exps[t] = N encoding the zero residue.
struct SmithForm {
  ZMatrix U, Uinv, V, Vinv;
  std::vector<int> exps;  // length min(rows, cols)

  ZMatrix diagonal(const PrecisionCtx& ctx, int rows, int cols) const;
  // min(N, sum of exponents): valuation of det for square A, N meaning det == 0 mod p^N
  int det_valuation(const PrecisionCtx& ctx) const;
};

SmithForm snf(const ZMatrix& A);

bool is_unimodular(const ZMatrix& A);
ZMatrix inverse_unimodular(const ZMatrix& A);

// Canonical (Howell-form) row-space presentation of a submodule of (Z/p^N)^ambient.
// Two submodules are equal iff their Howell bases are identical.
class Submodule {
 public:
  Submodule() = default;
  static Submodule zero(const PrecisionCtx& ctx, int ambient);
  static Submodule full(const PrecisionCtx& ctx, int ambient);
  static Submodule from_rows(const ZMatrix& gens);

  const PrecisionCtx& ctx() const { return ctx_; }
  int ambient() const { return ambient_; }
  const ZMatrix& basis() const { return basis_; }
  int num_gens() const { return basis_.rows(); }
  const std::vector<int>& pivot_cols() const { return pivot_col_; }
  const std::vector<int>& pivot_exps() const { return pivot_exp_; }

  bool is_zero() const { return basis_.rows() == 0; }
  // log_p of the cardinality
  int size_exp() const;

  struct Reduction {
    bool member;
    std::vector<std::uint64_t> residual;
    std::vector<std::uint64_t> coords;  // one per basis row, valid when member
  };
  Reduction reduce(const std::vector<std::uint64_t>& v) const;
  bool contains(const std::vector<std::uint64_t>& v) const;
  bool contains(const Submodule& other) const;
  bool operator==(const Submodule& o) const;

  friend Submodule join(const Submodule& a, const Submodule& b);
  friend Submodule intersect(const Submodule& a, const Submodule& b);

 private:
  PrecisionCtx ctx_;
  int ambient_ = 0;
  ZMatrix basis_;
  std::vector<int> pivot_col_, pivot_exp_;
};

// {x : A*x = 0} as a submodule of (Z/p^N)^cols (solutions stored as rows).
Submodule kernel_of(const ZMatrix& A);
Submodule row_span(const ZMatrix& A);
Submodule col_span(const ZMatrix& A);

// Elementary-divisor profile of a finite module: torsion exponents e in (0, N)
// ascending, free_rank counting full-precision (e = N) summands.
struct DivisorProfile {
  std::vector<int> torsion;
  int free_rank = 0;

  bool operator==(const DivisorProfile& o) const {
    return torsion == o.torsion && free_rank == o.free_rank;
  }
  bool has_torsion() const { return !torsion.empty(); }
};

// big/small with a working basis: free and torsion generators plus class coordinates.
class QuotientPresentation {
 public:
  QuotientPresentation() = default;
  // throws containment unless small is inside big
  QuotientPresentation(const Submodule& big, const Submodule& small);

  const DivisorProfile& profile() const { return profile_; }
  int free_rank() const { return profile_.free_rank; }
  const std::vector<int>& torsion_exps() const { return profile_.torsion; }
  // generator representatives in the ambient module, free first then torsion
  const ZMatrix& free_reps() const { return free_reps_; }
  const ZMatrix& torsion_reps() const { return torsion_reps_; }

  struct ClassCoords {
    bool in_big = false;
    std::vector<std::uint64_t> free_part;     // mod p^N
    std::vector<std::uint64_t> torsion_part;  // entry t lives mod p^{torsion_exps[t]}
    bool is_zero() const;
  };
  ClassCoords coords(const std::vector<std::uint64_t>& ambient_row) const;

 private:
  PrecisionCtx ctx_;
  Submodule big_;
  ZMatrix V_;  // SNF transform of the relation matrix, k x k
  std::vector<int> coord_exp_;       // quotient divisor exponent per V-coordinate
  std::vector<int> free_idx_, tor_idx_;
  ZMatrix free_reps_, torsion_reps_;
  DivisorProfile profile_;
};

DivisorProfile quotient_divisors(const Submodule& big, const Submodule& small);

// Particular solution of A*x = b over Z/p^N; nullopt when unsolvable.
std::optional<std::vector<std::uint64_t>> linear_solve(const ZMatrix& A,
                                                       const std::vector<std::uint64_t>& b);

// Solve A*(x / p^den) = b allowing p-power denominators in the solution.
// residual_val: min valuation of the unresolvable part (N when solvable exactly);
// callers working below full precision may accept residual_val >= their certified level.
struct DenomSolution {
  bool ok = false;
  int den = 0;
  std::vector<std::uint64_t> x;
  int residual_val = 0;
};
DenomSolution solve_denominated(const ZMatrix& A, const std::vector<std::uint64_t>& b, int max_den);

}  // namespace nkit
