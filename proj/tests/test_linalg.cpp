#include <cstdint>
#include <random>

#include "doctest.h"
#include "nkit/linalg.hpp"

using namespace nkit;

namespace {
ZMatrix random_matrix(const PrecisionCtx& ctx, int r, int c, std::mt19937_64& rng) {
  ZMatrix m(ctx, r, c);
  std::uniform_int_distribution<std::uint64_t> d(0, ctx.pN - 1);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m.at(i, j) = d(rng);
  return m;
}
}  // namespace

TEST_CASE("smith form fixed values") {
  auto ctx = PrecisionCtx::make(3, 2, 1);
  SUBCASE("diagonal reorder") {
    auto A = ZMatrix::from_rows(ctx, {{3, 0}, {0, 1}});
    auto s = snf(A);
    CHECK(s.exps == std::vector<int>{0, 1});  // diag(1, 3)
  }
  SUBCASE("rank drop") {
    auto A = ZMatrix::from_rows(ctx, {{3, 3}, {3, 3}});
    auto s = snf(A);
    CHECK(s.exps == std::vector<int>{1, 2});  // diag(3, 0) over Z/9
  }
  SUBCASE("zero") {
    auto A = ZMatrix::from_rows(ctx, {{0}});
    auto s = snf(A);
    CHECK(s.exps == std::vector<int>{2});
  }
}

TEST_CASE("smith form transform identities") {
  auto ctx = PrecisionCtx::make(3, 5, 1);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    int r = 1 + static_cast<int>(rng() % 5);
    int c = 1 + static_cast<int>(rng() % 5);
    auto A = random_matrix(ctx, r, c, rng);
    auto s = snf(A);
    auto D = s.diagonal(ctx, r, c);
    CHECK(s.U * A * s.V == D);
    CHECK(s.U * s.Uinv == ZMatrix::identity(ctx, r));
    CHECK(s.Uinv * s.U == ZMatrix::identity(ctx, r));
    CHECK(s.V * s.Vinv == ZMatrix::identity(ctx, c));
    CHECK(s.Vinv * s.V == ZMatrix::identity(ctx, c));
    for (std::size_t t = 1; t < s.exps.size(); ++t) CHECK(s.exps[t - 1] <= s.exps[t]);
  }
}

TEST_CASE("kernel fixed values") {
  auto ctx = PrecisionCtx::make(3, 2, 1);
  SUBCASE("multiplication by p") {
    auto K = kernel_of(ZMatrix::from_rows(ctx, {{3}}));
    CHECK(K.num_gens() == 1);
    CHECK(K.contains({3}));
    CHECK(!K.contains({1}));
    CHECK(K.size_exp() == 1);  // |ker| = 3
  }
  SUBCASE("diag(1,3)") {
    auto K = kernel_of(ZMatrix::from_rows(ctx, {{1, 0}, {0, 3}}));
    CHECK(K == Submodule::from_rows(ZMatrix::from_rows(ctx, {{0, 3}})));
  }
  SUBCASE("identity") {
    auto K = kernel_of(ZMatrix::identity(ctx, 3));
    CHECK(K.num_gens() == 0);
    CHECK(K == Submodule::zero(ctx, 3));
  }
}

TEST_CASE("kernel image counting") {
  auto ctx = PrecisionCtx::make(3, 3, 1);
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 4);
    auto A = random_matrix(ctx, n, n, rng);
    auto ker = kernel_of(A);
    auto im = col_span(A);
    CHECK(ker.size_exp() + im.size_exp() == ctx.N * n);
    // kernel generators actually vanish
    for (int i = 0; i < ker.num_gens(); ++i) {
      auto y = A.apply(ker.basis().row(i));
      for (auto v : y) CHECK(v == 0);
    }
  }
}

TEST_CASE("howell canonical form") {
  auto ctx = PrecisionCtx::make(3, 2, 1);
  SUBCASE("full module") {
    auto S = Submodule::from_rows(ZMatrix::from_rows(ctx, {{1, 0}, {0, 1}}));
    CHECK(S == Submodule::full(ctx, 2));
  }
  SUBCASE("redundant generator dropped") {
    auto S = Submodule::from_rows(ZMatrix::from_rows(ctx, {{3, 0}, {6, 0}}));
    CHECK(S.num_gens() == 1);
    CHECK(S.basis().row(0) == std::vector<std::uint64_t>{3, 0});
  }
  SUBCASE("empty") {
    auto S = Submodule::from_rows(ZMatrix(ctx, 0, 2));
    CHECK(S == Submodule::zero(ctx, 2));
  }
  SUBCASE("completion catches hidden elements") {
    // over Z/9 the span of (3,1) contains 3*(3,1) = (0,3), which starts later
    auto S = Submodule::from_rows(ZMatrix::from_rows(ctx, {{3, 1}}));
    CHECK(S.contains({0, 3}));
    CHECK(S.num_gens() == 2);
  }
}

TEST_CASE("howell form decides equality and containment") {
  auto ctx = PrecisionCtx::make(3, 3, 1);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 4);
    int k = 1 + static_cast<int>(rng() % 4);
    auto G = random_matrix(ctx, k, n, rng);
    auto S = Submodule::from_rows(G);
    // canonical form is idempotent
    CHECK(Submodule::from_rows(S.basis()) == S);
    // generator shuffles and unimodular recombinations give the same module
    auto U = random_matrix(ctx, k, k, rng);
    if (!is_unimodular(U)) continue;
    auto S2 = Submodule::from_rows(U * G);
    CHECK(S2 == S);
    CHECK(S.contains(S2));
    // every original row reduces to a member
    for (int i = 0; i < k; ++i) CHECK(S.contains(G.row(i)));
  }
}

TEST_CASE("join and intersect") {
  auto ctx = PrecisionCtx::make(3, 3, 1);
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 120; ++trial) {
    int n = 2 + static_cast<int>(rng() % 3);
    auto Sa = Submodule::from_rows(random_matrix(ctx, 1 + rng() % 3, n, rng));
    auto Sb = Submodule::from_rows(random_matrix(ctx, 1 + rng() % 3, n, rng));
    auto J = join(Sa, Sb);
    auto I = intersect(Sa, Sb);
    CHECK(J.contains(Sa));
    CHECK(J.contains(Sb));
    CHECK(Sa.contains(I));
    CHECK(Sb.contains(I));
    // |A| * |B| = |A+B| * |A cap B|
    CHECK(Sa.size_exp() + Sb.size_exp() == J.size_exp() + I.size_exp());
  }
}

TEST_CASE("quotient divisor fixed values") {
  auto ctx = PrecisionCtx::make(3, 2, 1);
  auto big = Submodule::full(ctx, 2);
  SUBCASE("one torsion one free") {
    auto small = Submodule::from_rows(ZMatrix::from_rows(ctx, {{3, 0}}));
    auto prof = quotient_divisors(big, small);
    CHECK(prof.torsion == std::vector<int>{1});
    CHECK(prof.free_rank == 1);
    CHECK(prof.has_torsion());
  }
  SUBCASE("equal modules") {
    auto prof = quotient_divisors(big, big);
    CHECK(prof.torsion.empty());
    CHECK(prof.free_rank == 0);
  }
  SUBCASE("zero submodule") {
    auto prof = quotient_divisors(big, Submodule::zero(ctx, 2));
    CHECK(prof.torsion.empty());
    CHECK(prof.free_rank == 2);
  }
  SUBCASE("non containment rejected") {
    auto off = Submodule::from_rows(ZMatrix::from_rows(ctx, {{1, 0}}));
    auto small = Submodule::from_rows(ZMatrix::from_rows(ctx, {{3, 0}}));
    CHECK_THROWS_AS(quotient_divisors(small, off), Error);
  }
}

TEST_CASE("quotient divisors are generator independent") {
  auto ctx = PrecisionCtx::make(3, 3, 1);
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 150; ++trial) {
    int n = 2 + static_cast<int>(rng() % 3);
    auto G = random_matrix(ctx, 1 + rng() % 3, n, rng);
    auto Sb = Submodule::from_rows(G);
    auto H = random_matrix(ctx, 1 + rng() % 3, n, rng);
    // force containment: intersect with Sb
    auto Ss = intersect(Sb, Submodule::from_rows(H));
    auto prof = quotient_divisors(Sb, Ss);
    // size check: |big| = |small| * prod p^{e}
    int q = 0;
    for (int e : prof.torsion) q += e;
    q += prof.free_rank * ctx.N;
    CHECK(Sb.size_exp() == Ss.size_exp() + q);
    // doubled generating sets change nothing
    ZMatrix G2(ctx, 2 * G.rows(), n);
    for (int i = 0; i < G.rows(); ++i) {
      G2.set_row(i, G.row(i));
      G2.set_row(G.rows() + i, G.row(i));
    }
    CHECK(quotient_divisors(Submodule::from_rows(G2), Ss) == prof);
  }
}

TEST_CASE("quotient presentation coordinates") {
  auto ctx = PrecisionCtx::make(3, 2, 1);
  auto big = Submodule::full(ctx, 2);
  auto small = Submodule::from_rows(ZMatrix::from_rows(ctx, {{3, 0}}));
  QuotientPresentation q(big, small);
  CHECK(q.profile().torsion == std::vector<int>{1});
  CHECK(q.profile().free_rank == 1);
  // the class map kills exactly small
  CHECK(q.coords({3, 0}).is_zero());
  CHECK(q.coords({6, 0}).is_zero());
  CHECK(!q.coords({1, 0}).is_zero());
  CHECK(!q.coords({0, 3}).is_zero());
  // representatives map back to their own coordinates
  auto t0 = q.torsion_reps().row(0);
  auto ct = q.coords(t0);
  CHECK(ct.torsion_part == std::vector<std::uint64_t>{1});
  for (auto v : ct.free_part) CHECK(v == 0);
  auto f0 = q.free_reps().row(0);
  auto cf = q.coords(f0);
  CHECK(cf.free_part == std::vector<std::uint64_t>{1});
  for (auto v : cf.torsion_part) CHECK(v == 0);
  // coordinates are additive
  std::vector<std::uint64_t> sum = {ctx.add(t0[0], f0[0]), ctx.add(t0[1], f0[1])};
  auto cs = q.coords(sum);
  CHECK(cs.torsion_part == std::vector<std::uint64_t>{1});
  CHECK(cs.free_part == std::vector<std::uint64_t>{1});
}

TEST_CASE("unimodular inverse") {
  auto ctx = PrecisionCtx::make(3, 4, 1);
  std::mt19937_64 rng(26);
  int found = 0;
  for (int trial = 0; trial < 400 && found < 60; ++trial) {
    int n = 1 + static_cast<int>(rng() % 4);
    auto U = random_matrix(ctx, n, n, rng);
    if (!is_unimodular(U)) continue;
    ++found;
    CHECK(U * inverse_unimodular(U) == ZMatrix::identity(ctx, n));
    CHECK(inverse_unimodular(U) * U == ZMatrix::identity(ctx, n));
  }
  CHECK(found >= 40);
  CHECK_THROWS_AS(inverse_unimodular(ZMatrix::from_rows(ctx, {{3}})), Error);
}

TEST_CASE("linear solve") {
  auto ctx = PrecisionCtx::make(3, 3, 1);
  SUBCASE("solvable") {
    auto A = ZMatrix::from_rows(ctx, {{1, 2}, {0, 3}});
    auto x = linear_solve(A, {5, 3});
    REQUIRE(x.has_value());
    auto y = A.apply(*x);
    CHECK(y == std::vector<std::uint64_t>{5, 3});
  }
  SUBCASE("unsolvable needs denominator") {
    auto A = ZMatrix::from_rows(ctx, {{3}});
    CHECK(!linear_solve(A, {1}).has_value());
    auto s = solve_denominated(A, {1}, 2);
    CHECK(s.ok);
    CHECK(s.den == 1);  // x = 1/3 times unit
    // check 3 * x = p^den * b
    auto y = A.apply(s.x);
    CHECK(y[0] == ctx.mul(ctx.ppow(s.den), 1));
  }
  SUBCASE("denominator cap respected") {
    auto A = ZMatrix::from_rows(ctx, {{9}});
    auto s = solve_denominated(A, {1}, 1);
    CHECK(!s.ok);
    CHECK(s.den == 2);
  }
  SUBCASE("inconsistent reports residual valuation") {
    auto A = ZMatrix::from_rows(ctx, {{1, 0}, {2, 0}});
    auto s = solve_denominated(A, {0, 3}, 3);
    CHECK(s.residual_val < ctx.N);
  }
  SUBCASE("random consistency") {
    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 200; ++trial) {
      int n = 1 + static_cast<int>(rng() % 4);
      auto A = random_matrix(ctx, n, n, rng);
      std::vector<std::uint64_t> x0(n);
      for (auto& v : x0) v = rng() % ctx.pN;
      auto b = A.apply(x0);
      auto x = linear_solve(A, b);
      REQUIRE(x.has_value());
      CHECK(A.apply(*x) == b);
    }
  }
}
