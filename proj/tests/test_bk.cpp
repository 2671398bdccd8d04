#include <functional>
#include <random>

#include "doctest.h"
#include "nkit/bk.hpp"
#include "nkit/corpus.hpp"

using namespace nkit;

namespace {
BKSpec make_spec(std::uint64_t p, int N, int M, int rank, int height,
                 std::vector<std::vector<std::vector<std::int64_t>>> frob,
                 bool crystalline = true) {
  BKSpec s;
  s.p = p;
  s.N = N;
  s.M = M;
  s.rank = rank;
  s.height = height;
  s.assume_crystalline = crystalline;
  s.frob = std::move(frob);
  return s;
}

void for_each_vector(const PrecisionCtx& ctx, int n,
                     const std::function<void(const std::vector<std::uint64_t>&)>& fn) {
  std::vector<std::uint64_t> v(n, 0);
  for (;;) {
    fn(v);
    int k = 0;
    while (k < n) {
      if (++v[k] < ctx.pN) break;
      v[k] = 0;
      ++k;
    }
    if (k == n) return;
  }
}
}  // namespace

TEST_CASE("height certificate fixed values") {
  SUBCASE("tate") {
    auto bk = instantiate(make_spec(3, 4, 8, 1, 1, {{{-3, 1}}}));
    auto B = validate_bk(bk);
    CHECK(B.at(0, 0) == TruncSeries::constant(bk.ctx, 1));
  }
  SUBCASE("unit module") {
    auto bk = instantiate(make_spec(3, 4, 8, 1, 0, {{{1}}}));
    auto B = validate_bk(bk);
    CHECK(B.at(0, 0) == TruncSeries::constant(bk.ctx, 1));
  }
  SUBCASE("triangular adjugate") {
    auto E2 = ipoly_eis_pow(3, 2);
    auto bk = instantiate(make_spec(3, 4, 8, 2, 2, {{{1}, {0, 1}}, {{0}, E2}}));
    auto B = validate_bk(bk);
    CHECK(B.at(0, 0) == TruncSeries::from_ints(bk.ctx, E2));
    CHECK(B.at(0, 1) == TruncSeries::from_ints(bk.ctx, {0, -1}));
    CHECK(B.at(1, 0).is_zero());
    CHECK(B.at(1, 1) == TruncSeries::constant(bk.ctx, 1));
  }
  SUBCASE("diagonal with height below determinant valuation") {
    auto bk = instantiate(diagonal_spec(3, {0, 1, 3}, 6, 16));
    auto B = validate_bk(bk);
    CHECK(B.at(0, 0) == TruncSeries::from_ints(bk.ctx, ipoly_eis_pow(3, 3)));
    CHECK(B.at(1, 1) == TruncSeries::from_ints(bk.ctx, ipoly_eis_pow(3, 2)));
    CHECK(B.at(2, 2) == TruncSeries::constant(bk.ctx, 1));
  }
  SUBCASE("rejects vanishing determinant") {
    auto bk = instantiate(make_spec(3, 4, 8, 1, 1, {{{0}}}));
    CHECK_THROWS_AS(validate_bk(bk), Error);
  }
  SUBCASE("rejects non Eisenstein determinant") {
    auto bk = instantiate(make_spec(3, 4, 8, 1, 1, {{{0, 1}}}));  // det = u
    try {
      validate_bk(bk);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::not_finite_height);
    }
  }
  SUBCASE("certificate verifies on the corpus") {
    for (const auto& spec : crystalline_corpus()) {
      auto bk = instantiate(spec);
      auto B = validate_bk(bk);
      auto prod = bk.frobenius * B;
      auto eh = SeriesMatrix::eis_identity(bk.ctx, bk.rank, bk.height);
      for (int i = 0; i < bk.rank; ++i)
        for (int j = 0; j < bk.rank; ++j)
          for (int k = 0; k < prod.at(i, j).uprec(); ++k)
            CHECK(prod.at(i, j).coeff(k) == eh.at(i, j).coeff(k));
    }
  }
}

TEST_CASE("nygaard kernels fixed values") {
  SUBCASE("identity frobenius has zero kernels") {
    auto bk = instantiate(make_spec(3, 3, 8, 2, 0, {{{1}, {0}}, {{0}, {1}}}));
    auto nyg = nygaard(bk, 4);
    for (int i = 1; i <= 4; ++i) CHECK(nyg.level[i].num_gens() == 0);
  }
  SUBCASE("tate kernels are Eisenstein powers") {
    auto bk = instantiate(make_spec(3, 3, 8, 1, 1, {{{-3, 1}}}));
    auto nyg = nygaard(bk, 5);
    for (int i = 1; i <= 5; ++i) {
      ZMatrix g(bk.ctx, 1, i);
      auto e = ipoly_eis_pow(3, i - 1);
      for (int a = 0; a < i; ++a)
        g.at(0, a) = bk.ctx.reduce_i64(a < static_cast<int>(e.size()) ? e[a] : 0);
      CHECK(nyg.level[i] == Submodule::from_rows(g));
      auto prof = quotient_divisors(nyg.level[i], Submodule::zero(bk.ctx, i));
      CHECK(prof.free_rank == 1);
      CHECK(prof.torsion.empty());
    }
  }
  SUBCASE("overshooting height gives the full module") {
    auto bk = instantiate(make_spec(3, 3, 8, 1, 2, {{ipoly_eis_pow(3, 2)}}));
    auto nyg = nygaard(bk, 1);
    CHECK(nyg.level[1] == Submodule::full(bk.ctx, 1));
  }
  SUBCASE("window beyond truncation is rejected") {
    auto bk = instantiate(make_spec(3, 3, 8, 1, 1, {{{-3, 1}}}));
    try {
      nygaard(bk, 9);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::precision);
    }
  }
}

TEST_CASE("nygaard kernel against exhaustive oracle") {
  // tiny parameters so the ambient module can be enumerated
  for (auto frob : {std::vector<std::vector<std::vector<std::int64_t>>>{{{-3, 1}}},
                    std::vector<std::vector<std::vector<std::int64_t>>>{{{9, -6, 1}}},
                    std::vector<std::vector<std::vector<std::int64_t>>>{{{0, 1, 1}}}}) {
    auto bk = instantiate(make_spec(3, 2, 8, 1, 2, frob));
    for (int i = 1; i <= 2; ++i) {
      auto act = nygaard_action_matrix(bk, i);
      auto K = kernel_of(act);
      for_each_vector(bk.ctx, i, [&](const std::vector<std::uint64_t>& v) {
        bool zero = true;
        for (auto y : act.apply(v))
          if (y != 0) zero = false;
        CHECK(K.contains(v) == zero);
      });
    }
  }
}

TEST_CASE("hodge filtration fixed values") {
  SUBCASE("identity") {
    auto bk = instantiate(make_spec(3, 3, 8, 1, 0, {{{1}}}));
    auto h = hodge_fil(bk, nygaard(bk, 3));
    CHECK(h.fil[0] == Submodule::full(bk.ctx, 1));
    CHECK(h.fil[1] == Submodule::zero(bk.ctx, 1));
  }
  SUBCASE("tate") {
    auto bk = instantiate(make_spec(3, 3, 8, 1, 1, {{{-3, 1}}}));
    auto h = hodge_fil(bk, nygaard(bk, 3));
    CHECK(h.fil[1] == Submodule::full(bk.ctx, 1));
    CHECK(h.fil[2] == Submodule::zero(bk.ctx, 1));
  }
  SUBCASE("rank two split") {
    auto bk = instantiate(diagonal_spec(3, {0, 1}, 3, 8));
    auto h = hodge_fil(bk, nygaard(bk, 3));
    CHECK(h.fil[1] == Submodule::from_rows(ZMatrix::from_rows(bk.ctx, {{0, 1}})));
    CHECK(h.fil[2] == Submodule::zero(bk.ctx, 2));
  }
  SUBCASE("filtration is decreasing on the corpus sample") {
    for (std::size_t idx : {0u, 3u, 8u, 12u}) {
      auto spec = crystalline_corpus()[idx];
      spec.N = 6;
      spec.M = 24;
      auto bk = instantiate(spec);
      auto h = hodge_fil(bk, nygaard(bk, std::min(24, default_i_max(bk))));
      for (int i = 0; i + 1 <= h.i_max; ++i) CHECK(h.fil[i].contains(h.fil[i + 1]));
    }
  }
}

TEST_CASE("graded report and weights") {
  SUBCASE("rank two identity") {
    auto bk = instantiate(make_spec(3, 3, 8, 2, 0, {{{1}, {0}}, {{0}, {1}}}));
    auto rep = graded(hodge_fil(bk, nygaard(bk, 4)));
    CHECK(rep.gr[0].free_rank == 2);
    CHECK(!rep.gr[0].has_torsion());
    for (int i = 1; i < rep.i_max; ++i) {
      CHECK(rep.gr[i].free_rank == 0);
      CHECK(!rep.gr[i].has_torsion());
    }
    auto ht = ht_weights(rep);
    CHECK(ht.weights == std::vector<std::pair<int, int>>{{0, 2}});
    CHECK(ht.total() == 2);
  }
  SUBCASE("split hodge tate weights") {
    auto bk = instantiate(diagonal_spec(3, {0, 1}, 3, 8));
    auto rep = graded(hodge_fil(bk, nygaard(bk, 4)));
    CHECK(rep.gr[0].free_rank == 1);
    CHECK(rep.gr[1].free_rank == 1);
    CHECK(rep.torsion_indices().empty());
  }
  SUBCASE("three weights") {
    auto bk = instantiate(diagonal_spec(3, {0, 1, 3}, 4, 16));
    auto rep = graded(hodge_fil(bk, nygaard(bk, 6)));
    auto ht = ht_weights(rep);
    CHECK(ht.weights == std::vector<std::pair<int, int>>{{0, 1}, {1, 1}, {3, 1}});
    CHECK(ht.total() == 3);
    CHECK(rep.torsion_indices().empty());
  }
  SUBCASE("triangular control profile") {
    auto spec = control_corpus()[0];  // [[1, u], [0, E^4]]
    spec.N = 8;
    spec.M = 32;
    auto bk = instantiate(spec);
    auto rep = graded(hodge_fil(bk, nygaard(bk, 8)));
    CHECK(rep.gr[0].free_rank == 1);
    CHECK(rep.gr[4].free_rank == 1);
    CHECK(rep.torsion_indices().empty());
    for (int i : {1, 2, 3, 5, 6, 7}) {
      CHECK(rep.gr[i].free_rank == 0);
      CHECK(!rep.gr[i].has_torsion());
    }
    auto ht = ht_weights(rep);
    CHECK(ht.weights == std::vector<std::pair<int, int>>{{0, 1}, {4, 1}});
  }
}

TEST_CASE("theorem and corollary verdicts") {
  auto ctx = PrecisionCtx::make(3, 4, 8);
  auto mk_report = [&](std::vector<int> torsion_at, int window) {
    GradedReport rep;
    rep.i_max = window;
    rep.gr.assign(window, DivisorProfile{});
    for (int i : torsion_at) rep.gr[i].torsion = {1};
    return rep;
  };
  HTWeights ht01;
  ht01.weights = {{0, 1}, {1, 1}};
  HTWeights ht0;
  ht0.weights = {{0, 1}};

  SUBCASE("no torsion passes vacuously") {
    auto v = check_theorem(mk_report({}, 6), ht01, ctx, true);
    CHECK(v.pass);
    CHECK(v.offending.empty());
  }
  SUBCASE("admissible torsion at weight plus p") {
    auto v = check_theorem(mk_report({4}, 6), ht01, ctx, true);
    CHECK(v.pass);
  }
  SUBCASE("inadmissible torsion") {
    auto v = check_theorem(mk_report({2}, 6), ht0, ctx, true);
    CHECK(!v.pass);
    CHECK(v.offending == std::vector<int>{2});
  }
  SUBCASE("torsion at a weight itself is not admissible") {
    // i = w requires m > 0, and i = 0 + 0*p is excluded
    auto v = check_theorem(mk_report({0}, 6), ht0, ctx, true);
    CHECK(!v.pass);
  }
  SUBCASE("effective corollary") {
    CHECK(check_effective_di(mk_report({}, 6), ctx, true).pass);
    CHECK(!check_effective_di(mk_report({2}, 6), ctx, true).pass);
    CHECK(check_effective_di(mk_report({5}, 6), ctx, true).pass);
  }
}

TEST_CASE("conjugate filtration fixed values") {
  SUBCASE("tate layers") {
    auto bk = instantiate(make_spec(3, 4, 12, 1, 1, {{{-3, 1}}}));
    auto cf = conj_fil(bk, nygaard(bk, 6));
    CHECK(cf.layers[0].rank == 0);
    for (int i = 1; i < 6; ++i) CHECK(cf.layers[i].rank == 1);
    CHECK(cf.stabilization == 1);
  }
  SUBCASE("identity layers") {
    auto bk = instantiate(make_spec(3, 4, 12, 2, 0, {{{1}, {0}}, {{0}, {1}}}));
    auto cf = conj_fil(bk, nygaard(bk, 5));
    for (auto& layer : cf.layers) CHECK(layer.rank == 2);
    CHECK(cf.stabilization == 0);
  }
  SUBCASE("rank zero module") {
    BKSpec s = make_spec(3, 4, 12, 0, 0, {});
    auto bk = instantiate(s);
    auto cf = conj_fil(bk, nygaard(bk, 3));
    for (auto& layer : cf.layers) CHECK(layer.rank == 0);
  }
}

TEST_CASE("filtration invariants on corpus sample") {
  auto corpus = crystalline_corpus();
  std::vector<std::size_t> picks = {0, 1, 4, 5, 6, 9, 12, 13, 16, 19};
  for (auto idx : picks) {
    REQUIRE(idx < corpus.size());
    auto spec = corpus[idx];
    spec.N = 6;
    spec.M = 24;
    auto bk = instantiate(spec);
    int imax = std::min(bk.height + static_cast<int>(bk.ctx.p) + 2, 12);
    auto nyg = nygaard(bk, imax);
    auto& ctx = bk.ctx;
    int r = bk.rank;

    // E * K_{i-1} sits inside K_i; truncation of K_{i+1} sits inside K_i
    for (int i = 2; i <= imax; ++i) {
      auto step = eis_step_matrix(ctx, r, i - 1);
      for (int g = 0; g < nyg.level[i - 1].num_gens(); ++g)
        CHECK(nyg.level[i].contains(step.apply(nyg.level[i - 1].basis().row(g))));
    }
    for (int i = 1; i < imax; ++i) {
      auto drop = eis_drop_matrix(ctx, r, i);
      for (int g = 0; g < nyg.level[i + 1].num_gens(); ++g)
        CHECK(nyg.level[i].contains(drop.apply(nyg.level[i + 1].basis().row(g))));
    }

    // Fil^i meet E*ambient equals E * Fil^{i-1}, computed inside S/E^i
    for (int i = 2; i <= imax; ++i) {
      auto step = eis_step_matrix(ctx, r, i - 1);
      Submodule e_ambient = col_span(step);
      Submodule lhs = intersect(nyg.level[i], e_ambient);
      ZMatrix gens2(ctx, nyg.level[i - 1].num_gens(), r * i);
      for (int g = 0; g < nyg.level[i - 1].num_gens(); ++g)
        gens2.set_row(g, step.apply(nyg.level[i - 1].basis().row(g)));
      Submodule rhs = Submodule::from_rows(gens2);
      CHECK(lhs == rhs);
    }

    auto hodge = hodge_fil(bk, nyg);
    auto rep = graded(hodge);
    auto ht = ht_weights(rep);
    int free_total = 0;
    for (int i = 0; i < rep.i_max; ++i) free_total += rep.gr[i].free_rank;
    CHECK(free_total == r);
    CHECK(ht.total() == r);

    auto cf = conj_fil(bk, nyg);
    // transitions injective; layer quotients match the graded report
    for (std::size_t t = 0; t < cf.transitions.size(); ++t) {
      CHECK(kernel_of(cf.transitions[t]).num_gens() == 0);
      auto img = row_span(cf.transitions[t].transpose());
      auto prof = quotient_divisors(Submodule::full(ctx, cf.layers[t + 1].rank), img);
      CHECK(prof == rep.gr[static_cast<int>(t) + 1]);
    }
    if (!cf.layers.empty()) {
      auto prof0 = quotient_divisors(Submodule::full(ctx, cf.layers[0].rank),
                                     Submodule::zero(ctx, cf.layers[0].rank));
      CHECK(prof0 == rep.gr[0]);
    }
    // past stabilization the graded pieces vanish
    for (int i = cf.stabilization + 1; i < rep.i_max; ++i) {
      CHECK(rep.gr[i].free_rank == 0);
      CHECK(!rep.gr[i].has_torsion());
    }
  }
}

TEST_CASE("base change invariance") {
  for (auto& base : {diagonal_spec(3, {0, 1}, 6, 24), diagonal_spec(3, {1, 2}, 6, 24),
                     diagonal_spec(5, {0, 1, 3}, 6, 24)}) {
    auto bk0 = instantiate(base);
    int imax = std::min(bk0.height + static_cast<int>(bk0.ctx.p) + 2, 12);
    auto rep0 = graded(hodge_fil(bk0, nygaard(bk0, imax)));
    for (std::uint64_t seed : {11u, 29u}) {
      auto spec = conjugate_spec(base, seed);
      auto bk = instantiate(spec);
      validate_bk(bk);
      auto rep = graded(hodge_fil(bk, nygaard(bk, imax)));
      CHECK(rep == rep0);
    }
  }
}

TEST_CASE("precision escalation") {
  SUBCASE("stable instances") {
    auto r1 = precision_escalate(diagonal_spec(3, {0, 1}), 8, 12, 8);
    CHECK(r1.stable);
    auto r2 = precision_escalate(tate_spec(3), 8, 12, 8);
    CHECK(r2.stable);
  }
  SUBCASE("adversarial truncation") {
    auto spec = diagonal_spec(3, {3});
    spec.M = 2;  // E^3 does not fit
    try {
      precision_escalate(spec, 8, 12, 2);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::uncertified_precision);
    }
  }
  SUBCASE("kernel pollution is flagged") {
    auto spec = control_corpus()[1];
    try {
      precision_escalate(spec, 8, 12, 6);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind == ErrorKind::uncertified_precision);
    }
  }
  SUBCASE("triangular control is stable") {
    auto r = precision_escalate(control_corpus()[0], 8, 12, 8);
    CHECK(r.stable);
  }
}
