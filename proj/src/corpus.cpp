#include "nkit/corpus.hpp"

#include <random>

namespace nkit {

IntPoly ipoly_add(const IntPoly& a, const IntPoly& b) {
  IntPoly r(std::max(a.size(), b.size()), 0);
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (k < a.size()) r[k] += a[k];
    if (k < b.size()) r[k] += b[k];
  }
  return r;
}

IntPoly ipoly_mul(const IntPoly& a, const IntPoly& b) {
  if (a.empty() || b.empty()) return {};
  IntPoly r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

IntPoly ipoly_scale(const IntPoly& a, std::int64_t c) {
  IntPoly r = a;
  for (auto& x : r) x *= c;
  return r;
}

IntPoly ipoly_frob(const IntPoly& a, std::uint64_t p) {
  if (a.empty()) return {};
  IntPoly r((a.size() - 1) * p + 1, 0);
  for (std::size_t k = 0; k < a.size(); ++k) r[k * p] = a[k];
  return r;
}

IntPoly ipoly_eis_pow(std::uint64_t p, int k) {
  IntPoly r = {1};
  IntPoly e = {-static_cast<std::int64_t>(p), 1};
  for (int t = 0; t < k; ++t) r = ipoly_mul(r, e);
  return r;
}

IntMat imat_identity(int n) {
  IntMat m(n, std::vector<IntPoly>(n));
  for (int i = 0; i < n; ++i) m[i][i] = {1};
  return m;
}

IntMat imat_mul(const IntMat& a, const IntMat& b) {
  int n = static_cast<int>(a.size());
  int kdim = static_cast<int>(b.size());
  int mdim = kdim == 0 ? 0 : static_cast<int>(b[0].size());
  IntMat r(n, std::vector<IntPoly>(mdim));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < mdim; ++j)
      for (int k = 0; k < kdim; ++k) r[i][j] = ipoly_add(r[i][j], ipoly_mul(a[i][k], b[k][j]));
  return r;
}

IntMat imat_frob(const IntMat& a, std::uint64_t p) {
  IntMat r = a;
  for (auto& row : r)
    for (auto& e : row) e = ipoly_frob(e, p);
  return r;
}

BKSpec diagonal_spec(std::uint64_t p, const std::vector<int>& weights, int N, int M) {
  BKSpec s;
  s.p = p;
  s.N = N;
  s.M = M;
  s.rank = static_cast<int>(weights.size());
  s.height = 0;
  for (int w : weights) s.height = std::max(s.height, w);
  s.assume_crystalline = true;
  s.name = "diag-p" + std::to_string(p);
  s.frob.assign(s.rank, std::vector<std::vector<std::int64_t>>(s.rank, {0}));
  for (int i = 0; i < s.rank; ++i) {
    s.frob[i][i] = ipoly_eis_pow(p, weights[i]);
    s.name += "-" + std::to_string(weights[i]);
  }
  return s;
}

BKSpec rank1_spec(std::uint64_t p, int weight, int N, int M) {
  return diagonal_spec(p, {weight}, N, M);
}

BKSpec tate_spec(std::uint64_t p, int N, int M) {
  BKSpec s = rank1_spec(p, 1, N, M);
  s.name = "tate-p" + std::to_string(p);
  return s;
}

BKSpec conjugate_spec(const BKSpec& spec, std::uint64_t seed) {
  int r = spec.rank;
  if (r <= 1) {
    BKSpec s = spec;
    s.name += "-conj" + std::to_string(seed);
    return s;
  }
  std::mt19937_64 rng(seed);
  // elementary factors I + f * e_{ij} with small integer polynomials f;
  // inverting flips the signs in reverse order
  IntMat U = imat_identity(r);
  IntMat Uinv = imat_identity(r);
  std::vector<IntPoly> pool = {{1}, {0, 1}, {1, 1}, {0, 0, 1}, {-1, 1}, {2}};
  for (int step = 0; step < 3; ++step) {
    int i = static_cast<int>(rng() % r);
    int j = static_cast<int>(rng() % r);
    if (i == j) continue;
    IntPoly f = pool[rng() % pool.size()];
    IntMat El = imat_identity(r);
    El[i][j] = f;
    IntMat Elinv = imat_identity(r);
    Elinv[i][j] = ipoly_scale(f, -1);
    U = imat_mul(U, El);
    Uinv = imat_mul(Elinv, Uinv);
  }
  IntMat A(r, std::vector<IntPoly>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) A[i][j] = spec.frob[i][j];
  IntMat Ap = imat_mul(imat_mul(Uinv, A), imat_frob(U, spec.p));
  BKSpec s = spec;
  s.name += "-conj" + std::to_string(seed);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) s.frob[i][j] = Ap[i][j].empty() ? IntPoly{0} : Ap[i][j];
  return s;
}

std::vector<BKSpec> crystalline_corpus() {
  std::vector<BKSpec> out;
  const std::vector<std::vector<int>> profiles = {{0},    {1},    {2},      {3},
                                                  {0, 1}, {1, 2}, {0, 1, 3}};
  for (std::uint64_t p : {3ull, 5ull})
    for (const auto& w : profiles) {
      BKSpec base = diagonal_spec(p, w);
      out.push_back(base);
      if (base.rank > 1) {
        out.push_back(conjugate_spec(base, 7 * p + w.size()));
        out.push_back(conjugate_spec(base, 1000 + 13 * p + w[0]));
      }
    }
  return out;
}

std::vector<BKSpec> control_corpus() {
  std::vector<BKSpec> out;
  {
    BKSpec s;
    s.p = 3;
    s.N = 12;
    s.M = 64;
    s.rank = 2;
    s.height = 4;
    s.assume_crystalline = false;
    s.name = "triangular-e4-p3";
    s.frob = {{{1}, {0, 1}}, {{0}, ipoly_eis_pow(3, 4)}};
    out.push_back(s);
  }
  {
    // kernel pollution shape: mod p^N picks up non-liftable classes, so
    // precision escalation must flag it
    BKSpec s;
    s.p = 3;
    s.N = 12;
    s.M = 64;
    s.rank = 2;
    s.height = 3;
    s.assume_crystalline = false;
    s.name = "pollution-e2u-p3";
    s.frob = {{ipoly_eis_pow(3, 2), {0, 1}}, {{0}, ipoly_eis_pow(3, 1)}};
    out.push_back(s);
  }
  return out;
}

}  // namespace nkit
