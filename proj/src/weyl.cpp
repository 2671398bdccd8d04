#include "nkit/weyl.hpp"

#include <algorithm>
#include <random>

namespace nkit {

namespace {

ZMatrix scaled_identity(const PrecisionCtx& ctx, int n, std::uint64_t c) {
  ZMatrix m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = c;
  return m;
}

ZMatrix mod_p(const ZMatrix& a) {
  ZMatrix out = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j) % a.ctx().p;
  return out;
}

// up[c + len - 1] * ... * up[c]: component c -> c + len
ZMatrix chain_up(const GradedWeylModule& w, int c, int len) {
  ZMatrix acc = ZMatrix::identity(w.ctx, w.rank[c]);
  for (int t = 0; t < len; ++t) acc = w.up[c + t] * acc;
  return acc;
}

void require_weyl(const GradedWeylModule& w) {
  std::vector<WeylViolation> bad = check_weyl(w);
  if (!bad.empty())
    throw Error(ErrorKind::schema, "graded module fails the Weyl axioms: " + bad.front().what);
}

}  // namespace

std::vector<WeylViolation> check_weyl(const GradedWeylModule& w) {
  std::vector<WeylViolation> out;
  const int K = w.window();
  if (K == 0) {
    out.push_back({0, "empty degree window"});
    return out;
  }
  if (static_cast<int>(w.down.size()) != K - 1 || static_cast<int>(w.up.size()) != K - 1) {
    out.push_back({w.d_lo, "operator lists do not match the degree window"});
    return out;
  }
  for (int k = 0; k < K; ++k)
    if (w.rank[k] < 0) out.push_back({w.d_lo + k, "negative component rank"});
  if (!out.empty()) return out;
  bool shapes_ok = true;
  for (int k = 0; k + 1 < K; ++k) {
    if (w.down[k].rows() != w.rank[k] || w.down[k].cols() != w.rank[k + 1]) {
      out.push_back({w.d_lo + k + 1, "u does not have degree -1"});
      shapes_ok = false;
    }
    if (w.up[k].rows() != w.rank[k + 1] || w.up[k].cols() != w.rank[k]) {
      out.push_back({w.d_lo + k, "D does not have degree +1"});
      shapes_ok = false;
    }
  }
  if (!shapes_ok) return out;
  // D u - u D = 1 on every component where both composites are stored. On the
  // top component u D = 0 (degrees above the window vanish); on the bottom one
  // the relation transports along the u-isomorphisms below the window, and D
  // is locally nilpotent mod p because every D-string eventually leaves the
  // window upward.
  for (int k = 1; k < K; ++k) {
    ZMatrix du = w.up[k - 1] * w.down[k - 1];
    ZMatrix lhs = (k + 1 < K) ? du - w.down[k] * w.up[k] : du;
    if (!(lhs == ZMatrix::identity(w.ctx, w.rank[k])))
      out.push_back({w.d_lo + k, "D u - u D is not the identity"});
  }
  return out;
}

ReesFiltration rees(const GradedWeylModule& w) {
  require_weyl(w);
  const int K = w.window();
  ReesFiltration f;
  f.ctx = w.ctx;
  f.i_lo = -w.d_hi();
  f.rank.resize(K);
  f.trans.resize(K);
  f.der.resize(K);
  for (int j = 0; j < K; ++j) f.rank[j] = w.rank[K - 1 - j];
  for (int j = 1; j < K; ++j) {
    f.trans[j] = w.down[K - 1 - j];
    f.der[j] = w.up[K - 1 - j];
  }
  return f;
}

GradedWeylModule unrees(const ReesFiltration& f) {
  const int K = f.layers();
  if (K == 0) throw Error(ErrorKind::schema, "empty filtration window");
  if (static_cast<int>(f.trans.size()) != K || static_cast<int>(f.der.size()) != K)
    throw Error(ErrorKind::schema, "transition lists do not match the filtration window");
  GradedWeylModule w;
  w.ctx = f.ctx;
  w.d_lo = -(f.i_lo + K - 1);
  w.rank.resize(K);
  for (int k = 0; k < K; ++k) w.rank[k] = f.rank[K - 1 - k];
  w.down.resize(K - 1);
  w.up.resize(K - 1);
  for (int j = 1; j < K; ++j) {
    const ZMatrix& t = f.trans[j];
    const ZMatrix& d = f.der[j];
    if (t.rows() != f.rank[j] || t.cols() != f.rank[j - 1] || d.rows() != f.rank[j - 1] ||
        d.cols() != f.rank[j])
      throw Error(ErrorKind::schema, "transition shape does not match the layer ranks");
    w.down[K - 1 - j] = t;
    w.up[K - 1 - j] = d;
  }
  require_weyl(w);
  return w;
}

std::vector<ZMatrix> theta_layers(const ReesFiltration& f) {
  const int K = f.layers();
  std::vector<ZMatrix> out;
  out.reserve(K);
  for (int j = 0; j < K; ++j) {
    std::uint64_t idx = f.ctx.reduce_i64(f.i_lo + j);
    ZMatrix shift = scaled_identity(f.ctx, f.rank[j], f.ctx.neg(idx));
    out.push_back(j == 0 ? shift : f.trans[j] * f.der[j] + shift);
  }
  return out;
}

FilteredThetaModule rees_to_ftm(const ReesFiltration& f) {
  FilteredThetaModule m;
  m.ctx = f.ctx;
  std::vector<ZMatrix> thetas = theta_layers(f);
  for (int j = 0; j < f.layers(); ++j) {
    FTMLayer layer;
    layer.index = f.i_lo + j;
    layer.inclusion = j == 0 ? ZMatrix(f.ctx, f.rank[0], 0) : f.trans[j];
    layer.theta = thetas[j];
    m.layers.push_back(layer);
  }
  return m;
}

SenModule sen_module(const GradedWeylModule& w) {
  ReesFiltration f = rees(w);
  const int K = f.layers();
  if (K >= 2 && !is_unimodular(f.trans[K - 1]))
    throw Error(ErrorKind::usage, "u does not stabilize within the stored window");
  std::vector<ZMatrix> thetas = theta_layers(f);
  SenModule n;
  n.ctx = w.ctx;
  n.rank = f.rank[K - 1];
  n.top_index = f.i_lo + K - 1;
  n.theta = thetas[K - 1];
  // The operator must also arise as m -> D(m) + deg(m) m from every layer,
  // pushed along u into the colimit.
  ZMatrix push = ZMatrix::identity(w.ctx, n.rank);
  for (int j = K - 1; j >= 0; --j) {
    std::uint64_t deg = w.ctx.reduce_i64(-(f.i_lo + j));
    ZMatrix expect = push.scale(deg);
    ZMatrix push_prev;
    if (j > 0) {
      push_prev = push * f.trans[j];
      expect = push_prev * f.der[j] + expect;
    }
    if (!(n.theta * push == expect))
      throw Error(ErrorKind::well_definedness, "sen operator constructions disagree");
    if (j > 0) push = push_prev;
  }
  return n;
}

Coaction coaction(const GradedWeylModule& w, int degree, const std::vector<std::uint64_t>& m,
                  int k) {
  require_weyl(w);
  const int K = w.window();
  const int c = degree - w.d_lo;
  if (c < 0 || c >= K) throw Error(ErrorKind::usage, "degree outside the stored window");
  if (static_cast<int>(m.size()) != w.rank[c])
    throw Error(ErrorKind::usage, "element size does not match its component");
  if (k < 0) throw Error(ErrorKind::usage, "negative coaction order");
  Coaction out;
  out.degree = degree;
  out.terms.push_back(m);
  std::vector<std::uint64_t> cur = m;
  for (int j = 1; j <= k; ++j) {
    if (c + j < K)
      cur = w.up[c + j - 1].apply(cur);
    else
      cur.clear();
    out.terms.push_back(cur);
  }
  // D^i u - u D^i = i D^{i-1} wherever all three composites are stored
  for (int i = 1; i <= k; ++i) {
    for (int c0 = 1; c0 + i < K; ++c0) {
      ZMatrix after_u = chain_up(w, c0 - 1, i) * w.down[c0 - 1];
      ZMatrix before_u = w.down[c0 + i - 1] * chain_up(w, c0, i);
      ZMatrix want = chain_up(w, c0, i - 1).scale(w.ctx.reduce_i64(i));
      if (!(after_u - before_u == want))
        throw Error(ErrorKind::internal, "derivation power identity fails");
    }
  }
  return out;
}

bool nilpotence_check(const ZMatrix& theta) {
  const PrecisionCtx& ctx = theta.ctx();
  if (theta.rows() != theta.cols()) throw Error(ErrorKind::usage, "sen operator must be square");
  const int n = theta.rows();
  if (n == 0) return true;
  ZMatrix power = theta;
  for (std::uint64_t t = 1; t < ctx.p; ++t) power = power * theta;
  // the module is free, so M/pM and the p-torsion kernel carry the same matrix
  ZMatrix a = mod_p(power - theta);
  ZMatrix acc = a;
  for (int step = 1; step < n; ++step) acc = mod_p(acc * a);
  return acc.is_zero();
}

GradedWeylModule weyl_module(std::uint64_t p, int N, const std::vector<int>& weights,
                             const std::vector<std::vector<std::int64_t>>& coupling, int depth) {
  if (depth < 0) throw Error(ErrorKind::usage, "negative window depth");
  PrecisionCtx ctx = PrecisionCtx::make(p, N, 4);
  const int G = static_cast<int>(weights.size());
  if (!coupling.empty()) {
    if (static_cast<int>(coupling.size()) != G)
      throw Error(ErrorKind::usage, "coupling rows must match the generators");
    for (int j = 0; j < G; ++j) {
      if (static_cast<int>(coupling[j].size()) != G)
        throw Error(ErrorKind::usage, "coupling rows must match the generators");
      for (int l = 0; l < G; ++l)
        if (coupling[j][l] != 0 && weights[l] > weights[j] - 1)
          throw Error(ErrorKind::usage, "coupling must strictly lower the weight");
    }
  }
  int min_w = 0, max_w = 0;
  if (G > 0) {
    min_w = *std::min_element(weights.begin(), weights.end());
    max_w = *std::max_element(weights.begin(), weights.end());
  }
  GradedWeylModule w;
  w.ctx = ctx;
  w.d_lo = -max_w - depth;
  const int K = -min_w - w.d_lo + 1;
  for (int j = 0; j < G; ++j) w.gen_degrees.push_back(-weights[j]);
  // generator j contributes u^{-n - w_j} g_j to the degree n component
  auto members = [&](int n) {
    std::vector<int> out;
    for (int j = 0; j < G; ++j)
      if (-weights[j] >= n) out.push_back(j);
    return out;
  };
  w.rank.resize(K);
  for (int k = 0; k < K; ++k) w.rank[k] = static_cast<int>(members(w.d_lo + k).size());
  w.down.resize(K - 1);
  w.up.resize(K - 1);
  for (int k = 0; k + 1 < K; ++k) {
    const int n = w.d_lo + k;
    std::vector<int> lo = members(n), hi = members(n + 1);
    std::vector<int> pos_lo(G, -1), pos_hi(G, -1);
    for (int b = 0; b < static_cast<int>(lo.size()); ++b) pos_lo[lo[b]] = b;
    for (int b = 0; b < static_cast<int>(hi.size()); ++b) pos_hi[hi[b]] = b;
    ZMatrix dn(ctx, static_cast<int>(lo.size()), static_cast<int>(hi.size()));
    for (int b = 0; b < static_cast<int>(hi.size()); ++b) dn.at(pos_lo[hi[b]], b) = 1;
    w.down[k] = dn;
    // D(u^a g_j) = a u^{a-1} g_j + sum_l c_jl u^{a + w_j - w_l - 1} g_l
    ZMatrix up(ctx, static_cast<int>(hi.size()), static_cast<int>(lo.size()));
    for (int b = 0; b < static_cast<int>(lo.size()); ++b) {
      const int j = lo[b];
      const int a = -n - weights[j];
      if (a >= 1) up.at(pos_hi[j], b) = ctx.reduce_i64(a);
      if (coupling.empty()) continue;
      for (int l = 0; l < G; ++l) {
        if (coupling[j][l] == 0) continue;
        up.at(pos_hi[l], b) = ctx.add(up.at(pos_hi[l], b), ctx.reduce_i64(coupling[j][l]));
      }
    }
    w.up[k] = up;
  }
  return w;
}

GradedWeylModule weyl_from_weights(std::uint64_t p, int N, const std::vector<int>& weights,
                                   int depth) {
  return weyl_module(p, N, weights, {}, depth);
}

GradedWeylModule random_weyl(std::uint64_t p, int N, std::uint64_t seed, int max_gens,
                             int max_weight) {
  PrecisionCtx ctx = PrecisionCtx::make(p, N, 4);
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  const int G = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_gens));
  std::vector<int> weights;
  for (int j = 0; j < G; ++j)
    weights.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(max_weight + 1)));
  std::vector<std::vector<std::int64_t>> coupling(G, std::vector<std::int64_t>(G, 0));
  for (int j = 0; j < G; ++j)
    for (int l = 0; l < G; ++l)
      if (weights[l] <= weights[j] - 1)
        coupling[j][l] = static_cast<std::int64_t>(rng() % ctx.pN);
  const int depth = static_cast<int>(p) + 1 + static_cast<int>(rng() % 2);
  GradedWeylModule w = weyl_module(p, N, weights, coupling, depth);
  if (!check_weyl(w).empty()) throw Error(ErrorKind::internal, "random module fails the axioms");
  return w;
}

}  // namespace nkit
