#include "nkit/series.hpp"

#include <algorithm>

namespace nkit {

namespace {
int clamp0(int v) { return v < 0 ? 0 : v; }

void check_same(const PrecisionCtx& a, const PrecisionCtx& b) {
  if (!a.same(b)) throw Error(ErrorKind::internal, "mixed precision contexts");
}
}  // namespace

TruncSeries::TruncSeries(const PrecisionCtx& ctx, std::vector<std::uint64_t> coeffs, int pprec,
                         int uprec)
    : ctx_(ctx), c_(std::move(coeffs)), pprec_(std::min(pprec, ctx.N)), uprec_(std::min(uprec, ctx.M)) {
  c_.resize(ctx.M, 0);
  for (auto& x : c_) x %= ctx.pN;
}

TruncSeries TruncSeries::zero(const PrecisionCtx& ctx) { return {ctx, {}, ctx.N, ctx.M}; }

TruncSeries TruncSeries::constant(const PrecisionCtx& ctx, std::uint64_t c) {
  return {ctx, {c % ctx.pN}, ctx.N, ctx.M};
}

TruncSeries TruncSeries::from_ints(const PrecisionCtx& ctx, const std::vector<std::int64_t>& cs) {
  std::vector<std::uint64_t> v;
  v.reserve(cs.size());
  for (auto x : cs) v.push_back(ctx.reduce_i64(x));
  return {ctx, std::move(v), ctx.N, ctx.M};
}

TruncSeries TruncSeries::monomial(const PrecisionCtx& ctx, int k, std::uint64_t c) {
  std::vector<std::uint64_t> v(ctx.M, 0);
  if (k < 0) throw Error(ErrorKind::internal, "monomial: negative degree");
  if (k < ctx.M) v[k] = c % ctx.pN;
  return {ctx, std::move(v), ctx.N, ctx.M};
}

TruncSeries TruncSeries::eis(const PrecisionCtx& ctx) {
  std::vector<std::uint64_t> v(ctx.M, 0);
  v[0] = ctx.pN - (ctx.p % ctx.pN);
  if (ctx.M > 1) v[1] = 1;
  return {ctx, std::move(v), ctx.N, ctx.M};
}

bool TruncSeries::is_zero() const {
  for (auto x : c_)
    if (x != 0) return false;
  return true;
}

int TruncSeries::u_valuation() const {
  for (int k = 0; k < static_cast<int>(c_.size()); ++k)
    if (c_[k] != 0) return k;
  return uprec_;
}

TruncSeries TruncSeries::with_prec(int pprec, int uprec) const {
  TruncSeries r = *this;
  r.pprec_ = std::min(pprec, ctx_.N);
  r.uprec_ = std::min(uprec, ctx_.M);
  return r;
}

TruncSeries operator+(const TruncSeries& a, const TruncSeries& b) {
  check_same(a.ctx_, b.ctx_);
  TruncSeries r = a;
  for (int k = 0; k < a.ctx_.M; ++k) r.c_[k] = a.ctx_.add(a.c_[k], b.c_[k]);
  r.pprec_ = std::min(a.pprec_, b.pprec_);
  r.uprec_ = std::min(a.uprec_, b.uprec_);
  return r;
}

TruncSeries operator-(const TruncSeries& a, const TruncSeries& b) {
  check_same(a.ctx_, b.ctx_);
  TruncSeries r = a;
  for (int k = 0; k < a.ctx_.M; ++k) r.c_[k] = a.ctx_.sub(a.c_[k], b.c_[k]);
  r.pprec_ = std::min(a.pprec_, b.pprec_);
  r.uprec_ = std::min(a.uprec_, b.uprec_);
  return r;
}

TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
  check_same(a.ctx_, b.ctx_);
  const auto& ctx = a.ctx_;
  std::vector<std::uint64_t> v(ctx.M, 0);
  for (int i = 0; i < ctx.M; ++i) {
    if (a.c_[i] == 0) continue;
    for (int j = 0; i + j < ctx.M; ++j) {
      if (b.c_[j] == 0) continue;
      v[i + j] = ctx.add(v[i + j], ctx.mul(a.c_[i], b.c_[j]));
    }
  }
  return {ctx, std::move(v), std::min(a.pprec_, b.pprec_), std::min(a.uprec_, b.uprec_)};
}

TruncSeries TruncSeries::operator-() const {
  TruncSeries r = *this;
  for (auto& x : r.c_) x = ctx_.neg(x);
  return r;
}

TruncSeries TruncSeries::scale(std::uint64_t c) const {
  TruncSeries r = *this;
  c %= ctx_.pN;
  for (auto& x : r.c_) x = ctx_.mul(x, c);
  return r;
}

TruncSeries TruncSeries::shift(int k) const {
  if (k < 0) throw Error(ErrorKind::internal, "shift: negative");
  std::vector<std::uint64_t> v(ctx_.M, 0);
  for (int i = 0; i + k < ctx_.M; ++i) v[i + k] = c_[i];
  return {ctx_, std::move(v), pprec_, std::min(ctx_.M, uprec_ + k)};
}

bool TruncSeries::operator==(const TruncSeries& o) const {
  return ctx_.same(o.ctx_) && c_ == o.c_;
}

EisDivResult eis_divide(const TruncSeries& f, int i) {
  const auto& ctx = f.ctx();
  if (i < 0 || i > f.uprec())
    throw Error(ErrorKind::precision,
                "eis_divide: exponent " + std::to_string(i) + " exceeds u-precision " +
                    std::to_string(f.uprec()));
  // Repeated synthetic division by the monic linear E = u - p:
  // f = q*E + c with q_k = f_{k+1} + p*q_{k+1} and c = f_0 + p*q_0.
  std::vector<std::uint64_t> cur = f.coeffs();
  std::vector<std::uint64_t> econsts;  // remainder digits in the E-basis: r = sum econsts[k] E^k
  for (int step = 0; step < i; ++step) {
    std::vector<std::uint64_t> q(ctx.M, 0);
    std::uint64_t carry = 0;  // q_{k+1}
    for (int k = ctx.M - 2; k >= 0; --k) {
      q[k] = ctx.add(cur[k + 1], ctx.mul(ctx.p % ctx.pN, carry));
      carry = q[k];
    }
    econsts.push_back(ctx.add(cur[0], ctx.mul(ctx.p % ctx.pN, q[0])));
    cur = std::move(q);
  }
  // expand remainder from E-basis to u-basis
  TruncSeries r = TruncSeries::zero(ctx);
  TruncSeries epow = TruncSeries::constant(ctx, 1);
  for (int k = 0; k < i; ++k) {
    r = r + epow.scale(econsts[k]);
    if (k + 1 < i) epow = epow * TruncSeries::eis(ctx);
  }
  int rp = std::min(f.pprec(), clamp0(f.uprec() - i + 1));
  EisDivResult out;
  out.quotient = TruncSeries(ctx, std::move(cur), f.pprec(), clamp0(f.uprec() - i));
  out.remainder = r.with_prec(rp, ctx.M);
  return out;
}

TruncSeries eis_remainder(const TruncSeries& f, int i) { return eis_divide(f, i).remainder; }

int EvalResult::valuation() const {
  if (num == 0) return certified;  // zero as far as visible
  return ctx.vp(num) - denom_exp;
}

bool EvalResult::certified_integral() const {
  if (certified <= 0) return false;
  if (denom_exp == 0) return true;
  return num == 0;  // normalized: nonzero num with denom is a certified non-integer
}

bool EvalResult::certified_non_integral() const {
  return certified > 0 && denom_exp > 0 && num != 0;
}

EvalResult ev_p(const TruncSeries& f) {
  const auto& ctx = f.ctx();
  EvalResult r;
  r.ctx = ctx;
  std::uint64_t acc = 0, pk = 1;
  for (int k = 0; k < ctx.M && k < ctx.N; ++k) {
    acc = ctx.add(acc, ctx.mul(f.coeff(k), pk));
    pk = ctx.mul(pk, ctx.p % ctx.pN);
  }
  r.num = acc;
  r.denom_exp = 0;
  r.certified = std::min(f.pprec(), f.uprec());
  return r;
}

TruncSeries frob(const TruncSeries& f) {
  const auto& ctx = f.ctx();
  std::vector<std::uint64_t> v(ctx.M, 0);
  for (int k = 0; static_cast<std::uint64_t>(k) * ctx.p < static_cast<std::uint64_t>(ctx.M); ++k)
    v[static_cast<std::size_t>(k) * ctx.p] = f.coeff(k);
  long long up = static_cast<long long>(f.uprec()) * static_cast<long long>(ctx.p);
  int uprec = up > ctx.M ? ctx.M : static_cast<int>(up);
  return {ctx, std::move(v), f.pprec(), uprec};
}

TruncSeries ddu(const TruncSeries& f) {
  const auto& ctx = f.ctx();
  std::vector<std::uint64_t> v(ctx.M, 0);
  for (int k = 1; k < ctx.M; ++k)
    v[k - 1] = ctx.mul(f.coeff(k), ctx.reduce_i64(k));
  return {ctx, std::move(v), f.pprec(), clamp0(f.uprec() - 1)};
}

TruncSeries invert_unit(const TruncSeries& f) {
  const auto& ctx = f.ctx();
  if (!f.is_unit())
    throw Error(ErrorKind::unit_expected, "invert_unit: constant term is not a unit");
  std::uint64_t inv0 = ctx.inv_unit(f.coeff(0));
  std::vector<std::uint64_t> g(ctx.M, 0);
  g[0] = inv0;
  // g_k = -inv0 * sum_{j=1..k} f_j g_{k-j}
  for (int k = 1; k < ctx.M; ++k) {
    std::uint64_t s = 0;
    for (int j = 1; j <= k; ++j) s = ctx.add(s, ctx.mul(f.coeff(j), g[k - j]));
    g[k] = ctx.mul(ctx.neg(s), inv0);
  }
  return {ctx, std::move(g), f.pprec(), f.uprec()};
}

TruncSeries eis_pow(const PrecisionCtx& ctx, int k) {
  TruncSeries r = TruncSeries::constant(ctx, 1);
  for (int i = 0; i < k; ++i) r = r * TruncSeries::eis(ctx);
  return r;
}

ScaledSeries ScaledSeries::normalized() const {
  if (denom_exp == 0) return *this;
  const auto& c = body.ctx();
  int strip = denom_exp;
  for (auto x : body.coeffs()) strip = std::min(strip, c.vp(x));
  if (strip == 0) return *this;
  std::vector<std::uint64_t> v;
  v.reserve(c.M);
  for (auto x : body.coeffs()) v.push_back(x == 0 ? 0 : x / c.ppow(strip));
  ScaledSeries r;
  r.denom_exp = denom_exp - strip;
  r.body = TruncSeries(c, std::move(v), clamp0(body.pprec() - strip), body.uprec());
  return r;
}

namespace {
ScaledSeries align_add(const ScaledSeries& a, const ScaledSeries& b, bool sub) {
  check_same(a.ctx(), b.ctx());
  const auto& ctx = a.ctx();
  int d = std::max(a.denom_exp, b.denom_exp);
  std::uint64_t sa = ctx.ppow(d - a.denom_exp), sb = ctx.ppow(d - b.denom_exp);
  TruncSeries ba = a.body.scale(sa).with_prec(std::min(ctx.N, a.body.pprec() + (d - a.denom_exp)),
                                              a.body.uprec());
  TruncSeries bb = b.body.scale(sb).with_prec(std::min(ctx.N, b.body.pprec() + (d - b.denom_exp)),
                                              b.body.uprec());
  ScaledSeries r;
  r.denom_exp = d;
  r.body = sub ? ba - bb : ba + bb;
  return r.normalized();
}
}  // namespace

ScaledSeries operator+(const ScaledSeries& a, const ScaledSeries& b) { return align_add(a, b, false); }
ScaledSeries operator-(const ScaledSeries& a, const ScaledSeries& b) { return align_add(a, b, true); }

ScaledSeries operator*(const ScaledSeries& a, const ScaledSeries& b) {
  ScaledSeries r;
  r.denom_exp = a.denom_exp + b.denom_exp;
  r.body = a.body * b.body;
  return r.normalized();
}

ScaledSeries ScaledSeries::operator-() const { return {denom_exp, -body}; }

bool ScaledSeries::same_value(const ScaledSeries& o) const {
  ScaledSeries d = *this - o;
  int g = d.body.pprec();
  if (g <= 0) return true;  // nothing certifiable at this precision
  const auto& ctx = d.body.ctx();
  for (int k = 0; k < d.body.uprec(); ++k) {
    std::uint64_t x = d.body.coeff(k);
    if (g >= ctx.N ? x != 0 : x % ctx.ppow(g) != 0) return false;
  }
  return true;
}

EvalResult ev_p(const ScaledSeries& f) {
  EvalResult r = ev_p(f.body);
  int v = std::min(r.ctx.vp(r.num), f.denom_exp);
  r.num = r.num == 0 ? 0 : r.num / r.ctx.ppow(v);
  r.denom_exp = f.denom_exp - v;
  r.certified -= f.denom_exp;
  return r;
}

ScaledSeries ddu(const ScaledSeries& f) { return {f.denom_exp, ddu(f.body)}; }

}  // namespace nkit
