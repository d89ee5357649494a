// AArch64 variant. Two float64x2 registers stand in for the four reference
// lanes: lo holds lanes 0-1, hi holds lanes 2-3.

#include <arm_neon.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "lis/simd.hpp"

namespace lis::simd::neon {

namespace {

struct Quad {
  float64x2_t lo;
  float64x2_t hi;
};

inline Quad zero_quad() { return {vdupq_n_f64(0.0), vdupq_n_f64(0.0)}; }

inline Quad load(const double* p) { return {vld1q_f64(p), vld1q_f64(p + 2)}; }

inline std::array<double, 4> lanes(const Quad& q) {
  std::array<double, 4> out;
  vst1q_f64(out.data(), q.lo);
  vst1q_f64(out.data() + 2, q.hi);
  return out;
}

inline double fold(const std::array<double, 4>& l) {
  return (l[0] + l[1]) + (l[2] + l[3]);
}

inline float64x2_t ceil_log2(float64x2_t v) {
  const uint64x2_t bits = vreinterpretq_u64_f64(v);
  const int64x2_t exponent = vsubq_s64(
      vreinterpretq_s64_u64(vshrq_n_u64(bits, 52)), vdupq_n_s64(1023));
  const uint64x2_t frac = vandq_u64(bits, vdupq_n_u64((1ULL << 52) - 1));
  const uint64x2_t is_pow2 = vceqq_u64(frac, vdupq_n_u64(0));
  const int64x2_t value = vaddq_s64(vaddq_s64(exponent, vdupq_n_s64(1)),
                                    vreinterpretq_s64_u64(is_pow2));
  return vcvtq_f64_s64(value);
}

}  // namespace

PairSums pair_sums(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  Quad sx = zero_quad(), sy = zero_quad();
  for (std::size_t i = 0; i < body; i += 4) {
    const Quad qx = load(x.data() + i), qy = load(y.data() + i);
    sx = {vaddq_f64(sx.lo, qx.lo), vaddq_f64(sx.hi, qx.hi)};
    sy = {vaddq_f64(sy.lo, qy.lo), vaddq_f64(sy.hi, qy.hi)};
  }
  auto lx = lanes(sx), ly = lanes(sy);
  for (std::size_t i = body; i < n; ++i) {
    lx[i & 3] += x[i];
    ly[i & 3] += y[i];
  }
  return {fold(lx), fold(ly)};
}

CrossMoments cross_moments(std::span<const double> x, std::span<const double> y,
                           double mean_x, double mean_y) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  const float64x2_t mx = vdupq_n_f64(mean_x), my = vdupq_n_f64(mean_y);
  Quad xx = zero_quad(), xy = zero_quad(), yy = zero_quad();
  for (std::size_t i = 0; i < body; i += 4) {
    const Quad qx = load(x.data() + i), qy = load(y.data() + i);
    const float64x2_t dxl = vsubq_f64(qx.lo, mx), dxh = vsubq_f64(qx.hi, mx);
    const float64x2_t dyl = vsubq_f64(qy.lo, my), dyh = vsubq_f64(qy.hi, my);
    xx = {vaddq_f64(xx.lo, vmulq_f64(dxl, dxl)), vaddq_f64(xx.hi, vmulq_f64(dxh, dxh))};
    xy = {vaddq_f64(xy.lo, vmulq_f64(dxl, dyl)), vaddq_f64(xy.hi, vmulq_f64(dxh, dyh))};
    yy = {vaddq_f64(yy.lo, vmulq_f64(dyl, dyl)), vaddq_f64(yy.hi, vmulq_f64(dyh, dyh))};
  }
  auto lxx = lanes(xx), lxy = lanes(xy), lyy = lanes(yy);
  for (std::size_t i = body; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    lxx[i & 3] += dx * dx;
    lxy[i & 3] += dx * dy;
    lyy[i & 3] += dy * dy;
  }
  return {fold(lxx), fold(lxy), fold(lyy)};
}

ResidualSums residual_sums(std::span<const double> x, std::span<const double> y,
                           double a, double b) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  const float64x2_t va = vdupq_n_f64(a), vb = vdupq_n_f64(b), one = vdupq_n_f64(1.0);
  Quad sq = zero_quad(), ab = zero_quad(), mx = zero_quad(), lg = zero_quad();
  auto step = [&](float64x2_t xv, float64x2_t yv, float64x2_t& s, float64x2_t& t,
                  float64x2_t& m, float64x2_t& l) {
    const float64x2_t e = vsubq_f64(yv, vaddq_f64(vmulq_f64(va, xv), vb));
    const float64x2_t ae = vabsq_f64(e);
    s = vaddq_f64(s, vmulq_f64(e, e));
    t = vaddq_f64(t, ae);
    m = vmaxq_f64(m, ae);
    l = vaddq_f64(l, ceil_log2(vaddq_f64(ae, one)));
  };
  for (std::size_t i = 0; i < body; i += 4) {
    const Quad qx = load(x.data() + i), qy = load(y.data() + i);
    step(qx.lo, qy.lo, sq.lo, ab.lo, mx.lo, lg.lo);
    step(qx.hi, qy.hi, sq.hi, ab.hi, mx.hi, lg.hi);
  }
  auto lsq = lanes(sq), lab = lanes(ab), llg = lanes(lg);
  const auto lmx = lanes(mx);
  double m = std::max(std::max(lmx[0], lmx[1]), std::max(lmx[2], lmx[3]));
  for (std::size_t i = body; i < n; ++i) {
    const auto r = scalar::residual_sums(x.subspan(i, 1), y.subspan(i, 1), a, b);
    lsq[i & 3] += r.sum_sq;
    lab[i & 3] += r.sum_abs;
    llg[i & 3] += r.sum_ceil_log2;
    m = std::max(m, r.max_abs);
  }
  return {fold(lsq), fold(lab), m, fold(llg)};
}

void augmented_mse(const AugmentedBatch& batch, std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t body = n & ~std::size_t{1};
  const double count = batch.count + 1.0;
  const float64x2_t np = vdupq_n_f64(count);
  const float64x2_t half = vmulq_f64(vaddq_f64(np, vdupq_n_f64(1.0)), vdupq_n_f64(0.5));
  const float64x2_t syy = vdivq_f64(
      vmulq_f64(np, vsubq_f64(vmulq_f64(np, np), vdupq_n_f64(1.0))), vdupq_n_f64(12.0));
  const float64x2_t zero = vdupq_n_f64(0.0);
  for (std::size_t t = 0; t < body; t += 2) {
    const float64x2_t c = vld1q_f64(batch.keys.data() + t);
    const float64x2_t j = vld1q_f64(batch.positions.data() + t);
    const float64x2_t suf = vld1q_f64(batch.suffix.data() + t);
    const float64x2_t sk = vaddq_f64(vdupq_n_f64(batch.sum_k), c);
    const float64x2_t skk = vaddq_f64(vdupq_n_f64(batch.sum_kk), vmulq_f64(c, c));
    const float64x2_t skr =
        vaddq_f64(vaddq_f64(vdupq_n_f64(batch.sum_kr), suf), vmulq_f64(c, j));
    const float64x2_t sxx = vsubq_f64(skk, vdivq_f64(vmulq_f64(sk, sk), np));
    const float64x2_t sxy = vsubq_f64(skr, vmulq_f64(sk, half));
    const float64x2_t res = vsubq_f64(syy, vdivq_f64(vmulq_f64(sxy, sxy), sxx));
    const float64x2_t mse = vdivq_f64(res, np);
    const uint64x2_t keep = vandq_u64(vcgtq_f64(mse, zero), vcgtq_f64(sxx, zero));
    vst1q_f64(out.data() + t, vbslq_f64(keep, mse, zero));
  }
  for (std::size_t t = body; t < n; ++t) {
    const double c = batch.keys[t];
    out[t] = scalar::ols_mse_from_sums(
        count, batch.sum_k + c, batch.sum_kk + c * c,
        (batch.sum_kr + batch.suffix[t]) + c * batch.positions[t]);
  }
}

}  // namespace lis::simd::neon
