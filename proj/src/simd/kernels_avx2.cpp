// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "lis/simd.hpp"

namespace lis::simd::avx2 {

namespace {

inline std::array<double, 4> lanes(__m256d v) {
  std::array<double, 4> out;
  _mm256_storeu_pd(out.data(), v);
  return out;
}

inline double fold(const std::array<double, 4>& l) {
  return (l[0] + l[1]) + (l[2] + l[3]);
}

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// ceil(log2(v)) for v >= 1, as doubles.
inline __m256d ceil_log2_pd(__m256d v) {
  const __m256i bits = _mm256_castpd_si256(v);
  const __m256i exponent =
      _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
  const __m256i frac = _mm256_and_si256(
      bits, _mm256_set1_epi64x(static_cast<long long>((1ULL << 52) - 1)));
  // exponent + 1 - (frac == 0)
  const __m256i is_pow2 = _mm256_cmpeq_epi64(frac, _mm256_setzero_si256());
  const __m256i value = _mm256_add_epi64(
      _mm256_add_epi64(exponent, _mm256_set1_epi64x(1)), is_pow2);
  // Small non-negative int64 to double via the 2^52 bias trick.
  const __m256d magic = _mm256_set1_pd(0x1.0p52);
  const __m256d biased = _mm256_castsi256_pd(
      _mm256_or_si256(value, _mm256_castpd_si256(magic)));
  return _mm256_sub_pd(biased, magic);
}

}  // namespace

PairSums pair_sums(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const std::size_t body = n & ~std::size_t{3};
  __m256d sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    sx = _mm256_add_pd(sx, _mm256_loadu_pd(x.data() + i));
    sy = _mm256_add_pd(sy, _mm256_loadu_pd(y.data() + i));
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
  const __m256d mx = _mm256_set1_pd(mean_x), my = _mm256_set1_pd(mean_y);
  __m256d xx = _mm256_setzero_pd(), xy = _mm256_setzero_pd(),
          yy = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), mx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), my);
    xx = _mm256_add_pd(xx, _mm256_mul_pd(dx, dx));
    xy = _mm256_add_pd(xy, _mm256_mul_pd(dx, dy));
    yy = _mm256_add_pd(yy, _mm256_mul_pd(dy, dy));
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
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d sq = _mm256_setzero_pd(), ab = _mm256_setzero_pd(),
          mx = _mm256_setzero_pd(), lg = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d pred =
        _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i)), vb);
    const __m256d e = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), pred);
    const __m256d ae = abs_pd(e);
    sq = _mm256_add_pd(sq, _mm256_mul_pd(e, e));
    ab = _mm256_add_pd(ab, ae);
    mx = _mm256_max_pd(mx, ae);
    lg = _mm256_add_pd(lg, ceil_log2_pd(_mm256_add_pd(ae, one)));
  }
  auto lsq = lanes(sq), lab = lanes(ab), llg = lanes(lg);
  const auto lmx = lanes(mx);
  double m = std::max(std::max(lmx[0], lmx[1]), std::max(lmx[2], lmx[3]));
  for (std::size_t i = body; i < n; ++i) {
    // Single-element scalar call: identical per-element arithmetic, and the
    // result lands in lane i & 3 like the reference.
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
  const std::size_t body = n & ~std::size_t{3};
  const double count = batch.count + 1.0;
  const __m256d np = _mm256_set1_pd(count);
  const __m256d half = _mm256_mul_pd(_mm256_add_pd(np, _mm256_set1_pd(1.0)),
                                     _mm256_set1_pd(0.5));
  const __m256d syy = _mm256_div_pd(
      _mm256_mul_pd(np, _mm256_sub_pd(_mm256_mul_pd(np, np), _mm256_set1_pd(1.0))),
      _mm256_set1_pd(12.0));
  const __m256d sum_k = _mm256_set1_pd(batch.sum_k);
  const __m256d sum_kk = _mm256_set1_pd(batch.sum_kk);
  const __m256d sum_kr = _mm256_set1_pd(batch.sum_kr);
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t t = 0; t < body; t += 4) {
    const __m256d c = _mm256_loadu_pd(batch.keys.data() + t);
    const __m256d j = _mm256_loadu_pd(batch.positions.data() + t);
    const __m256d suf = _mm256_loadu_pd(batch.suffix.data() + t);
    const __m256d sk = _mm256_add_pd(sum_k, c);
    const __m256d skk = _mm256_add_pd(sum_kk, _mm256_mul_pd(c, c));
    const __m256d skr =
        _mm256_add_pd(_mm256_add_pd(sum_kr, suf), _mm256_mul_pd(c, j));
    const __m256d sxx = _mm256_sub_pd(skk, _mm256_div_pd(_mm256_mul_pd(sk, sk), np));
    const __m256d sxy = _mm256_sub_pd(skr, _mm256_mul_pd(sk, half));
    const __m256d res = _mm256_sub_pd(syy, _mm256_div_pd(_mm256_mul_pd(sxy, sxy), sxx));
    __m256d mse = _mm256_max_pd(_mm256_div_pd(res, np), zero);
    mse = _mm256_and_pd(mse, _mm256_cmp_pd(sxx, zero, _CMP_GT_OQ));
    _mm256_storeu_pd(out.data() + t, mse);
  }
  for (std::size_t t = body; t < n; ++t) {
    const double c = batch.keys[t];
    out[t] = scalar::ols_mse_from_sums(
        count, batch.sum_k + c, batch.sum_kk + c * c,
        (batch.sum_kr + batch.suffix[t]) + c * batch.positions[t]);
  }
}

}  // namespace lis::simd::avx2
