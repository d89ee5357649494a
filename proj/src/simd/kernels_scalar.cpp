#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

#include "lis/simd.hpp"

namespace lis::simd {

namespace {

inline double fold(const std::array<double, 4>& l) {
  return (l[0] + l[1]) + (l[2] + l[3]);
}

}  // namespace

namespace scalar {

PairSums pair_sums(std::span<const double> x, std::span<const double> y) {
  std::array<double, 4> sx{}, sy{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx[i & 3] += x[i];
    sy[i & 3] += y[i];
  }
  return {fold(sx), fold(sy)};
}

CrossMoments cross_moments(std::span<const double> x, std::span<const double> y,
                           double mean_x, double mean_y) {
  std::array<double, 4> xx{}, xy{}, yy{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    xx[i & 3] += dx * dx;
    xy[i & 3] += dx * dy;
    yy[i & 3] += dy * dy;
  }
  return {fold(xx), fold(xy), fold(yy)};
}

ResidualSums residual_sums(std::span<const double> x, std::span<const double> y,
                           double a, double b) {
  std::array<double, 4> sq{}, ab{}, lg{};
  double mx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (a * x[i] + b);
    const double ae = std::fabs(e);
    sq[i & 3] += e * e;
    ab[i & 3] += ae;
    mx = std::max(mx, ae);
    // ceil(log2(v)) for v >= 1: unbiased exponent, plus one unless v is an
    // exact power of two.
    const auto bits = std::bit_cast<std::uint64_t>(ae + 1.0);
    const auto exponent = static_cast<std::int64_t>(bits >> 52) - 1023;
    const std::int64_t frac = (bits & ((std::uint64_t{1} << 52) - 1)) != 0;
    lg[i & 3] += static_cast<double>(exponent + frac);
  }
  return {fold(sq), fold(ab), mx, fold(lg)};
}

void augmented_mse(const AugmentedBatch& batch, std::span<double> out) {
  const double np = batch.count + 1.0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double c = batch.keys[t];
    const double sk = batch.sum_k + c;
    const double skk = batch.sum_kk + c * c;
    const double skr = (batch.sum_kr + batch.suffix[t]) + c * batch.positions[t];
    out[t] = ols_mse_from_sums(np, sk, skk, skr);
  }
}

}  // namespace scalar

double sum_log2_residual(std::span<const double> x, std::span<const double> y,
                         double a, double b) {
  std::array<double, 4> lg{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (a * x[i] + b);
    lg[i & 3] += std::log2(std::fabs(e) + 1.0);
  }
  return fold(lg);
}

}  // namespace lis::simd
