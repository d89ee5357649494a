#pragma once

// Data-parallel inner loops shared by the regressors, the poisoning attack
// and index construction. Every kernel has a scalar reference version; the
// vector versions reproduce it bit for bit. Reductions use four interleaved
// accumulators (element i feeds lane i % 4) combined as (l0 + l1) + (l2 + l3),
// and the whole project is built with -ffp-contract=off.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lis::simd {

enum class Backend { scalar, avx2, neon };

std::string_view to_string(Backend b);

struct PairSums {
  double sum_x = 0.0;
  double sum_y = 0.0;
};

/// Centered second moments about (mean_x, mean_y).
struct CrossMoments {
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
};

/// Aggregates of e_i = y_i - (a * x_i + b).
struct ResidualSums {
  double sum_sq = 0.0;
  double sum_abs = 0.0;
  double max_abs = 0.0;
  /// Sum of ceil(log2(|e_i| + 1)), computed exactly from the exponent bits.
  double sum_ceil_log2 = 0.0;
};

/// Statistics of a sorted augmented keyset (keys shifted by a fixed origin)
/// plus one candidate insertion per lane: candidate key c_t at 1-based
/// position j_t, with suffix_t = sum of existing shifted keys at rank >= j_t.
struct AugmentedBatch {
  double count = 0.0;    ///< N, keys before insertion
  double sum_k = 0.0;    ///< sum of shifted keys
  double sum_kk = 0.0;   ///< sum of squared shifted keys
  double sum_kr = 0.0;   ///< sum of shifted key times rank
  std::span<const double> keys;       ///< c_t - origin
  std::span<const double> positions;  ///< j_t
  std::span<const double> suffix;     ///< suffix key sums at j_t
};

struct Kernels {
  Backend backend;
  PairSums (*pair_sums)(std::span<const double> x, std::span<const double> y);
  CrossMoments (*cross_moments)(std::span<const double> x,
                                std::span<const double> y, double mean_x,
                                double mean_y);
  ResidualSums (*residual_sums)(std::span<const double> x,
                                std::span<const double> y, double a, double b);
  /// Writes the post-insertion OLS mean squared error for every candidate.
  void (*augmented_mse)(const AugmentedBatch& batch, std::span<double> out);
};

/// Kernel table for a backend, or nullptr when it is not compiled in or the
/// CPU lacks the instructions.
const Kernels* kernels_for(Backend b);

/// Active table. Defaults to the best supported backend; the environment
/// variable LIS_SIMD=scalar|avx2|neon overrides the first selection.
const Kernels& kernels();

/// Throws ConfigError when the backend is unavailable.
void select_backend(Backend b);
Backend best_backend();
std::vector<Backend> available_backends();

// Sum of log2(|e_i| + 1); no vector variant (scalar std::log2 everywhere).
double sum_log2_residual(std::span<const double> x, std::span<const double> y,
                         double a, double b);

namespace scalar {
PairSums pair_sums(std::span<const double> x, std::span<const double> y);
CrossMoments cross_moments(std::span<const double> x, std::span<const double> y,
                           double mean_x, double mean_y);
ResidualSums residual_sums(std::span<const double> x, std::span<const double> y,
                           double a, double b);
void augmented_mse(const AugmentedBatch& batch, std::span<double> out);

/// Closed-form OLS MSE from shifted-key sums over ranks 1..count; the single
/// formula behind augmented_mse, exposed so every path shares it.
inline double ols_mse_from_sums(double count, double sum_k, double sum_kk,
                                double sum_kr) {
  const double half = (count + 1.0) * 0.5;
  const double syy = count * (count * count - 1.0) / 12.0;
  const double sxx = sum_kk - sum_k * sum_k / count;
  const double sxy = sum_kr - sum_k * half;
  if (!(sxx > 0.0)) return 0.0;
  const double res = syy - sxy * sxy / sxx;
  const double mse = res / count;
  return mse > 0.0 ? mse : 0.0;
}
}  // namespace scalar

#if defined(LIS_HAVE_AVX2_TU)
namespace avx2 {
PairSums pair_sums(std::span<const double> x, std::span<const double> y);
CrossMoments cross_moments(std::span<const double> x, std::span<const double> y,
                           double mean_x, double mean_y);
ResidualSums residual_sums(std::span<const double> x, std::span<const double> y,
                           double a, double b);
void augmented_mse(const AugmentedBatch& batch, std::span<double> out);
}  // namespace avx2
#endif

#if defined(LIS_HAVE_NEON_TU)
namespace neon {
PairSums pair_sums(std::span<const double> x, std::span<const double> y);
CrossMoments cross_moments(std::span<const double> x, std::span<const double> y,
                           double mean_x, double mean_y);
ResidualSums residual_sums(std::span<const double> x, std::span<const double> y,
                           double a, double b);
void augmented_mse(const AugmentedBatch& batch, std::span<double> out);
}  // namespace neon
#endif

}  // namespace lis::simd
