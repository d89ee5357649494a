#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lis/keyset.hpp"
#include "lis/regressors.hpp"

namespace lis {

/// Result of one lookup. probes counts the comparisons or slot inspections
/// performed after the model prediction; it is reported even on a miss.
struct LookupOutcome {
  std::optional<Rank> rank;
  std::size_t probes = 0;

  bool found() const noexcept { return rank.has_value(); }
};

/// Round half up; the single rounding rule used by every index.
inline double round_half_up(double x) noexcept { return std::floor(x + 0.5); }

// ---------------------------------------------------------------------------
// Single-model regression index

class RegressionIndex {
 public:
  static RegressionIndex build(const RankedKeySet& set, Fitter fitter);

  /// Binary search over [p - err, p + err] around the rounded prediction.
  LookupOutcome lookup(Key k) const;

  const LinearModel& model() const noexcept { return model_; }
  Fitter fitter() const noexcept { return fitter_; }
  /// ceil(max |predict - rank|) over all stored keys.
  std::size_t max_abs_error() const noexcept { return max_abs_error_; }
  std::size_t size() const noexcept { return keys_->size(); }

 private:
  std::shared_ptr<const std::vector<Key>> keys_;
  LinearModel model_;
  Fitter fitter_ = Fitter::slr;
  std::size_t max_abs_error_ = 0;
};

RegressionIndex build_regression_index(const RankedKeySet& set, Fitter fitter);
LookupOutcome regression_lookup(const RegressionIndex& index, Key k);

// ---------------------------------------------------------------------------
// Piecewise-linear index with a per-key error bound

/// Covers keys from first_key up to the next segment's first key. The model
/// is local: predicted rank = model.intercept + model.slope * (k - first_key),
/// with model.intercept equal to start_rank.
struct Segment {
  Key first_key = 0;
  LinearModel model;
  Rank start_rank = 1;

  double predict_rank(Key k) const noexcept {
    return model.intercept + model.slope * (static_cast<double>(k) - static_cast<double>(first_key));
  }
};

class PgmIndex {
 public:
  /// Greedy shrinking-cone segmentation; every key is predicted within
  /// epsilon of its rank by its owning segment.
  static PgmIndex build(const RankedKeySet& set, std::size_t epsilon);

  LookupOutcome lookup(Key k) const;

  std::span<const Segment> segments() const noexcept { return segments_; }
  std::size_t epsilon() const noexcept { return epsilon_; }
  std::size_t size() const noexcept { return keys_->size(); }
  /// Index of the segment owning k (last first_key <= k); k >= first key.
  std::size_t segment_for(Key k) const;

 private:
  std::shared_ptr<const std::vector<Key>> keys_;
  std::vector<Segment> segments_;
  std::vector<Key> first_keys_;
  std::size_t epsilon_ = 16;
};

PgmIndex build_pgm(const RankedKeySet& set, std::size_t epsilon);
LookupOutcome pgm_lookup(const PgmIndex& index, Key k);

inline constexpr std::size_t kDefaultPgmEpsilon = 16;

// ---------------------------------------------------------------------------
// Gapped array with model-based placement (a single ALEX-style data node)

class GappedArrayIndex {
 public:
  static constexpr int kMaxGrowthRetries = 16;

  /// density in (0.5, 1]; the slot array starts at ceil(n / density) slots.
  static GappedArrayIndex build(const RankedKeySet& set, double density);

  /// Exponential search outward from the predicted slot, then binary search.
  LookupOutcome lookup(Key k) const;

  const LinearModel& model() const noexcept { return model_; }
  double density() const noexcept { return density_; }
  std::size_t slot_count() const noexcept { return fill_.size(); }
  std::size_t size() const noexcept { return size_; }
  std::optional<Key> slot(std::size_t s) const;
  /// Rank of the key stored at an occupied slot.
  std::optional<Rank> rank_of_slot(std::size_t s) const;
  std::size_t predicted_slot(Key k) const noexcept;

 private:
  LinearModel model_;
  double density_ = 0.7;
  std::size_t size_ = 0;
  // fill_[s] is the key in slot s, or for a gap the key of the next
  // occupied slot to the right (UINT64_MAX past the last key), which keeps
  // the array non-decreasing for search.
  std::vector<Key> fill_;
  std::vector<std::uint32_t> slot_rank_;  // 0 for gaps
};

GappedArrayIndex build_alex(const RankedKeySet& set, double density = 0.7);
LookupOutcome alex_lookup(const GappedArrayIndex& index, Key k);

inline constexpr double kDefaultAlexDensity = 0.7;

// ---------------------------------------------------------------------------
// Name-addressed construction used by the benchmark and CLI

struct IndexParams {
  std::size_t pgm_epsilon = kDefaultPgmEpsilon;
  double alex_density = kDefaultAlexDensity;
};

using AnyIndex = std::variant<RegressionIndex, PgmIndex, GappedArrayIndex>;

/// slr, lad, theilsen, 2p, logte, dlogte, alex, pgm.
std::span<const std::string_view> index_names();
bool is_index_name(std::string_view name);

/// Throws ConfigError listing the valid names for an unknown name.
AnyIndex build_index(std::string_view name, const RankedKeySet& set,
                     const IndexParams& params = {});
LookupOutcome lookup(const AnyIndex& index, Key k);

}  // namespace lis
