#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace lis {

using Key = std::uint64_t;
/// 1-based position of a key in its sorted keyset.
using Rank = std::size_t;

inline constexpr Key kDefaultUniverseMax = Key{1} << 30;

enum class Distribution { uniform, lognormal, clustered };

Distribution parse_distribution(std::string_view name);
std::string_view to_string(Distribution d);

struct DatasetSpec {
  std::size_t n = 1000;
  Distribution distribution = Distribution::uniform;
  std::uint64_t seed = 42;
  Key universe_max = kDefaultUniverseMax;
};

/// Strictly ascending keys drawn from [0, universe_max). Immutable; copies
/// share the underlying array.
class RankedKeySet {
 public:
  RankedKeySet() = default;

  /// Validates strict ascent and the universe bound.
  RankedKeySet(std::vector<Key> sorted_keys, Key universe_max);

  /// Sorts, rejects duplicates with a FormatError naming the value.
  static RankedKeySet from_unsorted(std::vector<Key> keys, Key universe_max);

  std::span<const Key> keys() const noexcept { return {*keys_}; }
  const std::shared_ptr<const std::vector<Key>>& shared_keys() const noexcept {
    return keys_;
  }
  std::size_t size() const noexcept { return keys_->size(); }
  bool empty() const noexcept { return keys_->empty(); }
  Key universe_max() const noexcept { return universe_max_; }
  Key operator[](std::size_t i) const noexcept { return (*keys_)[i]; }
  Key min_key() const { return keys_->front(); }
  Key max_key() const { return keys_->back(); }
  bool contains(Key k) const;

  /// Keys as doubles and their ranks 1..n, the regression training view.
  std::vector<double> keys_as_double() const;
  std::vector<double> ranks_as_double() const;

  friend bool operator==(const RankedKeySet& a, const RankedKeySet& b) {
    return a.universe_max_ == b.universe_max_ && *a.keys_ == *b.keys_;
  }

 private:
  std::shared_ptr<const std::vector<Key>> keys_ =
      std::make_shared<const std::vector<Key>>();
  Key universe_max_ = kDefaultUniverseMax;
};

RankedKeySet generate(const DatasetSpec& spec);

/// Throws NotFoundError when k is absent.
Rank rank_of(const RankedKeySet& set, Key k);

/// Newline-delimited unsigned decimal keys, any order. When universe_max is
/// zero it defaults to max(2^30, largest key + 1).
RankedKeySet load_keyset(const std::filesystem::path& path, Key universe_max = 0);
void save_keyset(const RankedKeySet& set, const std::filesystem::path& path);

/// Ordered key list (poison files): order is preserved, no sorting.
std::vector<Key> load_key_list(const std::filesystem::path& path);
void save_key_list(std::span<const Key> keys, const std::filesystem::path& path);

/// Parses the newline-delimited format from memory; used by both loaders.
std::vector<Key> parse_key_lines(std::string_view text);

namespace detail {

/// Unbiased draw from [0, bound) using rejection on the raw engine output,
/// so results do not depend on the standard library's distributions.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& rng);

}  // namespace detail

}  // namespace lis
