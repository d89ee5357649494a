#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lis/keyset.hpp"

namespace lis {

enum class CandidateStrategy { gap_endpoints, gap_endpoints_plus_midpoint, dense };

CandidateStrategy parse_candidate_strategy(std::string_view name);
std::string_view to_string(CandidateStrategy s);

/// The dense strategy enumerates the whole universe and refuses beyond this.
inline constexpr Key kDenseUniverseLimit = Key{1} << 20;

struct PoisonConfig {
  /// Poisoning threshold p/n.
  double alpha = 0.0;
  /// Explicit budget; derived as ceil(alpha * n) when unset.
  std::optional<std::size_t> lambda;
  CandidateStrategy strategy = CandidateStrategy::gap_endpoints_plus_midpoint;
  /// Reserved; the attack is deterministic.
  std::uint64_t seed = 0;

  std::size_t budget(std::size_t n) const;
};

struct PoisonResult {
  std::vector<Key> poison_keys;   ///< insertion order
  std::vector<double> loss_trace; ///< OLS MSE after each insertion
  double final_loss = 0.0;
  double clean_loss = 0.0;
  /// Candidates ran out before the budget was spent.
  bool truncated = false;
};

/// Running sums over a sorted augmented keyset for O(1) evaluation of the
/// OLS loss after one hypothetical insertion. Keys are shifted by a fixed
/// integer origin (floor of the initial key mean) to keep the sums well
/// conditioned; ranks are 1..N.
class AugmentedStats {
 public:
  explicit AugmentedStats(const RankedKeySet& set);

  std::size_t count() const noexcept { return keys_.size(); }
  std::span<const Key> keys() const noexcept { return keys_; }
  Key universe_max() const noexcept { return universe_max_; }
  double origin() const noexcept { return origin_; }

  double sum_k() const noexcept { return sum_k_; }
  double sum_kk() const noexcept { return sum_kk_; }
  double sum_kr() const noexcept { return sum_kr_; }
  double sum_r() const noexcept;
  double sum_rr() const noexcept;
  /// Sum of shifted keys with rank >= j, for j in [1, N + 1].
  double suffix_sum(std::size_t j) const { return suffix_.at(j - 1); }

  /// Minimum OLS MSE over the current keyset.
  double mse() const noexcept;

  /// 1-based rank c would take if inserted.
  std::size_t insertion_rank(Key c) const noexcept;

  /// Commits c, shifting the ranks of all larger keys, and refreshes sums.
  void insert(Key c);

 private:
  void refresh();

  std::vector<Key> keys_;
  Key universe_max_;
  double origin_ = 0.0;
  double sum_k_ = 0.0;
  double sum_kk_ = 0.0;
  double sum_kr_ = 0.0;
  std::vector<double> suffix_;
};

/// OLS MSE of the keyset after inserting c with rank shifts applied.
/// Throws PreconditionError when c is already present.
double augmented_mse(const AugmentedStats& stats, Key c);

/// Absent keys considered by the attack, ascending.
std::vector<Key> candidate_keys(const RankedKeySet& set, CandidateStrategy strategy);

PoisonResult greedy_poison(const RankedKeySet& set, const PoisonConfig& config);

/// Sorted union of the legitimate keys and the poison keys.
RankedKeySet poison_dataset(const RankedKeySet& set, std::span<const Key> poison_keys);
inline RankedKeySet poison_dataset(const RankedKeySet& set, const PoisonResult& result) {
  return poison_dataset(set, result.poison_keys);
}

}  // namespace lis
