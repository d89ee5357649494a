#include "lis/poisoning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lis/error.hpp"
#include "lis/simd.hpp"

namespace lis {

CandidateStrategy parse_candidate_strategy(std::string_view name) {
  if (name == "gap-endpoints") return CandidateStrategy::gap_endpoints;
  if (name == "gap-endpoints-plus-midpoint") {
    return CandidateStrategy::gap_endpoints_plus_midpoint;
  }
  if (name == "dense") return CandidateStrategy::dense;
  throw ConfigError("unknown candidate strategy '" + std::string(name) +
                    "' (expected gap-endpoints, gap-endpoints-plus-midpoint or dense)");
}

std::string_view to_string(CandidateStrategy s) {
  switch (s) {
    case CandidateStrategy::gap_endpoints: return "gap-endpoints";
    case CandidateStrategy::gap_endpoints_plus_midpoint: return "gap-endpoints-plus-midpoint";
    case CandidateStrategy::dense: return "dense";
  }
  return "?";
}

std::size_t PoisonConfig::budget(std::size_t n) const {
  if (lambda) return *lambda;
  if (!(alpha >= 0.0) || alpha > 1.0) {
    throw ConfigError("poisoning threshold alpha must lie in [0, 1]");
  }
  // alpha * n carries representation error (0.07 * 100 = 7.000000000000001).
  const double raw = alpha * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

AugmentedStats::AugmentedStats(const RankedKeySet& set)
    : keys_(set.keys().begin(), set.keys().end()), universe_max_(set.universe_max()) {
  if (!keys_.empty()) {
    long double total = 0.0L;
    for (Key k : keys_) total += static_cast<long double>(k);
    origin_ = std::floor(static_cast<double>(total / keys_.size()));
  }
  refresh();
}

void AugmentedStats::refresh() {
  const std::size_t n = keys_.size();
  sum_k_ = sum_kk_ = sum_kr_ = 0.0;
  suffix_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(keys_[i]) - origin_;
    sum_k_ += k;
    sum_kk_ += k * k;
    sum_kr_ += k * static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 0;) {
    suffix_[i] = suffix_[i + 1] + (static_cast<double>(keys_[i]) - origin_);
  }
}

double AugmentedStats::sum_r() const noexcept {
  const double n = static_cast<double>(count());
  return n * (n + 1.0) * 0.5;
}

double AugmentedStats::sum_rr() const noexcept {
  const double n = static_cast<double>(count());
  return n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
}

double AugmentedStats::mse() const noexcept {
  if (keys_.empty()) return 0.0;
  return simd::scalar::ols_mse_from_sums(static_cast<double>(count()), sum_k_, sum_kk_,
                                         sum_kr_);
}

std::size_t AugmentedStats::insertion_rank(Key c) const noexcept {
  return static_cast<std::size_t>(std::lower_bound(keys_.begin(), keys_.end(), c) -
                                  keys_.begin()) + 1;
}

void AugmentedStats::insert(Key c) {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), c);
  if (it != keys_.end() && *it == c) {
    throw PreconditionError("key " + std::to_string(c) + " already in the keyset");
  }
  if (c >= universe_max_) {
    throw PreconditionError("key " + std::to_string(c) + " outside the universe");
  }
  keys_.insert(it, c);
  refresh();
}

double augmented_mse(const AugmentedStats& stats, Key c) {
  const std::size_t j = stats.insertion_rank(c);
  if (j <= stats.count() && stats.keys()[j - 1] == c) {
    throw PreconditionError("candidate " + std::to_string(c) + " already present");
  }
  const double shifted = static_cast<double>(c) - stats.origin();
  const double position = static_cast<double>(j);
  const double suffix = stats.suffix_sum(j);
  double out = 0.0;
  simd::AugmentedBatch batch{static_cast<double>(stats.count()),
                             stats.sum_k(),
                             stats.sum_kk(),
                             stats.sum_kr(),
                             {&shifted, 1},
                             {&position, 1},
                             {&suffix, 1}};
  simd::kernels().augmented_mse(batch, {&out, 1});
  return out;
}

namespace {

struct Candidate {
  Key key;
  std::size_t rank;  // 1-based rank after insertion
};

std::vector<Candidate> enumerate_candidates(std::span<const Key> keys, Key universe_max,
                                            CandidateStrategy strategy) {
  std::vector<Candidate> out;
  if (strategy == CandidateStrategy::dense) {
    if (universe_max > kDenseUniverseLimit) {
      throw ConfigError("dense candidates refused for a universe of " +
                        std::to_string(universe_max) + " keys (limit " +
                        std::to_string(kDenseUniverseLimit) + ")");
    }
    out.reserve(universe_max - keys.size());
    std::size_t next = 0;
    for (Key c = 0; c < universe_max; ++c) {
      if (next < keys.size() && keys[next] == c) {
        ++next;
        continue;
      }
      out.push_back({c, next + 1});
    }
    return out;
  }

  const bool midpoint = strategy == CandidateStrategy::gap_endpoints_plus_midpoint;
  out.reserve(keys.size() * (midpoint ? 3 : 2) + 3);
  // Open gap (lo, hi) exclusive; lo_open marks the virtual bound -1.
  auto emit_gap = [&](bool lo_open, Key lo, Key hi, std::size_t rank) {
    const Key first = lo_open ? 0 : lo + 1;
    if (first >= hi) return;
    const Key last = hi - 1;
    out.push_back({first, rank});
    if (midpoint) {
      const Key mid = lo_open ? (hi - 1) / 2 : lo + (hi - lo) / 2;
      if (mid > first && mid < last) out.push_back({mid, rank});
    }
    if (last != first) out.push_back({last, rank});
  };

  if (keys.empty()) {
    emit_gap(true, 0, universe_max, 1);
    return out;
  }
  emit_gap(true, 0, keys.front(), 1);
  for (std::size_t i = 1; i < keys.size(); ++i) emit_gap(false, keys[i - 1], keys[i], i + 1);
  emit_gap(false, keys.back(), universe_max, keys.size() + 1);
  return out;
}

}  // namespace

std::vector<Key> candidate_keys(const RankedKeySet& set, CandidateStrategy strategy) {
  if (set.empty()) throw PreconditionError("candidate_keys on an empty keyset");
  const auto cands = enumerate_candidates(set.keys(), set.universe_max(), strategy);
  std::vector<Key> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(c.key);
  return out;
}

PoisonResult greedy_poison(const RankedKeySet& set, const PoisonConfig& config) {
  if (set.empty()) throw PreconditionError("greedy_poison on an empty keyset");
  const std::size_t budget = config.budget(set.size());

  AugmentedStats stats(set);
  PoisonResult result;
  result.clean_loss = stats.mse();
  result.final_loss = result.clean_loss;
  result.poison_keys.reserve(budget);
  result.loss_trace.reserve(budget);

  std::vector<double> shifted, positions, suffix, losses;
  const auto& kernels = simd::kernels();
  for (std::size_t step = 0; step < budget; ++step) {
    const auto cands = enumerate_candidates(stats.keys(), stats.universe_max(), config.strategy);
    if (cands.empty()) {
      result.truncated = true;
      break;
    }
    shifted.resize(cands.size());
    positions.resize(cands.size());
    suffix.resize(cands.size());
    losses.resize(cands.size());
    for (std::size_t t = 0; t < cands.size(); ++t) {
      shifted[t] = static_cast<double>(cands[t].key) - stats.origin();
      positions[t] = static_cast<double>(cands[t].rank);
      suffix[t] = stats.suffix_sum(cands[t].rank);
    }
    kernels.augmented_mse({static_cast<double>(stats.count()), stats.sum_k(), stats.sum_kk(),
                           stats.sum_kr(), shifted, positions, suffix},
                          losses);

    // Candidates are ascending, so keeping the first within tolerance
    // resolves ties to the smallest key.
    constexpr double kTieTolerance = 1e-12;
    std::size_t best = 0;
    for (std::size_t t = 1; t < cands.size(); ++t) {
      if (losses[t] > losses[best] + kTieTolerance) best = t;
    }
    stats.insert(cands[best].key);
    result.poison_keys.push_back(cands[best].key);
    result.loss_trace.push_back(losses[best]);
  }
  if (!result.loss_trace.empty()) result.final_loss = result.loss_trace.back();
  return result;
}

RankedKeySet poison_dataset(const RankedKeySet& set, std::span<const Key> poison_keys) {
  std::vector<Key> sorted_poison(poison_keys.begin(), poison_keys.end());
  std::sort(sorted_poison.begin(), sorted_poison.end());
  std::vector<Key> merged;
  merged.reserve(set.size() + sorted_poison.size());
  std::merge(set.keys().begin(), set.keys().end(), sorted_poison.begin(), sorted_poison.end(),
             std::back_inserter(merged));
  const auto dup = std::adjacent_find(merged.begin(), merged.end());
  if (dup != merged.end()) {
    throw InvariantError("poison key " + std::to_string(*dup) +
                         " collides with an existing key");
  }
  for (Key k : sorted_poison) {
    if (k >= set.universe_max()) {
      throw InvariantError("poison key " + std::to_string(k) + " outside the universe");
    }
  }
  return RankedKeySet(std::move(merged), set.universe_max());
}

}  // namespace lis
