#include <cmath>
#include <limits>
#include <string>

#include "lis/error.hpp"
#include "lis/indexes.hpp"
#include "window_search.hpp"

namespace lis {

namespace {

constexpr Key kPastEnd = std::numeric_limits<Key>::max();

}  // namespace

GappedArrayIndex GappedArrayIndex::build(const RankedKeySet& set, double density) {
  if (!(density > 0.5 && density <= 1.0)) {
    throw ConfigError("gapped array density must lie in (0.5, 1], got " + std::to_string(density));
  }
  if (set.empty()) throw PreconditionError("gapped array over an empty keyset");
  const auto keys = set.keys();
  const std::size_t n = keys.size();

  // Model key -> position in [0, n), rescaled to the slot space below.
  LinearModel base{0.0, 0.0};
  if (n > 1) {
    std::vector<double> x(keys.begin(), keys.end()), y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i);
    base = fit_slr(PairsView{x, y});
  }

  // The model is fitted once over the initial slot space. Growth only
  // appends slots: rescaling the model with the array would push keys that
  // predict past the end out again in proportion.
  const std::size_t base_slots =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n) / density));
  const double scale = static_cast<double>(base_slots) / static_cast<double>(n);
  std::size_t slots = base_slots;
  for (int attempt = 0; attempt <= kMaxGrowthRetries; ++attempt) {
    GappedArrayIndex idx;
    idx.density_ = density;
    idx.size_ = n;
    idx.model_ = {base.slope * scale, base.intercept * scale};
    idx.fill_.assign(slots, kPastEnd);
    idx.slot_rank_.assign(slots, 0);

    bool overflow = false;
    std::size_t next_free = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pos = std::max(idx.predicted_slot(keys[i]), next_free);
      if (pos >= slots) {
        overflow = true;
        break;
      }
      idx.fill_[pos] = keys[i];
      idx.slot_rank_[pos] = static_cast<std::uint32_t>(i + 1);
      next_free = pos + 1;
    }
    if (!overflow) {
      for (std::size_t s = slots - 1; s-- > 0;) {
        if (idx.slot_rank_[s] == 0) idx.fill_[s] = idx.fill_[s + 1];
      }
      return idx;
    }
    slots = static_cast<std::size_t>(std::ceil(static_cast<double>(slots) * 1.1));
  }
  throw BuildError("gapped array placement overflowed after " +
                   std::to_string(kMaxGrowthRetries) + " growth retries");
}

std::size_t GappedArrayIndex::predicted_slot(Key k) const noexcept {
  return detail::clamp_position(round_half_up(predict(model_, static_cast<double>(k))), 0,
                                fill_.size() - 1);
}

std::optional<Key> GappedArrayIndex::slot(std::size_t s) const {
  if (slot_rank_.at(s) == 0) return std::nullopt;
  return fill_[s];
}

std::optional<Rank> GappedArrayIndex::rank_of_slot(std::size_t s) const {
  if (slot_rank_.at(s) == 0) return std::nullopt;
  return slot_rank_[s];
}

LookupOutcome GappedArrayIndex::lookup(Key k) const {
  LookupOutcome out;
  const std::size_t slots = fill_.size();
  const std::size_t p = predicted_slot(k);

  // Bracket the last slot whose fill value is <= k inside [lo, hi), with lo
  // known to satisfy the predicate (or lo == -1 meaning none does).
  std::ptrdiff_t lo;
  std::ptrdiff_t hi;
  ++out.probes;
  if (fill_[p] <= k) {
    lo = static_cast<std::ptrdiff_t>(p);
    hi = static_cast<std::ptrdiff_t>(slots);
    for (std::size_t step = 1;; step *= 2) {
      const std::size_t s = p + step;
      if (s >= slots) break;
      ++out.probes;
      if (fill_[s] > k) {
        hi = static_cast<std::ptrdiff_t>(s);
        break;
      }
      lo = static_cast<std::ptrdiff_t>(s);
    }
  } else {
    hi = static_cast<std::ptrdiff_t>(p);
    lo = -1;
    for (std::size_t step = 1;; step *= 2) {
      if (step > p) break;
      const std::size_t s = p - step;
      ++out.probes;
      if (fill_[s] <= k) {
        lo = static_cast<std::ptrdiff_t>(s);
        break;
      }
      hi = static_cast<std::ptrdiff_t>(s);
    }
  }
  while (hi - lo > 1) {
    const std::ptrdiff_t mid = lo + (hi - lo) / 2;
    ++out.probes;
    if (fill_[static_cast<std::size_t>(mid)] <= k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo < 0) return out;
  const auto t = static_cast<std::size_t>(lo);
  if (slot_rank_[t] != 0 && fill_[t] == k) out.rank = slot_rank_[t];
  return out;
}

GappedArrayIndex build_alex(const RankedKeySet& set, double density) {
  return GappedArrayIndex::build(set, density);
}

LookupOutcome alex_lookup(const GappedArrayIndex& index, Key k) { return index.lookup(k); }

}  // namespace lis
