#include <algorithm>
#include <cmath>

#include "lis/error.hpp"
#include "lis/indexes.hpp"
#include "window_search.hpp"

namespace lis {

PgmIndex PgmIndex::build(const RankedKeySet& set, std::size_t epsilon) {
  if (epsilon < 1) throw ConfigError("PGM epsilon must be at least 1");
  if (set.empty()) throw PreconditionError("PGM index over an empty keyset");
  PgmIndex idx;
  idx.keys_ = set.shared_keys();
  idx.epsilon_ = epsilon;

  // Tighten the cone slightly so floating-point rounding of the segment
  // prediction can never push a key past epsilon.
  const double eps = static_cast<double>(epsilon) - 1e-7;
  const auto keys = set.keys();
  const std::size_t n = keys.size();

  std::size_t start = 0;
  while (start < n) {
    const double x0 = static_cast<double>(keys[start]);
    const double y0 = static_cast<double>(start + 1);
    double lo = -INFINITY, hi = INFINITY;
    std::size_t end = start + 1;
    for (; end < n; ++end) {
      const double dx = static_cast<double>(keys[end]) - x0;
      const double dy = static_cast<double>(end + 1) - y0;
      const double new_lo = std::max(lo, (dy - eps) / dx);
      const double new_hi = std::min(hi, (dy + eps) / dx);
      if (new_lo > new_hi) break;
      lo = new_lo;
      hi = new_hi;
    }
    const double slope = end == start + 1 ? 0.0 : 0.5 * (lo + hi);
    idx.segments_.push_back({keys[start], {slope, y0}, start + 1});
    idx.first_keys_.push_back(keys[start]);
    start = end;
  }
  return idx;
}

std::size_t PgmIndex::segment_for(Key k) const {
  const auto it = std::upper_bound(first_keys_.begin(), first_keys_.end(), k);
  return it == first_keys_.begin() ? 0 : static_cast<std::size_t>(it - first_keys_.begin()) - 1;
}

LookupOutcome PgmIndex::lookup(Key k) const {
  LookupOutcome out;
  if (k < first_keys_.front()) return out;

  // Last segment whose first key is <= k, searching boundaries 1..S-1.
  std::size_t lo = 1, hi = first_keys_.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++out.probes;
    if (first_keys_[mid] <= k) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  const Segment& seg = segments_[lo - 1];

  const std::size_t n = keys_->size();
  const std::size_t p = detail::clamp_position(round_half_up(seg.predict_rank(k)), 1, n);
  const std::size_t wlo = p > epsilon_ ? p - epsilon_ : 1;
  const std::size_t whi = std::min(n, p + epsilon_);
  const auto inner = detail::window_search(*keys_, wlo, whi, k);
  out.rank = inner.rank;
  out.probes += inner.probes;
  return out;
}

PgmIndex build_pgm(const RankedKeySet& set, std::size_t epsilon) {
  return PgmIndex::build(set, epsilon);
}

LookupOutcome pgm_lookup(const PgmIndex& index, Key k) { return index.lookup(k); }

}  // namespace lis
