#pragma once

#include <cstddef>
#include <span>

#include "lis/indexes.hpp"

namespace lis::detail {

// Binary search for k over 1-based ranks [lo, hi]; one probe per comparison.
inline LookupOutcome window_search(std::span<const Key> keys, std::size_t lo, std::size_t hi,
                                   Key k) {
  LookupOutcome out;
  while (lo <= hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++out.probes;
    const Key v = keys[mid - 1];
    if (v == k) {
      out.rank = mid;
      return out;
    }
    if (v < k) {
      lo = mid + 1;
    } else {
      if (mid == 1) break;
      hi = mid - 1;
    }
  }
  return out;
}

inline std::size_t clamp_position(double p, std::size_t lo, std::size_t hi) {
  if (!(p >= static_cast<double>(lo))) return lo;
  if (p >= static_cast<double>(hi)) return hi;
  return static_cast<std::size_t>(p);
}

}  // namespace lis::detail
