#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lis/error.hpp"
#include "lis/indexes.hpp"
#include "lis/simd.hpp"
#include "window_search.hpp"

namespace lis {

RegressionIndex RegressionIndex::build(const RankedKeySet& set, Fitter fitter) {
  if (set.empty()) throw PreconditionError("regression index over an empty keyset");
  RegressionIndex idx;
  idx.keys_ = set.shared_keys();
  idx.fitter_ = fitter;
  const auto pairs = RankedPairs::from_keyset(set);
  if (set.size() == 1) {
    idx.model_ = {0.0, 1.0};
  } else {
    idx.model_ = fit(fitter, pairs);
  }
  const auto r = simd::kernels().residual_sums(pairs.keys(), pairs.ranks(),
                                               idx.model_.slope, idx.model_.intercept);
  idx.max_abs_error_ = static_cast<std::size_t>(std::ceil(r.max_abs));
  return idx;
}

LookupOutcome RegressionIndex::lookup(Key k) const {
  const std::size_t n = keys_->size();
  const std::size_t p =
      detail::clamp_position(round_half_up(predict(model_, static_cast<double>(k))), 1, n);
  const std::size_t lo = p > max_abs_error_ ? p - max_abs_error_ : 1;
  const std::size_t hi = std::min(n, p + max_abs_error_);
  return detail::window_search(*keys_, lo, hi, k);
}

RegressionIndex build_regression_index(const RankedKeySet& set, Fitter fitter) {
  return RegressionIndex::build(set, fitter);
}

LookupOutcome regression_lookup(const RegressionIndex& index, Key k) {
  return index.lookup(k);
}

}  // namespace lis
