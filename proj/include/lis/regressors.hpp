#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lis/keyset.hpp"

namespace lis {

/// rank ~= slope * key + intercept
struct LinearModel {
  double slope = 0.0;
  double intercept = 0.0;

  bool finite() const noexcept;
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Unchecked view of (key, rank) training pairs. Fitters accept any order.
struct PairsView {
  std::span<const double> keys;
  std::span<const double> ranks;

  std::size_t size() const noexcept { return keys.size(); }
};

/// Owning, validated pairs: nonempty, equal lengths, keys strictly ascending.
class RankedPairs {
 public:
  RankedPairs(std::vector<double> keys, std::vector<double> ranks);
  static RankedPairs from_keyset(const RankedKeySet& set);

  PairsView view() const noexcept { return {keys_, ranks_}; }
  operator PairsView() const noexcept { return view(); }
  std::size_t size() const noexcept { return keys_.size(); }
  const std::vector<double>& keys() const noexcept { return keys_; }
  const std::vector<double>& ranks() const noexcept { return ranks_; }

 private:
  std::vector<double> keys_;
  std::vector<double> ranks_;
};

enum class LossKind { mse, mae, logte, dlogte, max_abs };

enum class Fitter { slr, lad, theilsen, two_point, logte, dlogte };

Fitter parse_fitter(std::string_view name);
std::string_view to_string(Fitter f);
/// Loss a fitter minimizes; TheilSen and 2P minimize none.
std::optional<LossKind> criterion_of(Fitter f);

inline double predict(const LinearModel& m, double key) noexcept {
  return m.slope * key + m.intercept;
}

double eval_loss(const LinearModel& m, PairsView data, LossKind kind);

LinearModel fit_slr(PairsView data);
LinearModel fit_lad(PairsView data);
LinearModel fit_theilsen(PairsView data);
LinearModel fit_2p(PairsView data);
LinearModel fit_logte(PairsView data);
LinearModel fit_dlogte(PairsView data);
LinearModel fit(Fitter f, PairsView data);

/// Largest n for which fit_lad enumerates every two-point line exactly.
inline constexpr std::size_t kLadExactLimit = 512;

}  // namespace lis
