#include "lis/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lis/error.hpp"
#include "lis/simd.hpp"

namespace lis {

bool LinearModel::finite() const noexcept {
  return std::isfinite(slope) && std::isfinite(intercept);
}

RankedPairs::RankedPairs(std::vector<double> keys, std::vector<double> ranks)
    : keys_(std::move(keys)), ranks_(std::move(ranks)) {
  if (keys_.empty()) throw PreconditionError("ranked pairs must be nonempty");
  if (keys_.size() != ranks_.size()) {
    throw PreconditionError("ranked pairs: key and rank counts differ");
  }
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    if (!(keys_[i - 1] < keys_[i])) {
      throw PreconditionError("ranked pairs: keys not strictly ascending");
    }
  }
}

RankedPairs RankedPairs::from_keyset(const RankedKeySet& set) {
  return RankedPairs(set.keys_as_double(), set.ranks_as_double());
}

Fitter parse_fitter(std::string_view name) {
  if (name == "slr") return Fitter::slr;
  if (name == "lad") return Fitter::lad;
  if (name == "theilsen") return Fitter::theilsen;
  if (name == "2p") return Fitter::two_point;
  if (name == "logte") return Fitter::logte;
  if (name == "dlogte") return Fitter::dlogte;
  throw ConfigError("unknown regressor '" + std::string(name) + "'");
}

std::string_view to_string(Fitter f) {
  switch (f) {
    case Fitter::slr: return "slr";
    case Fitter::lad: return "lad";
    case Fitter::theilsen: return "theilsen";
    case Fitter::two_point: return "2p";
    case Fitter::logte: return "logte";
    case Fitter::dlogte: return "dlogte";
  }
  return "?";
}

std::optional<LossKind> criterion_of(Fitter f) {
  switch (f) {
    case Fitter::slr: return LossKind::mse;
    case Fitter::lad: return LossKind::mae;
    case Fitter::logte: return LossKind::logte;
    case Fitter::dlogte: return LossKind::dlogte;
    case Fitter::theilsen:
    case Fitter::two_point: break;
  }
  return std::nullopt;
}

double eval_loss(const LinearModel& m, PairsView data, LossKind kind) {
  if (data.size() == 0) throw PreconditionError("eval_loss on empty data");
  const double n = static_cast<double>(data.size());
  if (kind == LossKind::logte) {
    return simd::sum_log2_residual(data.keys, data.ranks, m.slope, m.intercept) / n;
  }
  const auto r =
      simd::kernels().residual_sums(data.keys, data.ranks, m.slope, m.intercept);
  switch (kind) {
    case LossKind::mse: return r.sum_sq / n;
    case LossKind::mae: return r.sum_abs / n;
    case LossKind::dlogte: return r.sum_ceil_log2 / n;
    case LossKind::max_abs: return r.max_abs;
    case LossKind::logte: break;
  }
  return r.sum_sq / n;
}

namespace {

void require_two_distinct(PairsView data, const char* who) {
  if (data.size() < 2) {
    throw DegenerateFitError(std::string(who) + ": need at least two pairs");
  }
  const auto [lo, hi] = std::minmax_element(data.keys.begin(), data.keys.end());
  if (*lo == *hi) {
    throw DegenerateFitError(std::string(who) + ": all keys are equal");
  }
}

LinearModel line_through(double x1, double y1, double x2, double y2) {
  const double a = (y2 - y1) / (x2 - x1);
  return {a, y1 - a * x1};
}

double median_in_place(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double mean_abs(PairsView d, const LinearModel& m) {
  return simd::kernels().residual_sums(d.keys, d.ranks, m.slope, m.intercept).sum_abs /
         static_cast<double>(d.size());
}

}  // namespace

LinearModel fit_slr(PairsView data) {
  require_two_distinct(data, "fit_slr");
  const auto& k = simd::kernels();
  const double n = static_cast<double>(data.size());
  const auto sums = k.pair_sums(data.keys, data.ranks);
  const double mx = sums.sum_x / n;
  const double my = sums.sum_y / n;
  const auto mom = k.cross_moments(data.keys, data.ranks, mx, my);
  if (!(mom.sxx > 0.0)) throw DegenerateFitError("fit_slr: zero key variance");
  const double a = mom.sxy / mom.sxx;
  return {a, my - a * mx};
}

LinearModel fit_2p(PairsView data) {
  if (data.size() < 2) throw DegenerateFitError("fit_2p: need at least two pairs");
  const std::size_t last = data.size() - 1;
  if (data.keys[0] == data.keys[last]) {
    throw DegenerateFitError("fit_2p: first and last keys are equal");
  }
  return line_through(data.keys[0], data.ranks[0], data.keys[last], data.ranks[last]);
}

LinearModel fit_theilsen(PairsView data) {
  require_two_distinct(data, "fit_theilsen");
  const std::size_t n = data.size();
  std::vector<double> slopes;
  slopes.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = data.keys[j] - data.keys[i];
      if (dx != 0.0) slopes.push_back((data.ranks[j] - data.ranks[i]) / dx);
    }
  }
  const double slope = median_in_place(slopes);
  std::vector<double> offsets(n);
  for (std::size_t i = 0; i < n; ++i) offsets[i] = data.ranks[i] - slope * data.keys[i];
  return {slope, median_in_place(offsets)};
}

LinearModel fit_lad(PairsView data) {
  require_two_distinct(data, "fit_lad");
  const std::size_t n = data.size();

  if (n <= kLadExactLimit) {
    // Some optimal L1 line passes through two sample points.
    LinearModel best{};
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (data.keys[i] == data.keys[j]) continue;
        const auto m =
            line_through(data.keys[i], data.ranks[i], data.keys[j], data.ranks[j]);
        const double loss = mean_abs(data, m);
        if (loss < best_loss) {
          best_loss = loss;
          best = m;
        }
      }
    }
    return best;
  }

  const LinearModel slr = fit_slr(data);
  LinearModel irls = slr;
  std::vector<double> w(n);
  for (int iter = 0; iter < 100; ++iter) {
    double sw = 0.0, swx = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = data.ranks[i] - predict(irls, data.keys[i]);
      w[i] = 1.0 / std::max(std::fabs(e), 1e-8);
      sw += w[i];
      swx += w[i] * data.keys[i];
      swy += w[i] * data.ranks[i];
    }
    const double mx = swx / sw, my = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = data.keys[i] - mx;
      sxx += w[i] * dx * dx;
      sxy += w[i] * dx * (data.ranks[i] - my);
    }
    if (!(sxx > 0.0)) break;
    const double a = sxy / sxx;
    irls = {a, my - a * mx};
  }

  // Two-point polish over the 32 best-fitting anchors.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> abs_res(n);
  for (std::size_t i = 0; i < n; ++i) {
    abs_res[i] = std::fabs(data.ranks[i] - predict(irls, data.keys[i]));
  }
  const std::size_t anchors = std::min<std::size_t>(32, n);
  std::partial_sort(order.begin(), order.begin() + anchors, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return abs_res[a] < abs_res[b] || (abs_res[a] == abs_res[b] && a < b);
                    });

  LinearModel best = slr;
  double best_loss = mean_abs(data, slr);
  if (const double l = mean_abs(data, irls); l < best_loss) {
    best_loss = l;
    best = irls;
  }
  for (std::size_t p = 0; p < anchors; ++p) {
    for (std::size_t q = p + 1; q < anchors; ++q) {
      const std::size_t i = std::min(order[p], order[q]);
      const std::size_t j = std::max(order[p], order[q]);
      if (data.keys[i] == data.keys[j]) continue;
      const auto m = line_through(data.keys[i], data.ranks[i], data.keys[j], data.ranks[j]);
      if (const double l = mean_abs(data, m); l < best_loss) {
        best_loss = l;
        best = m;
      }
    }
  }
  return best;
}

namespace {

// Minimizer of a log-residual loss (LogTE or DLogTE).
class LogLossFitter {
 public:
  LogLossFitter(PairsView data, LossKind kind) : data_(data), kind_(kind) {
    const auto sums = simd::kernels().pair_sums(data.keys, data.ranks);
    center_ = sums.sum_x / static_cast<double>(data.size());
    const auto [lo, hi] = std::minmax_element(data.keys.begin(), data.keys.end());
    key_span_ = *hi - *lo;
    const auto [rlo, rhi] = std::minmax_element(data.ranks.begin(), data.ranks.end());
    rank_span_ = std::max(1.0, *rhi - *rlo);
  }

  LinearModel run() {
    std::vector<LinearModel> starts{fit_slr(data_)};
    try {
      starts.push_back(fit_2p(data_));
    } catch (const DegenerateFitError&) {
    }

    LinearModel best = starts.front();
    double best_loss = loss(best);
    for (const auto& s : starts) {
      const auto [m, l] = coordinate_descent(s);
      if (l < best_loss) {
        best = m;
        best_loss = l;
      }
    }
    const auto [vm, vl] = vertex_polish(best);
    if (vl < best_loss) {
      best = vm;
      best_loss = vl;
    }
    return best;
  }

 private:
  double loss(const LinearModel& m) const { return eval_loss(m, data_, kind_); }

  // Parameterized as (slope, value at the key mean) to decorrelate the axes.
  LinearModel from_centered(double slope, double center_value) const {
    return {slope, center_value - slope * center_};
  }

  template <typename F>
  static double golden_section(F&& f, double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = f(x2);
      }
    }
    return f1 <= f2 ? x1 : x2;
  }

  std::pair<LinearModel, double> coordinate_descent(const LinearModel& start) const {
    double a = start.slope;
    double c = start.slope * center_ + start.intercept;
    double cur = loss(from_centered(a, c));
    const double slope_scale = rank_span_ / std::max(key_span_, 1.0);
    double wa = 0.25 * slope_scale;
    double wc = 0.05 * rank_span_;

    for (int sweep = 0; sweep < 200; ++sweep) {
      const double a0 = a, c0 = c;

      const double ta = std::max(1e-9 * std::max(std::fabs(a), slope_scale), 1e-300);
      const double na = golden_section(
          [&](double v) { return loss(from_centered(v, c)); }, a - wa, a + wa, ta);
      if (const double l = loss(from_centered(na, c)); l < cur) {
        cur = l;
        a = na;
      }

      const double tc = 1e-9 * std::max(std::fabs(c), 1.0);
      const double nc = golden_section(
          [&](double v) { return loss(from_centered(a, v)); }, c - wc, c + wc, tc);
      if (const double l = loss(from_centered(a, nc)); l < cur) {
        cur = l;
        c = nc;
      }

      const bool moved_a = std::fabs(a - a0) > ta;
      const bool moved_c = std::fabs(c - c0) > tc;
      wa = moved_a ? std::max(wa, 2.0 * std::fabs(a - a0)) : 0.5 * wa;
      wc = moved_c ? std::max(wc, 2.0 * std::fabs(c - c0)) : 0.5 * wc;
      if (!moved_a && !moved_c && wa < ta && wc < tc) break;
    }
    return {from_centered(a, c), cur};
  }

  // A line is pinned by two constraints "residual of point i equals offset".
  struct Constraint {
    std::size_t index;
    double offset;
  };

  LinearModel line_for(const Constraint& p, const Constraint& q) const {
    return line_through(data_.keys[p.index], data_.ranks[p.index] - p.offset,
                        data_.keys[q.index], data_.ranks[q.index] - q.offset);
  }

  // Residual values where the per-point loss is at a kink or step: zero for
  // LogTE; zero and +-(2^k - 1) for DLogTE.
  std::vector<double> offsets_up_to(double max_abs) const {
    std::vector<double> out{0.0};
    if (kind_ != LossKind::dlogte) return out;
    for (double t = 1.0; t <= std::max(1.0, 2.0 * max_abs); t = 2.0 * t + 1.0) {
      out.push_back(t);
      out.push_back(-t);
    }
    return out;
  }

  // Best line through `pivot` and any other constraint.
  std::pair<Constraint, double> best_partner(const Constraint& pivot,
                                             const std::vector<double>& offsets,
                                             double& best_loss,
                                             LinearModel& best_model) const {
    Constraint partner{pivot.index, 0.0};
    double found = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < data_.size(); ++j) {
      if (data_.keys[j] == data_.keys[pivot.index]) continue;
      for (double off : offsets) {
        const Constraint q{j, off};
        const auto m = line_for(pivot, q);
        const double l = loss(m);
        if (l < found) {
          found = l;
          partner = q;
        }
        if (l < best_loss) {
          best_loss = l;
          best_model = m;
        }
      }
    }
    return {partner, found};
  }

  std::pair<LinearModel, double> vertex_polish(const LinearModel& start) const {
    const std::size_t n = data_.size();
    LinearModel best = start;
    double best_loss = loss(start);
    const auto r = simd::kernels().residual_sums(data_.keys, data_.ranks, start.slope,
                                                 start.intercept);
    const auto offsets = offsets_up_to(r.max_abs);

    // Seeds: constraints nearest to being active under the start model.
    std::vector<std::pair<double, Constraint>> near;
    near.reserve(n * offsets.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double e = data_.ranks[i] - predict(start, data_.keys[i]);
      for (double off : offsets) near.push_back({std::fabs(e - off), {i, off}});
    }
    const std::size_t seeds = std::min<std::size_t>(4, near.size());
    std::partial_sort(near.begin(), near.begin() + seeds, near.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first < b.first;
                        if (a.second.index != b.second.index) return a.second.index < b.second.index;
                        return a.second.offset < b.second.offset;
                      });

    double walk_loss = std::numeric_limits<double>::infinity();
    Constraint p{}, q{};
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto [partner, l] = best_partner(near[s].second, offsets, best_loss, best);
      if (l < walk_loss) {
        walk_loss = l;
        p = near[s].second;
        q = partner;
      }
    }
    if (!std::isfinite(walk_loss)) return {best, best_loss};

    // Pivot walk along the vertices adjacent to the current one. q is always
    // p's best partner, so only q needs a fresh scan.
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pq, lq] = best_partner(q, offsets, best_loss, best);
      if (!(lq < walk_loss)) break;
      walk_loss = lq;
      p = q;
      q = pq;
    }
    return {best, best_loss};
  }

  PairsView data_;
  LossKind kind_;
  double center_ = 0.0;
  double key_span_ = 0.0;
  double rank_span_ = 1.0;
};

}  // namespace

LinearModel fit_logte(PairsView data) {
  require_two_distinct(data, "fit_logte");
  return LogLossFitter(data, LossKind::logte).run();
}

LinearModel fit_dlogte(PairsView data) {
  require_two_distinct(data, "fit_dlogte");
  return LogLossFitter(data, LossKind::dlogte).run();
}

LinearModel fit(Fitter f, PairsView data) {
  switch (f) {
    case Fitter::slr: return fit_slr(data);
    case Fitter::lad: return fit_lad(data);
    case Fitter::theilsen: return fit_theilsen(data);
    case Fitter::two_point: return fit_2p(data);
    case Fitter::logte: return fit_logte(data);
    case Fitter::dlogte: return fit_dlogte(data);
  }
  throw ConfigError("unknown fitter");
}

}  // namespace lis
