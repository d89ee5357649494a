#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "lis/error.hpp"
#include "lis/indexes.hpp"
#include "lis/poisoning.hpp"
#include "oracles.hpp"

using namespace lis;

namespace {

std::vector<RankedKeySet> make_sample_sets() {
  std::vector<RankedKeySet> out;
  for (auto d : {Distribution::uniform, Distribution::lognormal, Distribution::clustered}) {
    for (std::size_t n : {2u, 17u, 1000u, 5000u}) {
      out.push_back(generate(DatasetSpec{n, d, 11, Key{1} << 30}));
    }
  }
  const auto clean = generate(DatasetSpec{});
  PoisonConfig pc;
  pc.alpha = 0.2;
  out.push_back(poison_dataset(clean, greedy_poison(clean, pc)));
  std::vector<Key> run(1000);
  for (Key i = 0; i < 1000; ++i) run[i] = i;
  out.emplace_back(run, 1000);
  out.emplace_back(std::vector<Key>{42}, 100);
  return out;
}

const std::vector<RankedKeySet>& sample_sets() {
  static const auto sets = make_sample_sets();
  return sets;
}

// The log-loss fitters dominate build time on the larger sets; several
// cases share these builds.
const RegressionIndex& cached_regression(const RankedKeySet& s, Fitter f) {
  static std::map<std::pair<const RankedKeySet*, Fitter>, RegressionIndex> cache;
  const auto key = std::make_pair(&s, f);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_regression_index(s, f)).first;
  return it->second;
}

// Absent probe keys: gaps between stored keys plus both ends.
std::vector<Key> absent_keys(const RankedKeySet& s) {
  std::vector<Key> out;
  if (s.min_key() > 0) out.push_back(s.min_key() - 1);
  out.push_back(0);
  for (std::size_t i = 1; i < s.size(); i += 7) {
    if (s[i] - s[i - 1] > 1) out.push_back(s[i - 1] + (s[i] - s[i - 1]) / 2);
  }
  out.push_back(s.max_key() + 1);
  out.push_back(~Key{0});
  std::vector<Key> filtered;
  for (Key k : out) {
    if (!s.contains(k)) filtered.push_back(k);
  }
  return filtered;
}

void check_exhaustive(const AnyIndex& idx, const RankedKeySet& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = lookup(idx, s[i]);
    REQUIRE(r.rank.has_value());
    REQUIRE(*r.rank == i + 1);
  }
  for (Key k : absent_keys(s)) {
    CAPTURE(k);
    CHECK_FALSE(lookup(idx, k).found());
  }
}

}  // namespace

TEST_CASE("every index answers every stored key with its rank") {
  for (const auto& s : sample_sets()) {
    for (auto name : index_names()) {
      CAPTURE(name);
      CAPTURE(s.size());
      if (name == "alex" || name == "pgm") {
        check_exhaustive(build_index(name, s), s);
      } else {
        check_exhaustive(AnyIndex{cached_regression(s, parse_fitter(name))}, s);
      }
    }
  }
}

TEST_CASE("regression index: error bound and probe bound") {
  for (const auto& s : sample_sets()) {
    if (s.size() < 2) continue;
    for (Fitter f : {Fitter::slr, Fitter::lad, Fitter::theilsen, Fitter::two_point, Fitter::logte,
                     Fitter::dlogte}) {
      const auto& idx = cached_regression(s, f);
      const double err = static_cast<double>(idx.max_abs_error());
      double worst = 0;
      const std::size_t bound =
          static_cast<std::size_t>(std::ceil(std::log2(2.0 * err + 2.0))) + 1;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double e = std::fabs(predict(idx.model(), static_cast<double>(s[i])) - (i + 1.0));
        worst = std::max(worst, e);
        REQUIRE(regression_lookup(idx, s[i]).probes <= bound);
      }
      CHECK(worst <= err);
      CHECK(err < worst + 1.0);
    }
  }
}

TEST_CASE("regression index: exact CDF needs a single probe") {
  std::vector<Key> run(1000);
  for (Key i = 0; i < 1000; ++i) run[i] = i;
  const RankedKeySet s(run, 1000);
  const auto idx = build_regression_index(s, Fitter::slr);
  CHECK(idx.max_abs_error() == 0);
  for (Key k : run) CHECK(regression_lookup(idx, k).probes <= 1);
}

TEST_CASE("regression index: SLR and LogTE both build on the default keyset") {
  const auto s = generate(DatasetSpec{});
  for (Fitter f : {Fitter::slr, Fitter::logte}) {
    const auto idx = build_regression_index(s, f);
    CHECK(idx.model().finite());
    CHECK(idx.max_abs_error() < s.size());
  }
}

TEST_CASE("regression index: poisoning costs SLR probes") {
  const auto s = generate(DatasetSpec{});
  PoisonConfig pc;
  pc.alpha = 0.2;
  const auto p = poison_dataset(s, greedy_poison(s, pc));
  const auto clean = build_regression_index(s, Fitter::slr);
  const auto pois = build_regression_index(p, Fitter::slr);
  double cp = 0, pp = 0;
  for (Key k : s.keys()) {
    cp += regression_lookup(clean, k).probes;
    pp += regression_lookup(pois, k).probes;
  }
  CHECK(pp > cp);
}

TEST_CASE("PGM: epsilon guarantee, window and segment order") {
  for (const auto& s : sample_sets()) {
    for (std::size_t eps : {1u, 4u, 16u, 64u}) {
      const auto idx = build_pgm(s, eps);
      const auto segs = idx.segments();
      REQUIRE(!segs.empty());
      CHECK(segs.front().first_key == s.min_key());
      for (std::size_t i = 1; i < segs.size(); ++i) CHECK(segs[i - 1].first_key < segs[i].first_key);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& seg = segs[idx.segment_for(s[i])];
        REQUIRE(std::fabs(seg.predict_rank(s[i]) - (i + 1.0)) <= static_cast<double>(eps));
        CHECK(seg.start_rank == static_cast<Rank>(seg.model.intercept));
      }
      // Window of 2 eps + 1 ranks: at most ceil(log2(2 eps + 2)) probes
      // inside it, plus the segment search.
      const std::size_t seg_bound =
          segs.size() == 1 ? 0 : static_cast<std::size_t>(std::ceil(std::log2(segs.size()))) + 1;
      const std::size_t win_bound =
          static_cast<std::size_t>(std::ceil(std::log2(2.0 * eps + 2.0)));
      for (Key k : s.keys()) REQUIRE(pgm_lookup(idx, k).probes <= seg_bound + win_bound);
    }
  }
}

TEST_CASE("PGM: segments are maximal") {
  for (const auto& s : sample_sets()) {
    const std::size_t eps = 4;
    const auto idx = build_pgm(s, eps);
    const auto segs = idx.segments();
    const long double e = eps - 1e-7L;
    for (std::size_t t = 0; t + 1 < segs.size(); ++t) {
      // Slope cone of the segment extended by the next segment's first key.
      const std::size_t first = segs[t].start_rank - 1;
      const std::size_t stop = segs[t + 1].start_rank - 1;
      long double lo = -INFINITY, hi = INFINITY;
      for (std::size_t i = first + 1; i <= stop; ++i) {
        const long double dx = static_cast<long double>(s[i]) - s[first];
        const long double dy = static_cast<long double>(i) - first;
        lo = std::max(lo, (dy - e) / dx);
        hi = std::min(hi, (dy + e) / dx);
      }
      CHECK(lo > hi);
    }
  }
}

TEST_CASE("PGM: hand examples") {
  std::vector<Key> run(1000);
  for (Key i = 0; i < 1000; ++i) run[i] = i;
  const auto one = build_pgm(RankedKeySet(run, 1000), 4);
  CHECK(one.segments().size() == 1);
  // No segment search; an exact prediction is hit by the first window probe
  // unless the window is cut by an end of the array.
  for (Key k : run) {
    const auto probes = pgm_lookup(one, k).probes;
    CHECK(probes <= 4);
    if (k >= 4 && k + 4 < 1000) CHECK(probes == 1);
  }

  std::vector<Key> plateaus;
  for (Key i = 0; i < 32; ++i) plateaus.push_back(i);
  for (Key i = 10000; i < 10032; ++i) plateaus.push_back(i);
  const RankedKeySet ps(plateaus, 20000);
  CHECK(build_pgm(ps, 1).segments().size() >= 2);
  // Independent check that no single line fits both plateaus within 1.
  const auto slr = fit_slr(RankedPairs::from_keyset(ps));
  CHECK(eval_loss(slr, RankedPairs::from_keyset(ps), LossKind::max_abs) > 1.0);

  CHECK_THROWS_AS(build_pgm(ps, 0), ConfigError);
}

TEST_CASE("ALEX: slot invariants") {
  for (const auto& s : sample_sets()) {
    for (double density : {0.51, 0.7, 1.0}) {
      const auto idx = build_alex(s, density);
      CHECK(idx.slot_count() >= static_cast<std::size_t>(std::ceil(s.size() / density)));
      std::size_t occupied = 0;
      std::optional<Key> prev;
      for (std::size_t slot = 0; slot < idx.slot_count(); ++slot) {
        const auto k = idx.slot(slot);
        if (!k) {
          CHECK_FALSE(idx.rank_of_slot(slot).has_value());
          continue;
        }
        if (prev) REQUIRE(*prev < *k);
        prev = k;
        ++occupied;
        REQUIRE(idx.rank_of_slot(slot) == rank_of(s, *k));
      }
      CHECK(occupied == s.size());
    }
  }
}

TEST_CASE("ALEX: contiguous keys at density 1 sit at their model slot") {
  std::vector<Key> run(500);
  for (Key i = 0; i < 500; ++i) run[i] = 1000 + i;
  const RankedKeySet s(run, 5000);
  const auto idx = build_alex(s, 1.0);
  CHECK(idx.slot_count() == 500);
  for (std::size_t i = 0; i < run.size(); ++i) {
    CHECK(idx.predicted_slot(run[i]) == i);
    CHECK(idx.slot(i) == run[i]);
    CHECK(alex_lookup(idx, run[i]).probes <= 2);
  }
}

TEST_CASE("ALEX: keys at their predicted slot cost at most two probes") {
  const auto s = generate(DatasetSpec{2000, Distribution::uniform, 3, Key{1} << 30});
  const auto idx = build_alex(s, 0.7);
  std::size_t at_home = 0;
  for (std::size_t slot = 0; slot < idx.slot_count(); ++slot) {
    const auto k = idx.slot(slot);
    if (k && idx.predicted_slot(*k) == slot) {
      ++at_home;
      CHECK(alex_lookup(idx, *k).probes <= 2);
    }
  }
  CHECK(at_home > 0);
}

TEST_CASE("ALEX: worst-key probes within 2 log2(slots) + 4") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = static_cast<Distribution>(rep % 3);
    const auto s = generate(DatasetSpec{500 + 300 * static_cast<std::size_t>(rep), d, rng(), Key{1} << 30});
    const auto idx = build_alex(s, 0.7);
    std::size_t worst = 0;
    for (Key k : s.keys()) worst = std::max(worst, alex_lookup(idx, k).probes);
    CAPTURE(rep);
    CHECK(static_cast<double>(worst) <= 2.0 * std::log2(idx.slot_count()) + 4.0);
  }
}

TEST_CASE("ALEX: density bounds") {
  const auto s = generate(DatasetSpec{100, Distribution::uniform, 1, 1000});
  CHECK_THROWS_AS(build_alex(s, 0.5), ConfigError);
  CHECK_THROWS_AS(build_alex(s, 1.01), ConfigError);
  CHECK_NOTHROW(build_alex(s, 1.0));
}

TEST_CASE("builds are deterministic") {
  const auto s = generate(DatasetSpec{800, Distribution::lognormal, 9, Key{1} << 30});
  const auto a = build_pgm(s, 8), b = build_pgm(s, 8);
  REQUIRE(a.segments().size() == b.segments().size());
  for (std::size_t i = 0; i < a.segments().size(); ++i) {
    CHECK(a.segments()[i].first_key == b.segments()[i].first_key);
    CHECK(a.segments()[i].model == b.segments()[i].model);
  }
  const auto x = build_alex(s, 0.7), y = build_alex(s, 0.7);
  CHECK(x.slot_count() == y.slot_count());
  for (std::size_t i = 0; i < x.slot_count(); ++i) CHECK(x.slot(i) == y.slot(i));
  CHECK(build_regression_index(s, Fitter::logte).model() ==
        build_regression_index(s, Fitter::logte).model());
}

TEST_CASE("registry") {
  CHECK(index_names().size() == 8);
  CHECK(is_index_name("pgm"));
  CHECK_FALSE(is_index_name("rmi"));
  const auto s = generate(DatasetSpec{50, Distribution::uniform, 1, 1000});
  try {
    build_index("rmi", s);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (auto n : index_names()) CHECK(msg.find(std::string(n)) != std::string::npos);
  }
  IndexParams p;
  p.pgm_epsilon = 2;
  CHECK(std::get<PgmIndex>(build_index("pgm", s, p)).epsilon() == 2);
  p.alex_density = 0.9;
  CHECK(std::get<GappedArrayIndex>(build_index("alex", s, p)).density() == 0.9);
  CHECK(std::get<RegressionIndex>(build_index("2p", s, p)).fitter() == Fitter::two_point);
}
