#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "lis/error.hpp"
#include "lis/poisoning.hpp"
#include "lis/simd.hpp"
#include "oracles.hpp"

using namespace lis;

namespace {

std::vector<Key> to_vec(std::span<const Key> s) { return {s.begin(), s.end()}; }

bool close_rel(long double got, long double want, long double rel = 1e-6L) {
  return std::fabs(got - want) <= rel * std::fabs(want) + 1e-9L;
}

}  // namespace

TEST_CASE("candidate_keys: gap endpoints") {
  const RankedKeySet s({10, 20}, 30);
  CHECK(candidate_keys(s, CandidateStrategy::gap_endpoints) == std::vector<Key>{0, 9, 11, 19, 21, 29});
}

TEST_CASE("candidate_keys: midpoints extend the endpoints") {
  const RankedKeySet s({10, 20}, 30);
  const auto plus = candidate_keys(s, CandidateStrategy::gap_endpoints_plus_midpoint);
  CHECK(plus == std::vector<Key>{0, 4, 9, 11, 15, 19, 21, 25, 29});
  // One- and two-key gaps have no interior midpoint.
  const RankedKeySet tight({1, 3, 6}, 7);
  CHECK(candidate_keys(tight, CandidateStrategy::gap_endpoints_plus_midpoint) ==
        std::vector<Key>{0, 2, 4, 5});
}

TEST_CASE("candidate_keys: dense is the complement") {
  const RankedKeySet s({10, 20}, 30);
  const auto dense = candidate_keys(s, CandidateStrategy::dense);
  CHECK(dense.size() == 28);
  CHECK(std::find(dense.begin(), dense.end(), Key{10}) == dense.end());
  CHECK(std::is_sorted(dense.begin(), dense.end()));
}

TEST_CASE("candidate_keys: full universe has none") {
  std::vector<Key> all(16);
  for (Key i = 0; i < 16; ++i) all[i] = i;
  const RankedKeySet s(all, 16);
  for (auto st : {CandidateStrategy::gap_endpoints, CandidateStrategy::gap_endpoints_plus_midpoint,
                  CandidateStrategy::dense}) {
    CHECK(candidate_keys(s, st).empty());
  }
}

TEST_CASE("candidate_keys: random sets give valid, absent, unique keys") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    const auto keys = oracle::random_keys(rng, 1 + rep * 3, 4096);
    const RankedKeySet s(keys, 4096);
    const std::set<Key> present(keys.begin(), keys.end());
    const auto ends = candidate_keys(s, CandidateStrategy::gap_endpoints);
    const auto plus = candidate_keys(s, CandidateStrategy::gap_endpoints_plus_midpoint);
    for (const auto& c : {ends, plus}) {
      CHECK(std::adjacent_find(c.begin(), c.end(), std::greater_equal<>()) == c.end());
      for (Key k : c) {
        CHECK(k < 4096);
        CHECK(present.count(k) == 0);
      }
    }
    CHECK(std::includes(plus.begin(), plus.end(), ends.begin(), ends.end()));
    CHECK(candidate_keys(s, CandidateStrategy::dense).size() == 4096 - keys.size());
  }
}

TEST_CASE("candidate_keys: dense refuses huge universes") {
  const RankedKeySet s({1, 2}, kDenseUniverseLimit + 1);
  CHECK_THROWS_AS(candidate_keys(s, CandidateStrategy::dense), ConfigError);
  const RankedKeySet ok({1, 2}, kDenseUniverseLimit);
  CHECK(candidate_keys(ok, CandidateStrategy::dense).size() == kDenseUniverseLimit - 2);
}

TEST_CASE("strategy names") {
  for (auto s : {CandidateStrategy::gap_endpoints, CandidateStrategy::gap_endpoints_plus_midpoint,
                 CandidateStrategy::dense}) {
    CHECK(parse_candidate_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_candidate_strategy("random"), ConfigError);
}

TEST_CASE("budget is the ceiling of alpha times n") {
  PoisonConfig c;
  c.alpha = 0.20;
  CHECK(c.budget(1000) == 200);
  c.alpha = 0.0001;
  CHECK(c.budget(1000) == 1);
  c.alpha = 0.07;
  CHECK(c.budget(100) == 7);
  c.alpha = 0.015;
  CHECK(c.budget(100) == 2);
  c.alpha = 0.0;
  CHECK(c.budget(1000) == 0);
  c.lambda = 3;
  CHECK(c.budget(1000) == 3);
  PoisonConfig bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.budget(10), ConfigError);
}

TEST_CASE("augmented_mse: extending a contiguous run keeps zero loss") {
  std::vector<Key> keys(10);
  for (Key i = 0; i < 10; ++i) keys[i] = i;
  const AugmentedStats st(RankedKeySet(keys, 100));
  CHECK(st.mse() == doctest::Approx(0.0));
  CHECK(augmented_mse(st, 10) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("augmented_mse: small example equals a refit") {
  const AugmentedStats st(RankedKeySet({10, 20, 30}, 100));
  const auto want = oracle::refit_mse({10, 20, 30, 31});
  CHECK(close_rel(augmented_mse(st, 31), want));
  CHECK_THROWS_AS(augmented_mse(st, 20), PreconditionError);
}

TEST_CASE("augmented_mse agrees with refits on random sets") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const Key universe = rep % 2 ? Key{1} << 30 : 5000;
    const auto keys = oracle::random_keys(rng, 100, universe);
    const AugmentedStats st(RankedKeySet(keys, universe));
    CHECK(close_rel(st.mse(), oracle::refit_mse(keys)));
    const std::set<Key> present(keys.begin(), keys.end());
    int probes = 0;
    while (probes < 50) {
      const Key c = std::uniform_int_distribution<Key>(0, universe - 1)(rng);
      if (present.count(c)) continue;
      ++probes;
      CHECK(close_rel(augmented_mse(st, c), oracle::refit_mse(oracle::with_inserted(keys, c))));
    }
  }
}

TEST_CASE("AugmentedStats: sums track inserts") {
  std::mt19937_64 rng(22);
  auto keys = oracle::random_keys(rng, 40, 10000);
  AugmentedStats st(RankedKeySet(keys, 10000));
  const std::size_t n0 = keys.size();
  for (int step = 0; step < 25; ++step) {
    Key c;
    do c = std::uniform_int_distribution<Key>(0, 9999)(rng);
    while (std::binary_search(keys.begin(), keys.end(), c));
    CHECK(st.insertion_rank(c) ==
          static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), c) - keys.begin()) + 1);
    st.insert(c);
    keys = oracle::with_inserted(keys, c);
    REQUIRE(to_vec(st.keys()) == keys);

    long double sk = 0, skk = 0, skr = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const long double k = keys[i] - static_cast<long double>(st.origin());
      sk += k;
      skk += k * k;
      skr += k * (i + 1);
    }
    CHECK(close_rel(st.sum_k(), sk));
    CHECK(close_rel(st.sum_kk(), skk));
    CHECK(close_rel(st.sum_kr(), skr));
    const double N = static_cast<double>(keys.size());
    CHECK(st.sum_r() == N * (N + 1) / 2);
    CHECK(st.sum_rr() == N * (N + 1) * (2 * N + 1) / 6);
    CHECK(close_rel(st.mse(), oracle::refit_mse(keys)));
    long double tail = 0;
    for (std::size_t j = keys.size(); j-- > 0;) {
      tail += keys[j] - static_cast<long double>(st.origin());
      CHECK(close_rel(st.suffix_sum(j + 1), tail));
    }
    CHECK(st.suffix_sum(keys.size() + 1) == 0.0);
  }
  CHECK(st.count() == n0 + 25);
  CHECK_THROWS_AS(st.insert(keys.front()), PreconditionError);
  CHECK_THROWS_AS(st.insert(10000), PreconditionError);
}

TEST_CASE("greedy_poison: zero budget") {
  const auto s = generate(DatasetSpec{});
  PoisonConfig c;
  c.alpha = 0.0;
  const auto r = greedy_poison(s, c);
  CHECK(r.poison_keys.empty());
  CHECK(r.loss_trace.empty());
  CHECK(r.final_loss == r.clean_loss);
  CHECK_FALSE(r.truncated);
}

TEST_CASE("greedy_poison: each step is the exhaustive argmax") {
  const RankedKeySet s({10, 20, 30}, 60);
  PoisonConfig c;
  c.lambda = 2;
  c.strategy = CandidateStrategy::dense;
  const auto r = greedy_poison(s, c);
  REQUIRE(r.poison_keys.size() == 2);
  std::vector<Key> cur{10, 20, 30};
  for (std::size_t step = 0; step < 2; ++step) {
    const auto o = oracle::exhaustive_step(cur, 60);
    CHECK(r.poison_keys[step] == o.key);
    CHECK(close_rel(r.loss_trace[step], o.loss));
    cur = oracle::with_inserted(cur, r.poison_keys[step]);
  }
}

TEST_CASE("greedy_poison: randomized exhaustive oracle") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 8; ++rep) {
    const Key universe = 64 + rep * 97;
    auto keys = oracle::random_keys(rng, 5 + rep * 4, universe);
    PoisonConfig c;
    c.lambda = 4;
    c.strategy = CandidateStrategy::dense;
    const auto r = greedy_poison(RankedKeySet(keys, universe), c);
    REQUIRE(r.poison_keys.size() == 4);
    for (Key p : r.poison_keys) {
      const auto o = oracle::exhaustive_step(keys, universe);
      const long double got = oracle::refit_mse(oracle::with_inserted(keys, p));
      CAPTURE(rep);
      CHECK(close_rel(got, o.loss, 1e-9L));
      CHECK(p <= o.key);  // never passes over a smaller maximizer
      keys = oracle::with_inserted(keys, p);
    }
  }
}

TEST_CASE("greedy_poison: default attack raises the loss") {
  const auto s = generate(DatasetSpec{});
  PoisonConfig c10, c20;
  c10.alpha = 0.10;
  c20.alpha = 0.20;
  const auto r10 = greedy_poison(s, c10);
  const auto r20 = greedy_poison(s, c20);
  CHECK(r20.poison_keys.size() == 200);
  CHECK(r20.loss_trace.size() == 200);
  CHECK(r20.final_loss > r20.clean_loss);
  CHECK(r20.final_loss >= r10.final_loss);
  CHECK(r10.final_loss >= r10.clean_loss);
  // The smaller budget is a prefix of the same greedy run.
  CHECK(std::equal(r10.poison_keys.begin(), r10.poison_keys.end(), r20.poison_keys.begin()));

  const std::set<Key> legit(s.keys().begin(), s.keys().end());
  std::set<Key> seen;
  for (Key p : r20.poison_keys) {
    CHECK(legit.count(p) == 0);
    CHECK(seen.insert(p).second);
    CHECK(p < s.universe_max());
  }
  const auto merged = poison_dataset(s, r20);
  CHECK(close_rel(r20.final_loss, oracle::refit_mse(to_vec(merged.keys()))));
}

TEST_CASE("greedy_poison: deterministic and backend independent") {
  const auto s = generate(DatasetSpec{300, Distribution::lognormal, 5, Key{1} << 30});
  PoisonConfig c;
  c.alpha = 0.1;
  const auto a = greedy_poison(s, c);
  CHECK(greedy_poison(s, c).poison_keys == a.poison_keys);

  const auto before = simd::kernels().backend;
  for (auto b : simd::available_backends()) {
    simd::select_backend(b);
    const auto r = greedy_poison(s, c);
    CAPTURE(simd::to_string(b));
    CHECK(r.poison_keys == a.poison_keys);
    CHECK(r.loss_trace == a.loss_trace);
  }
  simd::select_backend(before);
}

TEST_CASE("greedy_poison: truncates when candidates run out") {
  const RankedKeySet s({0, 1, 2, 4}, 6);
  PoisonConfig c;
  c.lambda = 5;
  const auto r = greedy_poison(s, c);
  CHECK(r.truncated);
  CHECK(r.poison_keys.size() == 2);
  CHECK(r.loss_trace.size() == 2);
}

TEST_CASE("poison_dataset") {
  const RankedKeySet s({10, 30}, 100);
  const std::vector<Key> p{20};
  const auto m = poison_dataset(s, p);
  CHECK(to_vec(m.keys()) == std::vector<Key>{10, 20, 30});
  CHECK(rank_of(m, 20) == 2);
  CHECK(poison_dataset(s, std::span<const Key>{}) == s);
  const std::vector<Key> clash{30};
  CHECK_THROWS_AS(poison_dataset(s, clash), InvariantError);
  const std::vector<Key> twice{5, 5};
  CHECK_THROWS_AS(poison_dataset(s, twice), InvariantError);
}
