#include "lis/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "lis/error.hpp"

namespace lis {

QueryTarget parse_query_target(std::string_view name) {
  if (name == "clean-keys") return QueryTarget::clean_keys;
  if (name == "poisoned-keys-union") return QueryTarget::poisoned_union;
  throw ConfigError("unknown query target '" + std::string(name) +
                    "' (expected clean-keys or poisoned-keys-union)");
}

std::string_view to_string(QueryTarget t) {
  return t == QueryTarget::clean_keys ? "clean-keys" : "poisoned-keys-union";
}

std::string_view to_string(DatasetTag t) {
  return t == DatasetTag::clean ? "clean" : "poisoned";
}

DatasetTag parse_dataset_tag(std::string_view name) {
  if (name == "clean") return DatasetTag::clean;
  if (name == "poisoned") return DatasetTag::poisoned;
  throw FormatError("unknown dataset tag '" + std::string(name) + "'");
}

void WorkloadSpec::validate() const {
  if (query_count < 1) throw ConfigError("query count must be at least 1");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
}

std::vector<Key> draw_queries(std::span<const Key> pool, const WorkloadSpec& spec) {
  spec.validate();
  if (pool.empty()) throw PreconditionError("cannot draw queries from an empty pool");
  std::mt19937_64 rng(spec.seed);
  std::vector<Key> out(spec.query_count);
  for (auto& q : out) q = pool[detail::uniform_below(rng, pool.size())];
  return out;
}

namespace {

double nearest_rank_percentile(std::vector<double> v, double pct) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

template <typename Index>
BenchRecord measure(const Index& index, const RankedKeySet& set, std::span<const Key> queries,
                    const WorkloadSpec& spec) {
  std::vector<Rank> expected(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) expected[i] = rank_of(set, queries[i]);

  // Correctness pass doubles as warm-up; probe counts are deterministic, so
  // one pass gives the exact mean.
  std::size_t probes = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto r = index.lookup(queries[i]);
    if (!r.rank || *r.rank != expected[i]) {
      throw InvariantError("lookup of key " + std::to_string(queries[i]) + " returned " +
                           (r.rank ? "rank " + std::to_string(*r.rank) : std::string("not-found")) +
                           ", expected rank " + std::to_string(expected[i]));
    }
    probes += r.probes;
  }

  using clock = std::chrono::steady_clock;
  std::vector<double> per_pass(spec.repetitions);
  double total_ns = 0.0;
  std::size_t sink = 0;
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    const auto t0 = clock::now();
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto r = index.lookup(queries[i]);
      sink += r.rank.value_or(0);
    }
    const auto t1 = clock::now();
    const double ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
    total_ns += ns;
    per_pass[rep] = ns / static_cast<double>(queries.size());
  }
  // Every pass returns the same ranks; a mismatch means the index mutated.
  std::size_t expected_sink = 0;
  for (Rank r : expected) expected_sink += r;
  if (sink != expected_sink * spec.repetitions) {
    throw InvariantError("lookup results changed between passes");
  }

  BenchRecord rec;
  rec.mean_lookup_ns = total_ns / static_cast<double>(queries.size() * spec.repetitions);
  rec.p50_lookup_ns = nearest_rank_percentile(per_pass, 50.0);
  rec.p99_lookup_ns = nearest_rank_percentile(per_pass, 99.0);
  rec.mean_probes = static_cast<double>(probes) / static_cast<double>(queries.size());
  return rec;
}

}  // namespace

BenchRecord run_workload(const AnyIndex& index, const RankedKeySet& set,
                         std::span<const Key> queries, const WorkloadSpec& spec) {
  spec.validate();
  if (queries.empty()) throw PreconditionError("empty query sequence");
  return std::visit([&](const auto& idx) { return measure(idx, set, queries, spec); }, index);
}

BenchRecord run_workload(const AnyIndex& index, const RankedKeySet& set,
                         const WorkloadSpec& spec) {
  const auto queries = draw_queries(set.keys(), spec);
  return run_workload(index, set, queries, spec);
}

DeteriorationRow deterioration(const BenchRecord& clean, const BenchRecord& poisoned) {
  if (clean.index_name != poisoned.index_name) {
    throw PreconditionError("deterioration of mismatched indexes '" + clean.index_name +
                            "' and '" + poisoned.index_name + "'");
  }
  if (!(clean.mean_lookup_ns > 0.0) || !(clean.mean_probes > 0.0)) {
    throw Error("deterioration for '" + clean.index_name +
                "': clean record has a zero mean (empty or degenerate workload)");
  }
  return {clean.index_name, poisoned.alpha, poisoned.mean_lookup_ns / clean.mean_lookup_ns,
          poisoned.mean_probes / clean.mean_probes};
}

void SweepConfig::validate() const {
  if (alphas.empty()) throw ConfigError("alpha sweep is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] >= 0.0 && alphas[i] <= 0.5)) {
      throw ConfigError("alpha " + format_number(alphas[i]) + " outside [0, 0.5]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (alphas[j] == alphas[i]) throw ConfigError("duplicate alpha " + format_number(alphas[i]));
    }
  }
  validate_measurement();
}

void SweepConfig::validate_measurement() const {
  if (indexes.empty()) throw ConfigError("no indexes selected");
  for (const auto& name : indexes) {
    if (!is_index_name(name)) {
      std::string valid;
      for (auto n : index_names()) valid += (valid.empty() ? "" : ", ") + std::string(n);
      throw ConfigError("unknown index '" + name + "'; valid names: " + valid);
    }
  }
  workload.validate();
}

namespace {

struct Built {
  AnyIndex index;
  double build_ms;
};

Built timed_build(const std::string& name, const RankedKeySet& set, const IndexParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  auto idx = build_index(name, set, params);
  const auto t1 = std::chrono::steady_clock::now();
  return {std::move(idx), std::chrono::duration<double, std::milli>(t1 - t0).count()};
}

void measure_alpha(const RankedKeySet& clean, double alpha, std::span<const Key> poison_keys,
                   const SweepConfig& config, SweepResult& out) {
  const auto emit = [&](BenchRecord r) {
    if (config.on_record) config.on_record(r);
    out.records.push_back(std::move(r));
  };
  const bool identical = poison_keys.empty();
  const RankedKeySet poisoned = identical ? clean : poison_dataset(clean, poison_keys);

  // Clean runs always query legitimate keys; poisoned runs query the same
  // sequence unless the union target is selected.
  const auto clean_queries = draw_queries(clean.keys(), config.workload);
  const auto poisoned_queries = config.workload.target == QueryTarget::clean_keys
                                    ? clean_queries
                                    : draw_queries(poisoned.keys(), config.workload);

  for (const auto& name : config.indexes) {
    auto [clean_idx, clean_ms] = timed_build(name, clean, config.params);
    BenchRecord c = run_workload(clean_idx, clean, clean_queries, config.workload);
    c.index_name = name;
    c.alpha = alpha;
    c.dataset = DatasetTag::clean;
    c.build_ms = clean_ms;

    BenchRecord p;
    if (identical) {
      p = c;
    } else {
      auto [pois_idx, pois_ms] = timed_build(name, poisoned, config.params);
      p = run_workload(pois_idx, poisoned, poisoned_queries, config.workload);
      p.index_name = name;
      p.alpha = alpha;
      p.build_ms = pois_ms;
    }
    p.dataset = DatasetTag::poisoned;
    out.ratios.push_back(deterioration(c, p));
    emit(std::move(c));
    emit(std::move(p));
  }
}

}  // namespace

SweepResult experiment_sweep(const RankedKeySet& clean, const SweepConfig& config) {
  config.validate();
  SweepResult out;
  for (double alpha : config.alphas) {
    PoisonConfig pc;
    pc.alpha = alpha;
    pc.strategy = config.strategy;
    out.attacks.push_back({alpha, greedy_poison(clean, pc)});
    measure_alpha(clean, alpha, out.attacks.back().result.poison_keys, config, out);
  }
  return out;
}

SweepResult bench_poison_sets(const RankedKeySet& clean, std::span<const PoisonSet> sets,
                              const SweepConfig& config) {
  config.validate_measurement();
  SweepResult out;
  for (const auto& set : sets) measure_alpha(clean, set.alpha, set.keys, config, out);
  return out;
}

SweepResult experiment_sweep(const DatasetSpec& dataset, const SweepConfig& config) {
  return experiment_sweep(generate(dataset), config);
}

}  // namespace lis
