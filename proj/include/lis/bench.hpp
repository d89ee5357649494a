#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lis/indexes.hpp"
#include "lis/keyset.hpp"
#include "lis/poisoning.hpp"

namespace lis {

enum class QueryTarget { clean_keys, poisoned_union };
QueryTarget parse_query_target(std::string_view name);
std::string_view to_string(QueryTarget t);

struct WorkloadSpec {
  std::size_t query_count = 1000;
  std::size_t repetitions = 5;
  std::uint64_t seed = 7;
  QueryTarget target = QueryTarget::clean_keys;

  void validate() const;
};

enum class DatasetTag { clean, poisoned };
std::string_view to_string(DatasetTag t);
DatasetTag parse_dataset_tag(std::string_view name);

struct BenchRecord {
  std::string index_name;
  double alpha = 0.0;
  DatasetTag dataset = DatasetTag::clean;
  double mean_lookup_ns = 0.0;
  double p50_lookup_ns = 0.0;
  double p99_lookup_ns = 0.0;
  double mean_probes = 0.0;
  double build_ms = 0.0;
};

struct DeteriorationRow {
  std::string index_name;
  double alpha = 0.0;
  double ratio_time = 1.0;
  double ratio_probes = 1.0;
};

/// query_count keys drawn uniformly with replacement from pool (seeded).
std::vector<Key> draw_queries(std::span<const Key> pool, const WorkloadSpec& spec);

/// Times repetitions passes over the queries (after one untimed warm-up
/// pass) and averages the probe counts. Every lookup is checked against the
/// true rank in `set`; a wrong or missing answer throws InvariantError
/// naming the key. The returned record has index_name/alpha/dataset unset.
BenchRecord run_workload(const AnyIndex& index, const RankedKeySet& set,
                         std::span<const Key> queries, const WorkloadSpec& spec);

/// Convenience form drawing the queries from set itself.
BenchRecord run_workload(const AnyIndex& index, const RankedKeySet& set,
                         const WorkloadSpec& spec);

/// poisoned / clean for both metrics; throws on a zero clean mean.
DeteriorationRow deterioration(const BenchRecord& clean, const BenchRecord& poisoned);

struct SweepConfig {
  std::vector<double> alphas{0.01, 0.05, 0.10, 0.15, 0.20};
  std::vector<std::string> indexes{"slr", "lad", "theilsen", "2p",
                                   "logte", "dlogte", "alex", "pgm"};
  CandidateStrategy strategy = CandidateStrategy::gap_endpoints_plus_midpoint;
  IndexParams params;
  WorkloadSpec workload;
  /// Called as each record completes, so callers can flush partial output.
  std::function<void(const BenchRecord&)> on_record;

  void validate() const;
  /// Checks everything except the alpha list.
  void validate_measurement() const;
};

struct AlphaAttack {
  double alpha = 0.0;
  PoisonResult result;
};

struct SweepResult {
  std::vector<AlphaAttack> attacks;
  std::vector<BenchRecord> records;
  std::vector<DeteriorationRow> ratios;
};

/// One fresh greedy attack per alpha; every index is built and measured on
/// the clean and the poisoned keyset with the same query sequence. When an
/// attack inserts nothing the poisoned keyset equals the clean one and the
/// clean measurement is reused, giving ratios of exactly 1.
SweepResult experiment_sweep(const RankedKeySet& clean, const SweepConfig& config);
SweepResult experiment_sweep(const DatasetSpec& dataset, const SweepConfig& config);

/// A precomputed poison list and the threshold it is reported under.
struct PoisonSet {
  double alpha = 0.0;
  std::vector<Key> keys;
};

/// Same measurement as experiment_sweep over caller-supplied poison lists;
/// config.alphas is ignored and the result carries no attacks.
SweepResult bench_poison_sets(const RankedKeySet& clean, std::span<const PoisonSet> sets,
                              const SweepConfig& config);

// ---------------------------------------------------------------------------
// CSV boundary

inline constexpr std::string_view kResultsHeader =
    "index,alpha,dataset,mean_lookup_ns,p50_ns,p99_ns,mean_probes,build_ms";
inline constexpr std::string_view kRatiosHeader = "index,alpha,ratio_time,ratio_probes";

/// Six significant digits, '.' decimal point, no grouping.
std::string format_number(double v);

void write_results_csv(std::span<const BenchRecord> records, std::ostream& out);
void write_result_row(const BenchRecord& r, std::ostream& out);
std::vector<BenchRecord> read_results_csv(std::istream& in);
void write_ratios_csv(std::span<const DeteriorationRow> rows, std::ostream& out);

struct IndexSummary {
  std::string index_name;
  double clean_mean_lookup_ns = 0.0;
  double poisoned_mean_lookup_ns = 0.0;
  double clean_mean_probes = 0.0;
  double poisoned_mean_probes = 0.0;
};

struct Report {
  std::vector<DeteriorationRow> rows;
  std::vector<IndexSummary> summary;
};

/// Pairs clean/poisoned records per (index, alpha). Indexes are ordered by
/// mean clean lookup time ascending (name breaks ties), alphas ascending.
Report build_report(std::span<const BenchRecord> records);
void print_report(const Report& report, std::ostream& out);

}  // namespace lis
