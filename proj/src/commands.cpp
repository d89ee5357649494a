#include "lis/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lis/bench.hpp"
#include "lis/error.hpp"
#include "lis/indexes.hpp"
#include "lis/keyset.hpp"
#include "lis/manifest.hpp"
#include "lis/poisoning.hpp"
#include "lis/regressors.hpp"

namespace lis {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_names(const std::string& list) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = list.find(',', pos);
    out.push_back(list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void write_trace(const PoisonResult& r, std::ostream& out) {
  out << "step,mse\n0," << format_number(r.clean_loss) << '\n';
  for (std::size_t i = 0; i < r.loss_trace.size(); ++i) {
    out << i + 1 << ',' << format_number(r.loss_trace[i]) << '\n';
  }
}

struct GenerateArgs {
  std::size_t n = 1000;
  std::string dist = "uniform";
  std::uint64_t seed = 42;
  Key universe_max = kDefaultUniverseMax;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  DatasetSpec spec;
  spec.n = a.n;
  spec.distribution = parse_distribution(a.dist);
  spec.seed = a.seed;
  spec.universe_max = a.universe_max;
  const auto set = generate(spec);
  save_keyset(set, a.out);
  out << "n=" << set.size() << " min=" << set.min_key() << " max=" << set.max_key()
      << " universe_max=" << set.universe_max() << " -> " << a.out << '\n';
  return kExitOk;
}

struct PoisonArgs {
  std::string keys;
  double alpha = 0.0;
  std::string strategy = "gap-endpoints-plus-midpoint";
  Key universe_max = 0;
  std::string out;
  std::string trace;
};

int cmd_poison(const PoisonArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.alpha > 0.0 && a.alpha <= 0.5)) {
    throw ConfigError("--alpha must lie in (0, 0.5], got " + format_number(a.alpha));
  }
  PoisonConfig pc;
  pc.alpha = a.alpha;
  pc.strategy = parse_candidate_strategy(a.strategy);
  const auto set = load_keyset(a.keys, a.universe_max);
  const auto result = greedy_poison(set, pc);

  std::ostream& summary = a.out.empty() ? err : out;
  if (a.out.empty()) {
    for (Key k : result.poison_keys) out << k << '\n';
  } else {
    save_key_list(result.poison_keys, a.out);
  }
  std::string trace_path = a.trace;
  if (trace_path.empty() && !a.out.empty()) trace_path = a.out + ".trace.csv";
  if (!trace_path.empty()) {
    auto t = open_output(trace_path);
    write_trace(result, t);
  }
  summary << "lambda=" << pc.budget(set.size()) << " inserted=" << result.poison_keys.size()
          << (result.truncated ? " (candidates exhausted)" : "")
          << " clean_mse=" << format_number(result.clean_loss)
          << " final_mse=" << format_number(result.final_loss) << '\n';
  return kExitOk;
}

struct BenchArgs {
  std::string keys;
  std::vector<std::string> poison;
  std::string indexes = "slr,lad,theilsen,2p,logte,dlogte,alex,pgm";
  std::size_t reps = 5;
  std::size_t queries = 1000;
  std::uint64_t seed = 7;
  std::size_t epsilon = kDefaultPgmEpsilon;
  double density = kDefaultAlexDensity;
  std::string target = "clean-keys";
  Key universe_max = 0;
  std::string out;
};

PoisonSet load_poison_arg(const std::string& arg, std::size_t n) {
  PoisonSet ps;
  std::string path = arg;
  bool explicit_alpha = false;
  if (const auto eq = arg.find('='); eq != std::string::npos) {
    const std::string head = arg.substr(0, eq);
    char* end = nullptr;
    const double v = std::strtod(head.c_str(), &end);
    if (!head.empty() && end == head.c_str() + head.size()) {
      ps.alpha = v;
      path = arg.substr(eq + 1);
      explicit_alpha = true;
    }
  }
  ps.keys = load_key_list(path);
  if (!explicit_alpha) ps.alpha = static_cast<double>(ps.keys.size()) / static_cast<double>(n);
  return ps;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  SweepConfig config;
  config.indexes = split_names(a.indexes);
  config.params.pgm_epsilon = a.epsilon;
  config.params.alex_density = a.density;
  config.workload.repetitions = a.reps;
  config.workload.query_count = a.queries;
  config.workload.seed = a.seed;
  config.workload.target = parse_query_target(a.target);
  config.validate_measurement();

  const auto clean = load_keyset(a.keys, a.universe_max);
  std::vector<PoisonSet> sets;
  for (const auto& p : a.poison) sets.push_back(load_poison_arg(p, clean.size()));
  // Without poison lists the run still pairs each clean record with itself.
  if (sets.empty()) sets.push_back({});

  std::ofstream file;
  if (!a.out.empty()) file = open_output(a.out);
  std::ostream& dst = a.out.empty() ? out : file;
  dst << kResultsHeader << '\n';
  config.on_record = [&](const BenchRecord& r) {
    write_result_row(r, dst);
    dst.flush();
  };
  const auto result = bench_poison_sets(clean, sets, config);
  if (!a.out.empty()) {
    out << result.records.size() << " records -> " << a.out << '\n';
  }
  return kExitOk;
}

int cmd_report(const std::string& in_path, std::ostream& out) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw Error("cannot open " + in_path);
  const auto records = read_results_csv(in);
  print_report(build_report(records), out);
  return kExitOk;
}

int cmd_sweep(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  auto m = load_manifest(manifest_path);
  const auto clean = generate(m.dataset);
  fs::create_directories(m.out_dir);
  save_keyset(clean, m.out_dir / "keys.txt");

  auto results = open_output(m.results_path());
  results << kResultsHeader << '\n';
  m.sweep.on_record = [&](const BenchRecord& r) {
    write_result_row(r, results);
    results.flush();
  };
  const auto sweep = experiment_sweep(clean, m.sweep);
  results.close();

  for (const auto& attack : sweep.attacks) {
    const auto stem = "poison_" + format_number(attack.alpha);
    save_key_list(attack.result.poison_keys, m.out_dir / (stem + ".txt"));
    auto t = open_output(m.out_dir / (stem + ".trace.csv"));
    write_trace(attack.result, t);
  }
  {
    auto r = open_output(m.ratios_path());
    write_ratios_csv(sweep.ratios, r);
  }
  err << sweep.records.size() << " records -> " << m.results_path().string() << '\n';
  print_report(build_report(sweep.records), out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned index poisoning benchmark"};
  app.name("lisbench");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic keyset");
  g->add_option("--n", gen.n, "Number of keys")->capture_default_str();
  g->add_option("--dist", gen.dist, "uniform, lognormal or clustered")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--universe-max", gen.universe_max, "Exclusive key bound")->capture_default_str();
  g->add_option("--out", gen.out, "Output keyset file")->required();

  PoisonArgs poi;
  auto* p = app.add_subcommand("poison", "Run the greedy poisoning attack on a keyset");
  p->add_option("--keys", poi.keys, "Clean keyset file")->required();
  p->add_option("--alpha", poi.alpha, "Poisoning threshold in (0, 0.5]")->required();
  p->add_option("--strategy", poi.strategy,
                "gap-endpoints, gap-endpoints-plus-midpoint or dense")
      ->capture_default_str();
  p->add_option("--universe-max", poi.universe_max,
                "Exclusive key bound (default max(2^30, largest key + 1))");
  p->add_option("--out", poi.out, "Poison key file (standard output when omitted)");
  p->add_option("--trace", poi.trace, "Loss trace file (default <out>.trace.csv)");

  BenchArgs ben;
  auto* b = app.add_subcommand("bench", "Measure indexes on clean and poisoned keysets");
  b->add_option("--keys", ben.keys, "Clean keyset file")->required();
  b->add_option("--poison", ben.poison, "Poison key file, optionally as ALPHA=PATH; repeatable");
  b->add_option("--indexes", ben.indexes, "Comma-separated index names")->capture_default_str();
  b->add_option("--reps", ben.reps, "Timed passes per measurement")->capture_default_str();
  b->add_option("--queries", ben.queries, "Lookups per pass")->capture_default_str();
  b->add_option("--seed", ben.seed, "Query sampling seed")->capture_default_str();
  b->add_option("--epsilon", ben.epsilon, "PGM error bound")->capture_default_str();
  b->add_option("--density", ben.density, "ALEX slot density in (0.5, 1]")->capture_default_str();
  b->add_option("--target", ben.target, "clean-keys or poisoned-keys-union")->capture_default_str();
  b->add_option("--universe-max", ben.universe_max, "Exclusive key bound for the keyset");
  b->add_option("--out", ben.out, "Results CSV (standard output when omitted)");

  std::string report_in;
  auto* r = app.add_subcommand("report", "Print deterioration ratios from a results file");
  r->add_option("--in", report_in, "Results CSV")->required();

  std::string manifest;
  auto* s = app.add_subcommand("sweep", "Run generate, poison, bench and report from a manifest");
  s->add_option("--manifest", manifest, "Manifest file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out);
    if (p->parsed()) return cmd_poison(poi, out, err);
    if (b->parsed()) return cmd_bench(ben, out);
    if (r->parsed()) return cmd_report(report_in, out);
    if (s->parsed()) return cmd_sweep(manifest, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace lis
