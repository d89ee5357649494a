#include "lis/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "lis/error.hpp"

namespace lis {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("manifest line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_unsigned(std::string_view v, std::size_t line, std::string_view key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(line, "'" + std::string(key) + "' expects an unsigned integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view v, std::size_t line, std::string_view key) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail(line, "'" + std::string(key) + "' expects a number, got '" + s + "'");
  }
  return out;
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = v.find(',', pos);
    out.push_back(trim(v.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

RunManifest parse_manifest(std::string_view text) {
  RunManifest m;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second) fail(line_no, "repeated key '" + std::string(key) + "'");

    try {
      if (key == "n") {
        m.dataset.n = parse_unsigned<std::size_t>(value, line_no, key);
      } else if (key == "dist") {
        m.dataset.distribution = parse_distribution(value);
      } else if (key == "seed") {
        m.dataset.seed = parse_unsigned<std::uint64_t>(value, line_no, key);
      } else if (key == "universe_max") {
        m.dataset.universe_max = parse_unsigned<Key>(value, line_no, key);
      } else if (key == "alphas") {
        m.sweep.alphas.clear();
        for (auto a : split_list(value)) {
          const double alpha = parse_real(a, line_no, key);
          for (double prev : m.sweep.alphas) {
            if (prev == alpha) fail(line_no, "duplicate alpha " + std::string(a));
          }
          m.sweep.alphas.push_back(alpha);
        }
      } else if (key == "strategy") {
        m.sweep.strategy = parse_candidate_strategy(value);
      } else if (key == "indexes") {
        m.sweep.indexes.clear();
        for (auto name : split_list(value)) m.sweep.indexes.emplace_back(name);
      } else if (key == "epsilon") {
        m.sweep.params.pgm_epsilon = parse_unsigned<std::size_t>(value, line_no, key);
      } else if (key == "density") {
        m.sweep.params.alex_density = parse_real(value, line_no, key);
      } else if (key == "queries") {
        m.sweep.workload.query_count = parse_unsigned<std::size_t>(value, line_no, key);
      } else if (key == "reps") {
        m.sweep.workload.repetitions = parse_unsigned<std::size_t>(value, line_no, key);
      } else if (key == "workload_seed") {
        m.sweep.workload.seed = parse_unsigned<std::uint64_t>(value, line_no, key);
      } else if (key == "target") {
        m.sweep.workload.target = parse_query_target(value);
      } else if (key == "out_dir") {
        if (value.empty()) fail(line_no, "out_dir is empty");
        m.out_dir = std::string(value);
      } else if (key == "results") {
        if (value.empty()) fail(line_no, "results is empty");
        m.results_file = std::string(value);
      } else if (key == "ratios") {
        if (value.empty()) fail(line_no, "ratios is empty");
        m.ratios_file = std::string(value);
      } else {
        fail(line_no, "unknown key '" + std::string(key) + "'");
      }
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind("manifest line", 0) == 0) throw;
      fail(line_no, what);
    }
  }
  m.sweep.validate();
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunManifest m = parse_manifest(buf.str());
  if (m.out_dir.is_relative()) m.out_dir = path.parent_path() / m.out_dir;
  return m;
}

}  // namespace lis
