#include "lis/keyset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>

#include "lis/error.hpp"

namespace lis {

namespace detail {

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw PreconditionError("uniform_below: empty range");
  // Largest multiple of bound representable; reject the ragged tail.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

Distribution parse_distribution(std::string_view name) {
  if (name == "uniform") return Distribution::uniform;
  if (name == "lognormal") return Distribution::lognormal;
  if (name == "clustered") return Distribution::clustered;
  throw ConfigError("unknown distribution '" + std::string(name) +
                    "' (expected uniform, lognormal or clustered)");
}

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::uniform: return "uniform";
    case Distribution::lognormal: return "lognormal";
    case Distribution::clustered: return "clustered";
  }
  return "?";
}

RankedKeySet::RankedKeySet(std::vector<Key> sorted_keys, Key universe_max)
    : universe_max_(universe_max) {
  for (std::size_t i = 1; i < sorted_keys.size(); ++i) {
    if (sorted_keys[i - 1] >= sorted_keys[i]) {
      throw InvariantError("keyset not strictly ascending at position " +
                           std::to_string(i));
    }
  }
  if (!sorted_keys.empty() && sorted_keys.back() >= universe_max) {
    throw InvariantError("key " + std::to_string(sorted_keys.back()) +
                         " outside universe [0, " +
                         std::to_string(universe_max) + ")");
  }
  keys_ = std::make_shared<const std::vector<Key>>(std::move(sorted_keys));
}

RankedKeySet RankedKeySet::from_unsorted(std::vector<Key> keys,
                                         Key universe_max) {
  std::sort(keys.begin(), keys.end());
  const auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end()) {
    throw FormatError("duplicate key " + std::to_string(*dup));
  }
  return RankedKeySet(std::move(keys), universe_max);
}

bool RankedKeySet::contains(Key k) const {
  return std::binary_search(keys_->begin(), keys_->end(), k);
}

std::vector<double> RankedKeySet::keys_as_double() const {
  return std::vector<double>(keys_->begin(), keys_->end());
}

std::vector<double> RankedKeySet::ranks_as_double() const {
  std::vector<double> r(keys_->size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(i + 1);
  return r;
}

namespace {

// Floyd's sampling without replacement: exactly n draws for any n <= m.
std::vector<Key> sample_uniform(std::size_t n, Key m, std::mt19937_64& rng) {
  std::unordered_set<Key> chosen;
  chosen.reserve(n * 2);
  std::vector<Key> out;
  out.reserve(n);
  for (Key j = m - n; j < m; ++j) {
    const Key t = detail::uniform_below(rng, j + 1);
    const Key pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Adds uniformly drawn absent keys until `chosen` holds n keys.
void top_up_uniform(std::unordered_set<Key>& chosen, std::size_t n, Key m, std::mt19937_64& rng) {
  if (m <= 4 * static_cast<Key>(n)) {
    std::vector<Key> absent;
    for (Key k = 0; k < m; ++k) {
      if (!chosen.count(k)) absent.push_back(k);
    }
    for (const Key idx : sample_uniform(n - chosen.size(), absent.size(), rng)) {
      chosen.insert(absent[idx]);
    }
    return;
  }
  while (chosen.size() < n) chosen.insert(detail::uniform_below(rng, m));
}

// Draws until n distinct in-range keys are found. A distribution too narrow
// for n distinct keys gives up after a fixed number of attempts and fills
// the remainder uniformly.
template <typename Draw>
std::vector<Key> sample_rejecting(std::size_t n, Key m, std::mt19937_64& rng, Draw draw) {
  std::unordered_set<Key> chosen;
  chosen.reserve(n * 2);
  const std::size_t max_attempts = 200 * n + 10000;
  for (std::size_t attempts = 0; chosen.size() < n && attempts < max_attempts; ++attempts) {
    const double v = draw();
    if (!(v >= 0.0) || v >= static_cast<double>(m)) continue;
    chosen.insert(static_cast<Key>(v));
  }
  if (chosen.size() < n) top_up_uniform(chosen, n, m, rng);
  std::vector<Key> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RankedKeySet generate(const DatasetSpec& spec) {
  if (spec.n == 0) throw ConfigError("dataset size n must be positive");
  if (spec.universe_max == 0 || spec.n > spec.universe_max) {
    throw ConfigError("cannot draw " + std::to_string(spec.n) +
                      " distinct keys from a universe of " +
                      std::to_string(spec.universe_max));
  }
  std::mt19937_64 rng(spec.seed);
  const Key m = spec.universe_max;
  const double md = static_cast<double>(m);

  switch (spec.distribution) {
    case Distribution::uniform:
      return RankedKeySet(sample_uniform(spec.n, m, rng), m);

    case Distribution::lognormal: {
      // exp(sigma*Z) scaled so that Z = 4 lands on the universe bound;
      // draws beyond it are resampled (truncation).
      constexpr double kSigma = 2.0;
      const double scale = md / std::exp(4.0 * kSigma);
      auto draw = [&] {
        const double u1 = 1.0 - detail::uniform_unit(rng);
        const double u2 = detail::uniform_unit(rng);
        const double z =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return std::floor(std::exp(kSigma * z) * scale);
      };
      return RankedKeySet(sample_rejecting(spec.n, m, rng, draw), m);
    }

    case Distribution::clustered: {
      const std::size_t clusters = std::min<std::size_t>(10, spec.n);
      std::vector<double> centers(clusters);
      for (auto& c : centers) c = static_cast<double>(detail::uniform_below(rng, m));
      const double half_width = std::max(1.0, std::floor(md / (clusters * 200.0)));
      auto draw = [&] {
        const double c = centers[detail::uniform_below(rng, clusters)];
        const double off = std::floor(detail::uniform_unit(rng) * (2.0 * half_width + 1.0)) -
                           half_width;
        return c + off;
      };
      return RankedKeySet(sample_rejecting(spec.n, m, rng, draw), m);
    }
  }
  throw ConfigError("unknown distribution");
}

Rank rank_of(const RankedKeySet& set, Key k) {
  const auto keys = set.keys();
  const auto it = std::lower_bound(keys.begin(), keys.end(), k);
  if (it == keys.end() || *it != k) {
    throw NotFoundError("key " + std::to_string(k) + " not in keyset");
  }
  return static_cast<Rank>(it - keys.begin()) + 1;
}

std::vector<Key> parse_key_lines(std::string_view text) {
  std::vector<Key> keys;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    Key value = 0;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), value);
    if (line.empty() || ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": expected an unsigned decimal integer, got '" +
                           std::string(line) + "'",
                       line_no);
    }
    keys.push_back(value);
  }
  return keys;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_keys(std::span<const Key> keys, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  std::string buf;
  buf.reserve(keys.size() * 11);
  char tmp[24];
  for (Key k : keys) {
    const auto r = std::to_chars(tmp, tmp + sizeof tmp, k);
    buf.append(tmp, r.ptr);
    buf.push_back('\n');
  }
  out << buf;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

RankedKeySet load_keyset(const std::filesystem::path& path, Key universe_max) {
  auto keys = parse_key_lines(read_file(path));
  if (keys.empty()) throw FormatError(path.string() + ": keyset is empty");
  if (universe_max == 0) {
    const Key top = *std::max_element(keys.begin(), keys.end());
    universe_max = std::max(kDefaultUniverseMax, top + 1);
  }
  return RankedKeySet::from_unsorted(std::move(keys), universe_max);
}

void save_keyset(const RankedKeySet& set, const std::filesystem::path& path) {
  write_keys(set.keys(), path);
}

std::vector<Key> load_key_list(const std::filesystem::path& path) {
  return parse_key_lines(read_file(path));
}

void save_key_list(std::span<const Key> keys, const std::filesystem::path& path) {
  write_keys(keys, path);
}

}  // namespace lis
