#include <algorithm>
#include <array>
#include <string>

#include "lis/error.hpp"
#include "lis/indexes.hpp"

namespace lis {

namespace {

constexpr std::array<std::string_view, 8> kIndexNames{"slr",   "lad",    "theilsen", "2p",
                                                      "logte", "dlogte", "alex",     "pgm"};

std::string valid_names() {
  std::string s;
  for (auto n : kIndexNames) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

}  // namespace

std::span<const std::string_view> index_names() { return kIndexNames; }

bool is_index_name(std::string_view name) {
  return std::find(kIndexNames.begin(), kIndexNames.end(), name) != kIndexNames.end();
}

AnyIndex build_index(std::string_view name, const RankedKeySet& set, const IndexParams& params) {
  if (name == "alex") return GappedArrayIndex::build(set, params.alex_density);
  if (name == "pgm") return PgmIndex::build(set, params.pgm_epsilon);
  if (!is_index_name(name)) {
    throw ConfigError("unknown index '" + std::string(name) + "'; valid names: " + valid_names());
  }
  return RegressionIndex::build(set, parse_fitter(name));
}

LookupOutcome lookup(const AnyIndex& index, Key k) {
  return std::visit([k](const auto& idx) { return idx.lookup(k); }, index);
}

}  // namespace lis
