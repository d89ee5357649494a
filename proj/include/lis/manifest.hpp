#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lis/bench.hpp"
#include "lis/keyset.hpp"

namespace lis {

/// One-shot reproduction run: dataset, per-alpha attacks, indexes and the
/// workload, plus where to put the files. See README for the format.
struct RunManifest {
  DatasetSpec dataset;
  SweepConfig sweep;
  std::filesystem::path out_dir = "sweep-out";
  std::string results_file = "results.csv";
  std::string ratios_file = "ratios.csv";

  std::filesystem::path results_path() const { return out_dir / results_file; }
  std::filesystem::path ratios_path() const { return out_dir / ratios_file; }
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, repeated
/// keys, bad values and duplicate alphas raise ConfigError with the line.
RunManifest parse_manifest(std::string_view text);

/// Reads and parses a manifest file. A relative out_dir is resolved against
/// the manifest's own directory.
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace lis
