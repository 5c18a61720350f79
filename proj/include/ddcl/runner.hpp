#pragma once

#include "ddcl/config.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace ddcl {

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;  // written outputs, manifest excluded
  std::string error;
};

// Runs the configured experiment and writes its CSVs and manifest.json into
// out_dir (created if needed). Invariant violations are reported on `err`
// and give exit code 2; the manifest records the outcome either way.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// UTC timestamp, ISO 8601 with seconds.
std::string utc_timestamp();

}  // namespace ddcl
