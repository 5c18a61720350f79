#pragma once

#include "ddcl/experiments.hpp"
#include "ddcl/gradcheck.hpp"
#include "ddcl/vq.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ddcl {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { Debris, Ablation, Vq, Hierarchy, Gradcheck };

std::string experiment_name(ExperimentKind kind);

struct VqExperiment {
  VqConfig base;
  std::vector<int> K_values{16, 64};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Debris;
  std::uint64_t seed = 42;
  std::optional<std::string> output_dir;
  int threads = 1;

  DebrisExperiment debris;
  AblationExperiment ablation;
  VqExperiment vq;
  HierarchyExperiment hierarchy;
  GradCheckOptions gradcheck;

  // Propagates the run seed to every data generator and trainer.
  void set_seed(std::uint64_t s);
  void set_threads(int n);
  // Checks every numeric field of the selected experiment; throws Error.
  void validate() const;
};

// Parses a JSON document. Unknown keys, wrong types and out-of-range values
// are errors (ddcl::Error). The result is validated.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Effective configuration of the selected experiment as pretty JSON.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace ddcl
