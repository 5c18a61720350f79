#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ddcl {

struct GradCheckEntry {
  std::string name;
  int instances = 0;
  double max_rel_error = 0.0;
  double tolerance = 1e-5;

  bool passed() const { return max_rel_error < tolerance; }
};

struct GradCheckOptions {
  std::uint64_t seed = 42;
  int instances = 20;
  // Test hook: perturbs the analytic prototype gradient so the check must fail.
  bool corrupt = false;
};

// Compares every analytic gradient of the loss module against central finite
// differences on random small instances.
std::vector<GradCheckEntry> run_gradcheck(const GradCheckOptions& options);

// Max relative error ||a - b||_inf / max(||b||_inf, 1e-8).
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

}  // namespace ddcl
