#pragma once

#include "ddcl/layer.hpp"
#include "ddcl/matrix.hpp"
#include "ddcl/trainer.hpp"

#include <cstdint>
#include <vector>

namespace ddcl {

// VQ codebook: K codes in R^d_code, same layout as a prototype bank.
using Codebook = PrototypeBank;

struct UtilizationRecord {
  int epoch = 0;
  std::vector<double> mean_assignment;  // per code
  double utilization = 0.0;
  double threshold = 0.01;
};

struct SoftQuantized {
  Matrix centroids;
  Matrix Q;
};

// Soft codebook lookup: Boltzmann assignment and soft centroids.
SoftQuantized soft_quantize(const Matrix& tokens, const Codebook& codebook, double T);

struct HardStepResult {
  std::vector<int> indices;  // nearest code per token, ties to the lowest index
  std::vector<int> counts;   // tokens per code
  double commitment_loss = 0.0;  // mean |z - sg[e_k*]|^2
  double codebook_loss = 0.0;    // mean |sg[z] - e_k*|^2
  double total_loss = 0.0;       // codebook_loss + beta * commitment_loss
};

// Nearest-code quantization followed by the codebook update
// e_k <- e_k - eta * 2 * sum_{n: k*(n) = k} (e_k - z_n). Codes that receive no
// tokens are left untouched.
HardStepResult hard_quantize_step(const Matrix& tokens, Codebook& codebook, double beta,
                                  double eta);

// Per-code mean of Q over tokens.
std::vector<double> soft_code_mass(const Matrix& Q);
// Per-code empirical frequency of hard indices.
std::vector<double> hard_code_mass(const std::vector<int>& indices, Eigen::Index K);
// Fraction of codes whose mass exceeds the threshold.
double utilization(const std::vector<double>& code_mass, double threshold);

struct VqConfig {
  int K = 64;
  int dim = 32;
  int groups = 8;
  double center_scale = 1.0;
  double spread = 1.0;
  int tokens_per_epoch = 4096;
  int batch_size = 256;
  int epochs = 50;
  std::uint64_t seed = 42;
  // Both arms start from the same codebook drawn uniformly from +-init_range;
  // a non-positive value means 1/K.
  double init_range = 0.0;
  double beta = 0.25;
  double eta_hard = 1e-3;
  double threshold = 0.01;
  // Soft arm trainer settings (identity encoder).
  TrainerConfig soft;

  void validate() const;
};

struct VqComparison {
  std::vector<UtilizationRecord> soft;
  std::vector<UtilizationRecord> hard;
  // Codes in the hard arm whose values were bit-identical before and after
  // each epoch.
  std::vector<int> hard_frozen_codes;
  // Smallest per-code prototype-gradient norm seen in the soft arm per epoch.
  std::vector<double> soft_min_code_grad;
  std::vector<double> soft_min_V_alg;
  std::vector<LossReport> soft_reports;  // last batch of each epoch
  // Soft codebook evaluated on the epoch's tokens after the epoch's updates;
  // acc/nmi/ari are against the mixture components.
  std::vector<EpochLog> soft_logs;
  std::vector<HardStepResult> hard_results;
};

// Same token stream, K and initial codebook for both arms. Epochs are 1-based
// in the records.
VqComparison run_vq_comparison(const VqConfig& config);

}  // namespace ddcl
