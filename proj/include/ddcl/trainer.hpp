#pragma once

#include "ddcl/layer.hpp"
#include "ddcl/loss.hpp"
#include "ddcl/matrix.hpp"
#include "ddcl/metrics.hpp"
#include "ddcl/numerics.hpp"
#include "ddcl/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ddcl {

struct AnnealSchedule {
  double T0 = 2.0;
  double Tmin = 0.3;
  double tau = 20.0;  // epochs

  void validate() const;
};

// max(Tmin, T0 exp(-epoch / tau))
double anneal(const AnnealSchedule& schedule, double epoch);

enum class EncoderKind { Fixed, Linear };

// Either a frozen map (identity, or a fitted PCA projection) or a trainable
// linear map Z = X W^T with W of shape m x d.
struct EncoderModel {
  EncoderKind kind = EncoderKind::Fixed;
  std::optional<PcaModel> pca;
  Matrix W;

  static EncoderModel identity();
  static EncoderModel fixed_pca(PcaModel model);
  static EncoderModel linear(Matrix weights);

  bool trainable() const { return kind == EncoderKind::Linear; }
  Matrix encode(const Matrix& X) const;
};

struct TrainerConfig {
  double eta_P = 0.05;
  double eta_theta = 0.0;
  double lambda = 0.0;    // repulsion weight in the prototype gradient
  double lambda_q = 0.1;  // task-loss coupling; unused without a task head
  double clip = 2.0;      // elementwise gradient clip
  int epochs = 500;
  bool sg_on_Q = false;
  std::uint64_t seed = 42;
  AnnealSchedule schedule{2.0, 0.3, 120.0};
  double min_pair_dist_guard = 1e-6;
  int batch_size = 0;  // 0 = full batch
  double utilization_threshold = 0.01;

  double epsilon() const { return eta_theta / eta_P; }
  void validate() const;
};

struct TrainerState {
  EncoderModel encoder;
  PrototypeBank bank;
  int epoch = 0;
  Rng rng{0};
};

struct TrainingData {
  Matrix X;
  Labels y;  // may be empty
};

struct EpochLog {
  int epoch = 0;
  double T = 0.0;
  double L_q = 0.0, L_OLS = 0.0, L_soft = 0.0, V_soft = 0.0, V_alg = 0.0;
  double S_P = 0.0;
  double H_Q = 0.0;
  double acc = 0.0, nmi = 0.0, ari = 0.0;
  double min_q = 0.0;
  double utilization = 0.0;
  double free_energy = 0.0;
  double grad_norm_P = 0.0;
  double grad_norm_theta = 0.0;
};

struct StepGradients {
  Assignment assignment;
  LossReport report;
  Matrix grad_P;
  Matrix grad_theta;  // empty for a fixed encoder
};

// Forward pass, loss decomposition (invariants checked) and raw gradients of
// the training objective for one batch at temperature T.
StepGradients compute_gradients(const TrainerState& state, const Matrix& X,
                                const TrainerConfig& config, double T);

// Elementwise clip to +-clip, then P -= eta_P g_P and W -= eta_theta g_W.
// Throws InvariantViolation on a non-finite gradient.
void apply_gradients(TrainerState& state, StepGradients& grads, const TrainerConfig& config);

// One epoch of Algorithm-style training: diagnostics on the full data at the
// current state, then the update (full batch, or seeded mini-batches).
EpochLog train_epoch(TrainerState& state, const TrainingData& data, const TrainerConfig& config);

using EpochObserver = std::function<void(const EpochLog&, const TrainerState&)>;

// Runs config.epochs epochs. The observer sees each log together with the
// state the log was measured on (before that epoch's update).
std::vector<EpochLog> train(TrainerState& state, const TrainingData& data,
                            const TrainerConfig& config, const EpochObserver& observer = {});

inline const std::vector<std::string>& epoch_log_columns() {
  static const std::vector<std::string> cols = {"epoch", "T",   "L_q", "L_OLS", "L_soft",
                                                "V_soft", "V_alg", "S_P", "H_Q",  "acc",
                                                "nmi",   "ari"};
  return cols;
}

}  // namespace ddcl
