#pragma once

#include "ddcl/data.hpp"
#include "ddcl/hierarchy.hpp"
#include "ddcl/metrics.hpp"
#include "ddcl/stability.hpp"
#include "ddcl/trainer.hpp"
#include "ddcl/vq.hpp"

#include <utility>
#include <vector>

namespace ddcl {

// Debris clustering: fixed PCA encoder, DDCL readout initialized from the
// k-means solution that also serves as the baseline.
struct DebrisExperiment {
  DebrisParams data = DebrisParams::defaults();
  std::uint64_t data_seed = 42;
  int pca_dim = 5;
  int restarts = 10;
  TrainerConfig trainer;

  void validate() const;
};

struct DebrisOutcome {
  LabeledDataset data;
  PcaModel pca;
  ClusteringScore baseline;
  std::vector<EpochLog> logs;
  int best_epoch = 0;
};

DebrisOutcome run_debris(const DebrisExperiment& exp, const EpochObserver& observer = {});

// Blobs in `dim` dimensions, standardized and scaled by input_scale, read
// through a trainable linear encoder (m x dim) initialized with the top-m
// principal axes.
struct AblationExperiment {
  int K = 10;
  int per_class = 100;
  int dim = 64;
  int m = 32;
  double spread = 0.2;
  double input_scale = 0.45;
  std::uint64_t data_seed = 42;
  int restarts = 10;
  std::vector<double> epsilons{0.001, 0.01, 0.1, 0.5, 1.0};
  TrainerConfig trainer = default_trainer();
  int threads = 1;

  static TrainerConfig default_trainer();
  void validate() const;
};

struct AblationSetup {
  TrainerState state;
  TrainingData data;
  double baseline_acc = 0.0;
};

AblationSetup make_ablation_setup(const AblationExperiment& exp);

struct AblationOutcome {
  double baseline_acc = 0.0;
  std::vector<AblationRow> rows;
};

AblationOutcome run_ablation(const AblationExperiment& exp);

// Small-step prototype-only runs on blobs with the free energy audited from
// the logged states.
struct LyapunovExperiment {
  int K = 4;
  int per_class = 40;
  int dim = 6;
  double spread = 0.6;
  std::uint64_t data_seed = 42;
  double eta_P = 1e-3;
  double lambda = 0.05;
  int epochs = 300;
  double fixed_T = 1.0;
  AnnealSchedule schedule{2.0, 0.3, 60.0};
  double tolerance = 1e-6;

  void validate() const;
};

struct LyapunovOutcome {
  LyapunovReport fixed_T;
  LyapunovReport annealed;
  double max_abs_grad = 0.0;  // largest raw gradient entry seen (clip inactive if < clip)
};

LyapunovOutcome run_lyapunov(const LyapunovExperiment& exp);

// Toy linear-encoder system (m = 1) driven to a stationary point at a small
// learning-rate ratio, then linearized.
struct JacobianExperiment {
  int K = 2;
  int per_class = 8;
  int dim = 3;
  double spread = 0.1;
  double center_scale = 2.0;
  std::uint64_t data_seed = 7;
  double T = 0.5;
  double lambda = 0.05;
  double eta_P = 0.5;
  double epsilon = 0.01;
  double compare_epsilon = 1.0;
  double tol = 1e-3;
  int max_steps = 2000000;

  void validate() const;
};

struct JacobianOutcome {
  StationaryRun run;
  HessianBlocks blocks;
  StabilityVerdict verdict;
  StabilityVerdict compare;
  TimescaleProxies proxies;
  Eigen::Index params = 0;
};

JacobianOutcome run_jacobian(const JacobianExperiment& exp);

struct HierarchyExperiment {
  TopicCorpusParams corpus;
  std::uint64_t data_seed = 42;
  HierarchyConfig levels;
  TrainerConfig trainer = default_trainer();
  // (epsilon, lambda) pairs, one run each from the same initialization.
  std::vector<std::pair<double, double>> settings{{0.1, 0.5}, {0.05, 1.5}};

  static TrainerConfig default_trainer();
  void validate() const;
};

struct HierarchyRun {
  double epsilon = 0.0;
  double lambda = 0.0;
  std::vector<LevelAudit> audits;
  // max over epochs of |L_q^total - (L_q^(1) + L_q^(2))| with each level
  // recomputed independently
  double additivity_error = 0.0;
  // max |V^(1)(bank2 + delta) - V^(1)(bank2)| over perturbations of bank2
  double decoupling_error = 0.0;
  bool separation_force_unchanged = true;
  Matrix doc_vectors;  // projected level-2 inputs after the last epoch
  Labels topics;
};

struct HierarchyOutcome {
  std::vector<HierarchyRun> runs;
};

HierarchyOutcome run_hierarchy(const HierarchyExperiment& exp);

// Perturbs the whole level-2 bank once and a few of its entries by central
// differences, measuring the change of level-1 V_soft; also compares the
// level-1 separation force bitwise.
std::pair<double, bool> hierarchy_decoupling(const HierarchyState& state, const TopicCorpus& corpus,
                                             double T, double h = 1e-3);

}  // namespace ddcl
