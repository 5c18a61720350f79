#pragma once

#include "ddcl/data.hpp"
#include "ddcl/layer.hpp"
#include "ddcl/loss.hpp"
#include "ddcl/trainer.hpp"

#include <vector>

namespace ddcl {

// Level-1 soft centroids are mean pooled per document, shifted by `offset`
// and mapped to R^m2 by `projection` (m2 x m1) before level 2.
struct HierarchyConfig {
  int K1 = 32;
  int m1 = 128;
  int K2 = 20;
  int m2 = 64;
  Matrix projection;
  Vector offset;
  // Lets the level-2 loss backpropagate into the level-1 prototypes.
  bool full_backprop = false;
  int init_restarts = 10;
  int init_sample = 4096;  // tokens used for the level-1 k-means init

  void validate() const;
};

struct LevelStats {
  LossReport report;
  double S_P = 0.0;
  double H_Q = 0.0;
};

struct LevelAudit {
  int epoch = 0;
  double T = 0.0;
  LevelStats level1;
  LevelStats level2;
  double total_L_q = 0.0;
  double acc = 0.0, nmi = 0.0, ari = 0.0;  // level-2 assignments vs topics
};

struct TwoLevelResult {
  Matrix tokens;   // all level-1 tokens stacked in doc order
  Assignment level1;
  Matrix M1;       // level-1 soft centroids, one row per token
  Matrix pooled;   // one row per doc (m1)
  Matrix Z2;       // projected doc vectors (m2)
  Assignment level2;
  Matrix M2;
  std::vector<Eigen::Index> doc_offsets;  // first token row of each doc, plus the total
  LevelAudit audit;
};

TwoLevelResult two_level_forward(const std::vector<Matrix>& docs, const PrototypeBank& bank1,
                                 const PrototypeBank& bank2, const HierarchyConfig& cfg,
                                 double T1, double T2);

struct HierarchyState {
  PrototypeBank bank1;
  PrototypeBank bank2;
  HierarchyConfig cfg;
  int epoch = 0;
};

// k-means level-1 bank on a token sample, PCA projection of the pooled level-1
// centroids at T0, k-means level-2 bank on the projected docs.
HierarchyState init_hierarchy(const TopicCorpus& corpus, HierarchyConfig cfg,
                              const TrainerConfig& trainer, std::uint64_t seed);

struct HierarchyGradients {
  Matrix grad_P1;
  Matrix grad_P2;
  Matrix grad_projection;
};

// Gradients of L_q^(1) + L_q^(2) (plus repulsion when lambda > 0). Level-1
// centroids are a fixed input to level 2 unless cfg.full_backprop is set.
HierarchyGradients hierarchy_gradients(const TwoLevelResult& fwd, const HierarchyState& state,
                                       const TrainerConfig& trainer, double T);

// Both banks step with eta_P; the projection steps with eta_theta. Every
// epoch's audit must satisfy V^(1), V^(2) >= 0 or an InvariantViolation is
// thrown.
std::vector<LevelAudit> train_hierarchy(HierarchyState& state, const TopicCorpus& corpus,
                                        const TrainerConfig& trainer);

}  // namespace ddcl
