#include "ddcl/hierarchy.hpp"

#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"
#include "ddcl/metrics.hpp"
#include "ddcl/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace ddcl {

void HierarchyConfig::validate() const {
  require(K1 >= 1 && K2 >= 1, "hierarchy: K1 and K2 must be positive");
  require(m1 >= 1 && m2 >= 1, "hierarchy: m1 and m2 must be positive");
  require(init_restarts >= 1 && init_sample >= 1, "hierarchy: invalid init settings");
  if (projection.size() > 0)
    require(projection.rows() == m2 && projection.cols() == m1,
            "hierarchy: projection must be m2 x m1, got " + shape_str(projection));
}

namespace {

LevelStats level_stats(const Matrix& Z, const PrototypeBank& bank, const Assignment& a,
                       const Matrix& M, const std::string& name) {
  LevelStats s;
  s.report = loss_report(Z, bank.P, a, M);
  check_report(s.report, name);
  s.S_P = bank.K() >= 2 ? prototype_separation(bank.P) : 0.0;
  s.H_Q = assignment_entropy(a.Q);
  return s;
}

}  // namespace

TwoLevelResult two_level_forward(const std::vector<Matrix>& docs, const PrototypeBank& bank1,
                                 const PrototypeBank& bank2, const HierarchyConfig& cfg,
                                 double T1, double T2) {
  require(!docs.empty(), "two_level_forward: empty corpus");
  TwoLevelResult r;
  Eigen::Index total = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].rows() == 0) throw Error("two_level_forward: document " + std::to_string(d) +
                                         " is empty");
    require(docs[d].cols() == bank1.dim(), "two_level_forward: token dimension mismatch");
    r.doc_offsets.push_back(total);
    total += docs[d].rows();
  }
  r.doc_offsets.push_back(total);
  r.tokens.resize(total, bank1.dim());
  for (std::size_t d = 0; d < docs.size(); ++d)
    r.tokens.middleRows(r.doc_offsets[d], docs[d].rows()) = docs[d];

  r.level1 = boltzmann_assign(r.tokens, bank1.P, T1);
  r.M1 = soft_centroids(r.level1.Q, bank1);

  r.pooled.resize(static_cast<Eigen::Index>(docs.size()), bank1.dim());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const Eigen::Index len = r.doc_offsets[d + 1] - r.doc_offsets[d];
    r.pooled.row(static_cast<Eigen::Index>(d)) =
        r.M1.middleRows(r.doc_offsets[d], len).colwise().mean();
  }
  require(cfg.projection.rows() == bank2.dim() && cfg.projection.cols() == bank1.dim(),
          "two_level_forward: projection shape " + shape_str(cfg.projection));
  Matrix centered = r.pooled;
  if (cfg.offset.size() == centered.cols()) centered.rowwise() -= cfg.offset.transpose();
  r.Z2 = centered * cfg.projection.transpose();
  r.level2 = boltzmann_assign(r.Z2, bank2.P, T2);
  r.M2 = soft_centroids(r.level2.Q, bank2);

  r.audit.T = T1;
  r.audit.level1 = level_stats(r.tokens, bank1, r.level1, r.M1, "level 1");
  r.audit.level2 = level_stats(r.Z2, bank2, r.level2, r.M2, "level 2");
  r.audit.total_L_q = r.audit.level1.report.L_q + r.audit.level2.report.L_q;
  return r;
}

HierarchyState init_hierarchy(const TopicCorpus& corpus, HierarchyConfig cfg,
                              const TrainerConfig& trainer, std::uint64_t seed) {
  cfg.validate();
  require(!corpus.docs.empty(), "init_hierarchy: empty corpus");
  Rng rng(seed);
  Eigen::Index total = 0;
  for (const auto& d : corpus.docs) total += d.rows();
  Matrix all(total, corpus.docs.front().cols());
  Eigen::Index row = 0;
  for (const auto& d : corpus.docs) {
    all.middleRows(row, d.rows()) = d;
    row += d.rows();
  }
  require(all.cols() == cfg.m1, "init_hierarchy: token dimension differs from m1");
  Matrix sample = all;
  if (total > cfg.init_sample) {
    Rng srng = rng.split(1);
    const auto perm = srng.permutation(static_cast<std::size_t>(total));
    sample.resize(cfg.init_sample, all.cols());
    for (int i = 0; i < cfg.init_sample; ++i) sample.row(i) = all.row(static_cast<Eigen::Index>(perm[i]));
  }

  HierarchyState st;
  st.bank1 = kmeans_init(sample, cfg.K1, cfg.init_restarts, seed + 1);

  const double T0 = anneal(trainer.schedule, 0);
  const Assignment a = boltzmann_assign(all, st.bank1.P, T0);
  const Matrix M1 = soft_centroids(a.Q, st.bank1);
  Matrix pooled(static_cast<Eigen::Index>(corpus.docs.size()), cfg.m1);
  row = 0;
  for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
    const Eigen::Index len = corpus.docs[d].rows();
    pooled.row(static_cast<Eigen::Index>(d)) = M1.middleRows(row, len).colwise().mean();
    row += len;
  }
  if (cfg.projection.size() == 0) {
    // Pooled centroids span at most K1 - 1 directions, so the trailing rows
    // come from the null space of the covariance.
    require(cfg.m2 <= cfg.m1, "init_hierarchy: m2 must not exceed m1 for the PCA projection");
    cfg.offset = pooled.colwise().mean().transpose();
    const Matrix centered = pooled.rowwise() - cfg.offset.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(1, pooled.rows() - 1));
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw Error("init_hierarchy: eigen decomposition failed");
    cfg.projection.resize(cfg.m2, cfg.m1);
    for (int r = 0; r < cfg.m2; ++r) cfg.projection.row(r) = es.eigenvectors().col(cfg.m1 - 1 - r).transpose();
  }
  Matrix centered = pooled;
  if (cfg.offset.size() == centered.cols()) centered.rowwise() -= cfg.offset.transpose();
  st.bank2 = kmeans_init(centered * cfg.projection.transpose(), cfg.K2, cfg.init_restarts,
                         seed + 2);
  st.cfg = std::move(cfg);
  return st;
}

HierarchyGradients hierarchy_gradients(const TwoLevelResult& fwd, const HierarchyState& state,
                                       const TrainerConfig& trainer, double T) {
  HierarchyGradients g;
  const FreeEnergyParams rep{trainer.lambda, trainer.min_pair_dist_guard};
  const double n1 = static_cast<double>(fwd.tokens.rows());
  const double n2 = static_cast<double>(fwd.Z2.rows());

  const Matrix w1 = distance_weights(fwd.level1, T, trainer.sg_on_Q);
  kernels::parallel::prototype_grad(fwd.tokens, state.bank1.P, w1, g.grad_P1);
  g.grad_P1 /= n1;

  const Matrix w2 = distance_weights(fwd.level2, T, trainer.sg_on_Q);
  kernels::parallel::prototype_grad(fwd.Z2, state.bank2.P, w2, g.grad_P2);
  g.grad_P2 /= n2;

  Matrix gz2;
  kernels::parallel::embedding_grad(fwd.Z2, state.bank2.P, w2, gz2);
  gz2 /= n2;
  Matrix centered = fwd.pooled;
  if (state.cfg.offset.size() == centered.cols()) centered.rowwise() -= state.cfg.offset.transpose();
  g.grad_projection = gz2.transpose() * centered;

  if (state.cfg.full_backprop) {
    // Upstream on each level-1 centroid: W^T g_doc / tokens_in_doc.
    const Matrix upstream_doc = gz2 * state.cfg.projection;  // docs x m1
    const Matrix& P1 = state.bank1.P;
    const Matrix& Q = fwd.level1.Q;
    for (std::size_t d = 0; d + 1 < fwd.doc_offsets.size(); ++d) {
      const Eigen::Index begin = fwd.doc_offsets[d], end = fwd.doc_offsets[d + 1];
      const Eigen::RowVectorXd u =
          upstream_doc.row(static_cast<Eigen::Index>(d)) / static_cast<double>(end - begin);
      for (Eigen::Index i = begin; i < end; ++i) {
        const double mu_u = fwd.M1.row(i).dot(u);
        for (Eigen::Index k = 0; k < P1.rows(); ++k) {
          const double q = Q(i, k);
          g.grad_P1.row(k) += q * u;
          if (!trainer.sg_on_Q) {
            const double pu = P1.row(k).dot(u);
            g.grad_P1.row(k) -= (2.0 / T) * q * (pu - mu_u) * (P1.row(k) - fwd.tokens.row(i));
          }
        }
      }
    }
  }
  if (trainer.lambda > 0.0) {
    g.grad_P1 += repulsion_grad(state.bank1.P, rep);
    g.grad_P2 += repulsion_grad(state.bank2.P, rep);
  }
  return g;
}

std::vector<LevelAudit> train_hierarchy(HierarchyState& state, const TopicCorpus& corpus,
                                        const TrainerConfig& trainer) {
  trainer.validate();
  state.cfg.validate();
  std::vector<LevelAudit> audits;
  for (int e = 0; e < trainer.epochs; ++e) {
    const double T = anneal(trainer.schedule, state.epoch);
    TwoLevelResult fwd;
    try {
      fwd = two_level_forward(corpus.docs, state.bank1, state.bank2, state.cfg, T, T);
    } catch (const InvariantViolation& ex) {
      throw InvariantViolation("hierarchy epoch " + std::to_string(state.epoch) + ": " + ex.what());
    }
    LevelAudit audit = fwd.audit;
    audit.epoch = state.epoch;
    if (!corpus.topic.empty()) {
      const ClusteringScore s = score_clustering(hard_labels(fwd.level2.Q), corpus.topic);
      audit.acc = s.acc;
      audit.nmi = s.nmi;
      audit.ari = s.ari;
    }
    HierarchyGradients g = hierarchy_gradients(fwd, state, trainer, T);
    if (!g.grad_P1.allFinite() || !g.grad_P2.allFinite() || !g.grad_projection.allFinite())
      throw InvariantViolation("hierarchy epoch " + std::to_string(state.epoch) +
                               ": non-finite gradient");
    auto clip = [&](Matrix& m) { m = m.cwiseMax(-trainer.clip).cwiseMin(trainer.clip); };
    clip(g.grad_P1);
    clip(g.grad_P2);
    clip(g.grad_projection);
    state.bank1.P -= trainer.eta_P * g.grad_P1;
    state.bank2.P -= trainer.eta_P * g.grad_P2;
    state.cfg.projection -= trainer.eta_theta * g.grad_projection;
    audits.push_back(audit);
    ++state.epoch;
  }
  return audits;
}

}  // namespace ddcl
