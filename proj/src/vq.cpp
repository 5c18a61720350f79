#include "ddcl/vq.hpp"

#include "ddcl/data.hpp"
#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddcl {

SoftQuantized soft_quantize(const Matrix& tokens, const Codebook& codebook, double T) {
  SoftQuantized out;
  out.Q = assign(tokens, codebook, T);
  out.centroids = soft_centroids(out.Q, codebook);
  return out;
}

HardStepResult hard_quantize_step(const Matrix& tokens, Codebook& codebook, double beta,
                                  double eta) {
  require(beta >= 0.0, "hard_quantize_step: beta must be non-negative");
  require(tokens.cols() == codebook.dim(), "hard_quantize_step: dimension mismatch");
  const Eigen::Index N = tokens.rows(), K = codebook.K();
  require(N > 0, "hard_quantize_step: empty batch");
  Matrix D;
  kernels::parallel::sq_dists(tokens, codebook.P, D);

  HardStepResult r;
  r.indices.resize(static_cast<std::size_t>(N));
  r.counts.assign(static_cast<std::size_t>(K), 0);
  double dist_sum = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < K; ++k)
      if (D(n, k) < D(n, best)) best = k;  // strict: ties keep the lower index
    r.indices[n] = static_cast<int>(best);
    ++r.counts[best];
    dist_sum += D(n, best);
  }
  // Both losses share the value |z - e_k*|^2; they differ in where sg blocks
  // the gradient.
  r.commitment_loss = dist_sum / static_cast<double>(N);
  r.codebook_loss = r.commitment_loss;
  r.total_loss = r.codebook_loss + beta * r.commitment_loss;

  Matrix grad = Matrix::Zero(K, codebook.dim());
  for (Eigen::Index n = 0; n < N; ++n) {
    const int k = r.indices[n];
    grad.row(k) += 2.0 * (codebook.P.row(k) - tokens.row(n));
  }
  for (Eigen::Index k = 0; k < K; ++k)
    if (r.counts[k] > 0) codebook.P.row(k) -= eta * grad.row(k);
  return r;
}

std::vector<double> soft_code_mass(const Matrix& Q) {
  require(Q.rows() > 0, "soft_code_mass: empty Q");
  std::vector<double> mass(static_cast<std::size_t>(Q.cols()));
  const Eigen::RowVectorXd mean = Q.colwise().mean();
  for (Eigen::Index k = 0; k < Q.cols(); ++k) mass[k] = mean(k);
  return mass;
}

std::vector<double> hard_code_mass(const std::vector<int>& indices, Eigen::Index K) {
  require(!indices.empty(), "hard_code_mass: no indices");
  std::vector<double> mass(static_cast<std::size_t>(K), 0.0);
  for (int i : indices) {
    require(i >= 0 && i < K, "hard_code_mass: index out of range");
    mass[i] += 1.0;
  }
  for (auto& m : mass) m /= static_cast<double>(indices.size());
  return mass;
}

double utilization(const std::vector<double>& code_mass, double threshold) {
  require(threshold > 0.0 && threshold < 1.0, "utilization: threshold must be in (0, 1)");
  require(!code_mass.empty(), "utilization: empty codebook");
  const auto active = std::count_if(code_mass.begin(), code_mass.end(),
                                    [&](double m) { return m > threshold; });
  return static_cast<double>(active) / static_cast<double>(code_mass.size());
}

void VqConfig::validate() const {
  require(K >= 1 && dim >= 1 && groups >= 1, "vq: K, dim and groups must be positive");
  require(tokens_per_epoch >= 1 && batch_size >= 1, "vq: token counts must be positive");
  require(epochs >= 0, "vq: epochs must be non-negative");
  require(beta >= 0.0, "vq: beta must be non-negative");
  require(eta_hard >= 0.0, "vq: eta_hard must be non-negative");
  require(threshold > 0.0 && threshold < 1.0, "vq: threshold must be in (0, 1)");
  soft.validate();
}

VqComparison run_vq_comparison(const VqConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng mix_rng = root.split(1);
  const TokenMixture mixture =
      TokenMixture::make(cfg.groups, cfg.dim, cfg.center_scale, cfg.spread, mix_rng);

  Rng init_rng = root.split(2);
  const double range = cfg.init_range > 0.0 ? cfg.init_range : 1.0 / cfg.K;
  Matrix init(cfg.K, cfg.dim);
  for (Eigen::Index i = 0; i < init.size(); ++i) init.data()[i] = init_rng.uniform(-range, range);

  TrainerState soft;
  soft.bank = PrototypeBank(init);
  soft.rng = root.split(3);
  Codebook hard(init);

  VqComparison out;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng token_rng = root.split(100 + static_cast<std::uint64_t>(epoch));
    Labels groups;
    const Matrix tokens = mixture.sample(cfg.tokens_per_epoch, token_rng, &groups);
    const Matrix hard_before = hard.P;

    soft.epoch = epoch - 1;
    const double T = anneal(cfg.soft.schedule, soft.epoch);
    std::vector<double> soft_mass(static_cast<std::size_t>(cfg.K), 0.0);
    std::vector<int> hard_indices;
    hard_indices.reserve(static_cast<std::size_t>(cfg.tokens_per_epoch));
    double min_grad = std::numeric_limits<double>::infinity();
    double min_valg = std::numeric_limits<double>::infinity();
    LossReport last_report;
    HardStepResult last_hard;

    for (int start = 0; start < cfg.tokens_per_epoch; start += cfg.batch_size) {
      const int len = std::min(cfg.batch_size, cfg.tokens_per_epoch - start);
      const Matrix batch = tokens.middleRows(start, len);

      StepGradients g = compute_gradients(soft, batch, cfg.soft, T);
      for (Eigen::Index k = 0; k < cfg.K; ++k) {
        soft_mass[k] += g.assignment.Q.col(k).sum();
        min_grad = std::min(min_grad, g.grad_P.row(k).norm());
      }
      min_valg = std::min(min_valg, g.report.V_alg);
      last_report = g.report;
      apply_gradients(soft, g, cfg.soft);

      last_hard = hard_quantize_step(batch, hard, cfg.beta, cfg.eta_hard);
      hard_indices.insert(hard_indices.end(), last_hard.indices.begin(), last_hard.indices.end());
    }
    for (auto& m : soft_mass) m /= static_cast<double>(cfg.tokens_per_epoch);

    UtilizationRecord s{epoch, soft_mass, utilization(soft_mass, cfg.threshold), cfg.threshold};
    std::vector<double> hm = hard_code_mass(hard_indices, cfg.K);
    UtilizationRecord h{epoch, hm, utilization(hm, cfg.threshold), cfg.threshold};
    out.soft.push_back(std::move(s));
    out.hard.push_back(std::move(h));

    int frozen = 0;
    for (Eigen::Index k = 0; k < cfg.K; ++k)
      if (std::equal(hard.P.row(k).begin(), hard.P.row(k).end(), hard_before.row(k).begin()))
        ++frozen;
    out.hard_frozen_codes.push_back(frozen);
    out.soft_min_code_grad.push_back(min_grad);
    out.soft_min_V_alg.push_back(min_valg);
    out.soft_reports.push_back(last_report);

    EpochLog log;
    log.epoch = epoch;
    log.T = T;
    const Assignment a = boltzmann_assign(tokens, soft.bank.P, T);
    const LossReport r = loss_report(tokens, soft.bank.P, a, soft_centroids(a.Q, soft.bank));
    check_report(r, "vq soft epoch " + std::to_string(epoch));
    log.L_q = r.L_q;
    log.L_OLS = r.L_OLS;
    log.L_soft = r.L_soft;
    log.V_soft = r.V_soft;
    log.V_alg = r.V_alg;
    log.S_P = cfg.K >= 2 ? prototype_separation(soft.bank.P) : 0.0;
    log.H_Q = assignment_entropy(a.Q);
    const ClusteringScore sc = score_clustering(hard_labels(a.Q), groups);
    log.acc = sc.acc;
    log.nmi = sc.nmi;
    log.ari = sc.ari;
    log.min_q = a.Q.minCoeff();
    log.utilization = out.soft.back().utilization;
    out.soft_logs.push_back(log);
    out.hard_results.push_back(std::move(last_hard));
  }
  return out;
}

}  // namespace ddcl
