#include "ddcl/trainer.hpp"

#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace ddcl {

void AnnealSchedule::validate() const {
  require(Tmin > 0.0, "anneal: Tmin must be positive");
  require(T0 >= Tmin, "anneal: T0 must be >= Tmin");
  require(tau > 0.0, "anneal: tau must be positive");
}

double anneal(const AnnealSchedule& s, double epoch) {
  require(epoch >= 0.0, "anneal: negative epoch");
  return std::max(s.Tmin, s.T0 * std::exp(-epoch / s.tau));
}

EncoderModel EncoderModel::identity() { return {}; }

EncoderModel EncoderModel::fixed_pca(PcaModel model) {
  EncoderModel e;
  e.pca = std::move(model);
  return e;
}

EncoderModel EncoderModel::linear(Matrix weights) {
  require(weights.allFinite(), "EncoderModel: non-finite weights");
  EncoderModel e;
  e.kind = EncoderKind::Linear;
  e.W = std::move(weights);
  return e;
}

Matrix EncoderModel::encode(const Matrix& X) const {
  if (kind == EncoderKind::Linear) {
    require(X.cols() == W.cols(), "encode: input has " + std::to_string(X.cols()) +
                                      " columns, encoder expects " + std::to_string(W.cols()));
    return X * W.transpose();
  }
  if (pca) return pca_project(*pca, X);
  return X;
}

void TrainerConfig::validate() const {
  require(eta_P >= 0.0, "trainer: eta_P must be non-negative");
  require(eta_theta >= 0.0, "trainer: eta_theta must be non-negative");
  require(clip > 0.0, "trainer: clip must be positive");
  require(epochs >= 0, "trainer: epochs must be non-negative");
  require(lambda >= 0.0, "trainer: lambda must be non-negative");
  require(batch_size >= 0, "trainer: batch_size must be non-negative");
  require(min_pair_dist_guard > 0.0, "trainer: min_pair_dist_guard must be positive");
  schedule.validate();
}

StepGradients compute_gradients(const TrainerState& state, const Matrix& X,
                                const TrainerConfig& config, double T) {
  StepGradients g;
  const Matrix Z = state.encoder.encode(X);
  g.assignment = boltzmann_assign(Z, state.bank.P, T);
  const Matrix M = soft_centroids(g.assignment.Q, state.bank);
  g.report = loss_report(Z, state.bank.P, g.assignment, M);
  check_report(g.report, "epoch " + std::to_string(state.epoch));

  const Matrix weights = distance_weights(g.assignment, T, config.sg_on_Q);
  const double inv = 1.0 / static_cast<double>(Z.rows());
  kernels::parallel::prototype_grad(Z, state.bank.P, weights, g.grad_P);
  g.grad_P *= inv;
  if (config.lambda > 0.0) {
    g.grad_P += repulsion_grad(state.bank.P, {config.lambda, config.min_pair_dist_guard});
  }
  if (state.encoder.trainable() && config.eta_theta > 0.0) {
    Matrix gz;
    kernels::parallel::embedding_grad(Z, state.bank.P, weights, gz);
    g.grad_theta = (gz * inv).transpose() * X;
  }
  return g;
}

namespace {

void clip_in_place(Matrix& g, double clip) {
  g = g.cwiseMax(-clip).cwiseMin(clip);
}

}  // namespace

void apply_gradients(TrainerState& state, StepGradients& g, const TrainerConfig& config) {
  if (!g.grad_P.allFinite())
    throw InvariantViolation("epoch " + std::to_string(state.epoch) +
                             ": non-finite prototype gradient; " + g.report.to_string());
  if (g.grad_theta.size() > 0 && !g.grad_theta.allFinite())
    throw InvariantViolation("epoch " + std::to_string(state.epoch) +
                             ": non-finite encoder gradient; " + g.report.to_string());
  clip_in_place(g.grad_P, config.clip);
  state.bank.P -= config.eta_P * g.grad_P;
  if (g.grad_theta.size() > 0) {
    clip_in_place(g.grad_theta, config.clip);
    state.encoder.W -= config.eta_theta * g.grad_theta;
  }
}

EpochLog train_epoch(TrainerState& state, const TrainingData& data, const TrainerConfig& config) {
  const double T = anneal(config.schedule, state.epoch);
  StepGradients g = compute_gradients(state, data.X, config, T);

  EpochLog log;
  log.epoch = state.epoch;
  log.T = T;
  log.L_q = g.report.L_q;
  log.L_OLS = g.report.L_OLS;
  log.L_soft = g.report.L_soft;
  log.V_soft = g.report.V_soft;
  log.V_alg = g.report.V_alg;
  const Matrix& Q = g.assignment.Q;
  log.S_P = state.bank.K() >= 2 ? prototype_separation(state.bank.P) : 0.0;
  log.H_Q = assignment_entropy(Q);
  log.min_q = Q.minCoeff();
  const Eigen::RowVectorXd mean_q = Q.colwise().mean();
  log.utilization =
      static_cast<double>((mean_q.array() > config.utilization_threshold).count()) /
      static_cast<double>(Q.cols());
  if (!data.y.empty()) {
    const ClusteringScore s = score_clustering(hard_labels(Q), data.y);
    log.acc = s.acc;
    log.nmi = s.nmi;
    log.ari = s.ari;
  }
  log.free_energy =
      g.report.L_q + (config.lambda > 0.0
                          ? repulsion_energy(state.bank.P, {config.lambda, config.min_pair_dist_guard})
                          : 0.0);
  log.grad_norm_P = g.grad_P.norm();
  log.grad_norm_theta = g.grad_theta.size() > 0 ? g.grad_theta.norm() : 0.0;

  const Eigen::Index N = data.X.rows();
  if (config.batch_size == 0 || config.batch_size >= N) {
    apply_gradients(state, g, config);
  } else {
    const std::vector<std::size_t> order = state.rng.permutation(static_cast<std::size_t>(N));
    for (Eigen::Index start = 0; start < N; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, N - start);
      Matrix batch(len, data.X.cols());
      for (Eigen::Index i = 0; i < len; ++i)
        batch.row(i) = data.X.row(static_cast<Eigen::Index>(order[start + i]));
      StepGradients bg = compute_gradients(state, batch, config, T);
      apply_gradients(state, bg, config);
    }
  }
  ++state.epoch;
  return log;
}

std::vector<EpochLog> train(TrainerState& state, const TrainingData& data,
                            const TrainerConfig& config, const EpochObserver& observer) {
  config.validate();
  std::vector<EpochLog> logs;
  logs.reserve(static_cast<std::size_t>(config.epochs));
  for (int e = 0; e < config.epochs; ++e) {
    if (observer) {
      const TrainerState before = state;
      logs.push_back(train_epoch(state, data, config));
      observer(logs.back(), before);
    } else {
      logs.push_back(train_epoch(state, data, config));
    }
  }
  return logs;
}

}  // namespace ddcl
