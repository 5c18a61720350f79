#include "ddcl/stability.hpp"

#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"
#include "ddcl/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ddcl {

Matrix HessianBlocks::full() const {
  const Eigen::Index a = n_theta(), b = n_P();
  Matrix H(a + b, a + b);
  H.topLeftCorner(a, a) = H_tt;
  H.topRightCorner(a, b) = H_tP;
  H.bottomLeftCorner(b, a) = H_tP.transpose();
  H.bottomRightCorner(b, b) = H_PP;
  return H;
}

namespace {

HessianBlocks split_blocks(const Matrix& H, Eigen::Index n_theta) {
  const Eigen::Index n_P = H.rows() - n_theta;
  HessianBlocks b;
  b.H_tt = H.topLeftCorner(n_theta, n_theta);
  b.H_tP = H.topRightCorner(n_theta, n_P);
  b.H_PP = H.bottomRightCorner(n_P, n_P);
  return b;
}

double step_for(double x, double h) { return h * std::max(1.0, std::abs(x)); }

}  // namespace

HessianBlocks estimate_hessian_blocks(const ParamObjective& f, const Vector& point, double h) {
  const Eigen::Index n = point.size();
  require(f.n_theta >= 0 && f.n_theta <= n, "estimate_hessian_blocks: bad n_theta");
  Matrix H(n, n);
  Vector x = point;
  const double f0 = f.value(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = step_for(point(i), h);
    x(i) = point(i) + hi;
    const double fp = f.value(x);
    x(i) = point(i) - hi;
    const double fm = f.value(x);
    x(i) = point(i);
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double hj = step_for(point(j), h);
      double acc = 0.0;
      for (int si : {1, -1})
        for (int sj : {1, -1}) {
          x(i) = point(i) + si * hi;
          x(j) = point(j) + sj * hj;
          acc += si * sj * f.value(x);
        }
      x(i) = point(i);
      x(j) = point(j);
      H(i, j) = H(j, i) = acc / (4.0 * hi * hj);
    }
  }
  if (!H.allFinite()) throw Error("estimate_hessian_blocks: non-finite Hessian entries");
  HessianBlocks b = split_blocks(0.5 * (H + H.transpose()), f.n_theta);
  if (f.gradient) b.grad_norm = f.gradient(point).norm();
  return b;
}

Matrix hessian_from_gradient(const ParamObjective& f, const Vector& point, double h) {
  require(static_cast<bool>(f.gradient), "hessian_from_gradient: objective has no gradient");
  const Eigen::Index n = point.size();
  Matrix H(n, n);
  Vector x = point;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = step_for(point(i), h);
    x(i) = point(i) + hi;
    const Vector gp = f.gradient(x);
    x(i) = point(i) - hi;
    const Vector gm = f.gradient(x);
    x(i) = point(i);
    H.col(i) = (gp - gm) / (2.0 * hi);
  }
  return 0.5 * (H + H.transpose());
}

Matrix assemble_jacobian(const HessianBlocks& b, double eta_theta, double eta_P) {
  const Eigen::Index a = b.n_theta(), p = b.n_P();
  require(b.H_tt.allFinite() && b.H_tP.allFinite() && b.H_PP.allFinite(),
          "assemble_jacobian: non-finite blocks");
  Matrix J(a + p, a + p);
  J.topLeftCorner(a, a) = eta_theta * b.H_tt;
  J.topRightCorner(a, p) = eta_theta * b.H_tP;
  J.bottomLeftCorner(p, a) = eta_P * b.H_tP.transpose();
  J.bottomRightCorner(p, p) = eta_P * b.H_PP;
  return J;
}

double spectral_norm(const Matrix& A, int max_iter, double tol) {
  if (A.size() == 0) return 0.0;
  const Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(AtA.rows()) / std::sqrt(double(AtA.rows()));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = AtA * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = w.dot(AtA * w);
    v = w;
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

bool symmetric_part_positive_definite(const Matrix& J) {
  require(J.rows() == J.cols(), "symmetric_part_positive_definite: J must be square");
  Eigen::MatrixXd S = 0.5 * (J + J.transpose());
  S.diagonal().array() -= kStabilityRealTol;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  return llt.info() == Eigen::Success;
}

namespace {

std::pair<double, double> sym_extremes(const Matrix& A) {
  if (A.size() == 0) return {std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN()};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(A), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("symmetric eigen-solver did not converge");
  return {es.eigenvalues()(0), es.eigenvalues()(A.rows() - 1)};
}

}  // namespace

StabilityVerdict stability_verdict(const Matrix& J, const HessianBlocks& blocks, double eta_theta,
                                   double eta_P) {
  require(J.rows() == J.cols(), "stability_verdict: J must be square");
  StabilityVerdict v;
  v.epsilon_used = eta_P > 0.0 ? eta_theta / eta_P : std::numeric_limits<double>::infinity();
  v.grad_norm = blocks.grad_norm;

  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(J), false);
  if (es.info() != Eigen::Success) throw Error("stability_verdict: eigen-solver did not converge");
  v.min_real_part = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    v.eigenvalues.push_back(es.eigenvalues()(i));
    v.min_real_part = std::min(v.min_real_part, es.eigenvalues()(i).real());
  }
  v.stable = v.min_real_part > kStabilityRealTol;
  v.symmetric_part_pd = symmetric_part_positive_definite(J);

  const auto [pp_min, pp_max] = sym_extremes(blocks.H_PP);
  v.lambda_min_PP = pp_min;
  v.lambda_max_PP = pp_max;
  v.coupling_norm = spectral_norm(blocks.H_tP);
  double coupling = 0.0;
  if (blocks.n_theta() > 0) {
    v.lambda_min_tt = sym_extremes(blocks.H_tt).first;
    coupling = v.lambda_min_tt > 0.0 ? v.coupling_norm * v.coupling_norm / v.lambda_min_tt
                                     : std::numeric_limits<double>::quiet_NaN();
  }
  v.sufficient_bound = pp_min / (coupling + pp_max);
  v.sufficient_condition_holds = std::isfinite(v.sufficient_bound) &&
                                 v.epsilon_used < v.sufficient_bound;
  return v;
}

TimescaleProxies timescale_proxies(const HessianBlocks& b) {
  TimescaleProxies t;
  t.mu_P = sym_extremes(b.H_PP).first;
  if (b.n_theta() == 0) return t;
  const Eigen::MatrixXd PP = b.H_PP;
  const Eigen::MatrixXd tP = b.H_tP;
  const Eigen::MatrixXd schur = Eigen::MatrixXd(b.H_tt) - tP * PP.ldlt().solve(tP.transpose());
  t.L = sym_extremes(Matrix(0.5 * (schur + schur.transpose()))).second;
  t.epsilon_threshold = t.L > 0.0 ? t.mu_P / t.L : std::numeric_limits<double>::infinity();
  return t;
}

Vector LinearEncoderSystem::pack(const Matrix& W, const Matrix& P) const {
  require(W.rows() == m && W.cols() == X.cols(), "LinearEncoderSystem: W shape");
  require(P.rows() == K && P.cols() == m, "LinearEncoderSystem: P shape");
  Vector x(n_theta() + n_P());
  x.head(n_theta()) = Eigen::Map<const Vector>(W.data(), W.size());
  x.tail(n_P()) = Eigen::Map<const Vector>(P.data(), P.size());
  return x;
}

void LinearEncoderSystem::unpack(const Vector& x, Matrix& W, Matrix& P) const {
  require(x.size() == n_theta() + n_P(), "LinearEncoderSystem: parameter length");
  W = Eigen::Map<const Matrix>(x.data(), m, X.cols());
  P = Eigen::Map<const Matrix>(x.data() + n_theta(), K, m);
}

double LinearEncoderSystem::value(const Vector& x) const {
  Matrix W, P;
  unpack(x, W, P);
  return competitive_loss(X * W.transpose(), P, T) + repulsion_energy(P, repulsion);
}

Vector LinearEncoderSystem::gradient(const Vector& x) const {
  Matrix W, P;
  unpack(x, W, P);
  const Matrix Z = X * W.transpose();
  const Assignment a = boltzmann_assign(Z, P, T);
  const Matrix weights = distance_weights(a, T, false);
  const double inv = 1.0 / static_cast<double>(Z.rows());
  Matrix gP, gZ;
  kernels::parallel::prototype_grad(Z, P, weights, gP);
  kernels::parallel::embedding_grad(Z, P, weights, gZ);
  gP = gP * inv + repulsion_grad(P, repulsion);
  const Matrix gW = (gZ * inv).transpose() * X;
  return pack(gW, gP);
}

ParamObjective LinearEncoderSystem::objective() const {
  ParamObjective f;
  f.value = [this](const Vector& x) { return value(x); };
  f.gradient = [this](const Vector& x) { return gradient(x); };
  f.n_theta = n_theta();
  return f;
}

StationaryRun descend_to_stationary(const LinearEncoderSystem& sys, Vector start, double eta_P,
                                    double epsilon, double tol, int max_steps) {
  StationaryRun r;
  r.point = std::move(start);
  const Eigen::Index nt = sys.n_theta();
  for (r.steps = 0; r.steps < max_steps; ++r.steps) {
    Vector g = sys.gradient(r.point);
    r.grad_norm = g.norm();
    if (!std::isfinite(r.grad_norm)) throw InvariantViolation("descend_to_stationary: diverged");
    if (r.grad_norm < tol) {
      r.converged = true;
      return r;
    }
    r.point.head(nt) -= epsilon * eta_P * g.head(nt);
    r.point.tail(sys.n_P()) -= eta_P * g.tail(sys.n_P());
  }
  r.grad_norm = sys.gradient(r.point).norm();
  r.converged = r.grad_norm < tol;
  return r;
}

LyapunovReport lyapunov_audit(const std::vector<AuditPoint>& trajectory, double tolerance) {
  LyapunovReport rep;
  rep.tolerance = tolerance;
  for (const auto& pt : trajectory) {
    rep.W.push_back(competitive_loss(pt.Z, pt.P, pt.T) +
                    repulsion_energy(pt.P, FreeEnergyParams{pt.lambda, 1e-12}));
  }
  for (std::size_t i = 1; i < rep.W.size(); ++i) {
    ++rep.steps;
    const double dW = rep.W[i] - rep.W[i - 1];
    const double scale = std::max(std::abs(rep.W[i - 1]), std::numeric_limits<double>::min());
    rep.max_relative_increase = std::max(rep.max_relative_increase, dW / scale);
    if (dW > tolerance * std::abs(rep.W[i - 1])) ++rep.violations;
  }
  return rep;
}

std::vector<AblationRow> ablation_sweep(const std::vector<double>& epsilons,
                                        const TrainerConfig& base, const TrainerState& initial,
                                        const TrainingData& data, int threads) {
  for (double e : epsilons) require(e > 0.0, "ablation_sweep: epsilon values must be positive");
  std::vector<double> grid = epsilons;
  std::sort(grid.begin(), grid.end());
  std::vector<AblationRow> rows(grid.size());
  std::vector<std::string> errors(grid.size());
  std::vector<int> invariant(grid.size(), 0);

  const int n = static_cast<int>(grid.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads))
  for (int i = 0; i < n; ++i) {
    try {
      TrainerConfig cfg = base;
      cfg.eta_theta = grid[i] * base.eta_P;
      TrainerState state = initial;
      AblationRow row;
      row.epsilon = grid[i];
      row.logs = train(state, data, cfg);
      if (!row.logs.empty()) {
        row.initial_S_P = row.logs.front().S_P;
        for (const auto& log : row.logs) {
          row.best_acc = std::max(row.best_acc, log.acc);
          if (row.collapse_epoch < 0 && log.S_P < 0.01 * row.initial_S_P)
            row.collapse_epoch = log.epoch;
        }
      }
      row.final_S_P = state.bank.K() >= 2 ? prototype_separation(state.bank.P) : 0.0;
      if (row.collapse_epoch < 0 && row.final_S_P < 0.01 * row.initial_S_P)
        row.collapse_epoch = cfg.epochs;
      rows[i] = std::move(row);
    } catch (const InvariantViolation& e) {
      errors[i] = e.what();
      invariant[i] = 1;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (errors[i].empty()) continue;
    const std::string msg = "ablation epsilon=" + std::to_string(grid[i]) + ": " + errors[i];
    if (invariant[i]) throw InvariantViolation(msg);
    throw Error(msg);
  }
  return rows;
}

}  // namespace ddcl
