#pragma once

#include "ddcl/loss.hpp"
#include "ddcl/matrix.hpp"
#include "ddcl/trainer.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace ddcl {

// Scalar objective over a flat parameter vector whose first n_theta entries
// are encoder parameters and the rest prototype coordinates.
struct ParamObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;  // may be empty
  Eigen::Index n_theta = 0;
};

struct HessianBlocks {
  Matrix H_tt;  // n_theta x n_theta
  Matrix H_tP;  // n_theta x n_P
  Matrix H_PP;  // n_P x n_P
  double grad_norm = 0.0;  // at the evaluation point, when a gradient is available

  Eigen::Index n_theta() const { return H_tt.rows(); }
  Eigen::Index n_P() const { return H_PP.rows(); }
  Matrix full() const;
};

// Central second differences of the objective value, step h * max(1, |x_i|),
// symmetrized. Throws on non-finite entries.
HessianBlocks estimate_hessian_blocks(const ParamObjective& f, const Vector& point,
                                      double h = 1e-4);

// Central differences of the analytic gradient, symmetrized. Independent
// estimator used to cross-check estimate_hessian_blocks.
Matrix hessian_from_gradient(const ParamObjective& f, const Vector& point, double h = 1e-5);

// [[eta_theta H_tt, eta_theta H_tP], [eta_P H_tP^T, eta_P H_PP]]
Matrix assemble_jacobian(const HessianBlocks& blocks, double eta_theta, double eta_P);

struct StabilityVerdict {
  std::vector<std::complex<double>> eigenvalues;
  double min_real_part = 0.0;
  bool stable = false;  // min_real_part > 1e-8
  bool symmetric_part_pd = false;  // fast sufficient check
  double sufficient_bound = 0.0;   // right-hand side of the ratio condition
  bool sufficient_condition_holds = false;
  double epsilon_used = 0.0;
  double lambda_min_PP = 0.0, lambda_max_PP = 0.0, lambda_min_tt = 0.0;
  double coupling_norm = 0.0;  // spectral norm of H_tP
  double grad_norm = 0.0;
};

inline constexpr double kStabilityRealTol = 1e-8;

// Eigenvalues of the nonsymmetric J (Hessenberg + shifted QR), the ratio bound
// lambda_min(H_PP) / (|H_tP|^2 / lambda_min(H_tt) + lambda_max(H_PP)), and the
// Cholesky test on the symmetric part of J.
StabilityVerdict stability_verdict(const Matrix& J, const HessianBlocks& blocks, double eta_theta,
                                   double eta_P);

// Cholesky of (J + J^T)/2 - 1e-8 I. Success implies every eigenvalue of J has
// real part > 1e-8.
bool symmetric_part_positive_definite(const Matrix& J);

// Largest singular value by power iteration on A^T A.
double spectral_norm(const Matrix& A, int max_iter = 1000, double tol = 1e-13);

// Heuristic stand-ins for the fast-subsystem rate and the slow-curvature bound
// of the time-scale condition; not estimators with guarantees.
struct TimescaleProxies {
  double mu_P = 0.0;  // lambda_min(H_PP)
  double L = 0.0;     // lambda_max of the Schur complement H_tt - H_tP H_PP^-1 H_tP^T
  double epsilon_threshold = 0.0;  // mu_P / L
};

TimescaleProxies timescale_proxies(const HessianBlocks& blocks);

// Linear encoder Z = X W^T (W: m x d) with prototypes P (K x m); objective is
// the free energy L_q + repulsion at fixed T. Parameters are packed as
// [vec(W) row-major, vec(P) row-major].
struct LinearEncoderSystem {
  Matrix X;
  Eigen::Index m = 1;
  Eigen::Index K = 2;
  double T = 1.0;
  FreeEnergyParams repulsion;

  Eigen::Index n_theta() const { return m * X.cols(); }
  Eigen::Index n_P() const { return K * m; }
  Vector pack(const Matrix& W, const Matrix& P) const;
  void unpack(const Vector& x, Matrix& W, Matrix& P) const;
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  ParamObjective objective() const;
};

struct StationaryRun {
  Vector point;
  double grad_norm = 0.0;
  int steps = 0;
  bool converged = false;
};

// Plain two-rate gradient descent on the system until the full gradient norm
// drops below tol.
StationaryRun descend_to_stationary(const LinearEncoderSystem& sys, Vector start, double eta_P,
                                    double epsilon, double tol, int max_steps);

struct AuditPoint {
  Matrix Z;
  Matrix P;
  double T = 1.0;
  double lambda = 0.0;
};

struct LyapunovReport {
  std::vector<double> W;
  int steps = 0;
  int violations = 0;
  double max_relative_increase = 0.0;  // max over steps of dW / |W|
  double tolerance = 1e-6;
};

// Counts steps where W increases by more than tolerance * |W|.
LyapunovReport lyapunov_audit(const std::vector<AuditPoint>& trajectory, double tolerance = 1e-6);

struct AblationRow {
  double epsilon = 0.0;
  double best_acc = 0.0;
  double initial_S_P = 0.0;
  double final_S_P = 0.0;
  // First epoch at which S(P) < 1% of its initial value, -1 if never.
  int collapse_epoch = -1;
  std::vector<EpochLog> logs;
};

// One train() per epsilon with eta_P fixed and eta_theta = epsilon * eta_P,
// all from the same initial state and data. Grid points run concurrently;
// rows are returned sorted by epsilon.
std::vector<AblationRow> ablation_sweep(const std::vector<double>& epsilons,
                                        const TrainerConfig& base, const TrainerState& initial,
                                        const TrainingData& data, int threads = 1);

}  // namespace ddcl
