#pragma once

#include "ddcl/layer.hpp"
#include "ddcl/matrix.hpp"

#include <string>

// Competitive loss and everything differentiated from it. All losses are batch
// means over the N tokens; gradients are gradients of those means.
namespace ddcl {

inline constexpr double kDecompositionTol = 1e-8;

struct LossReport {
  double L_q = 0.0;     // mean_n sum_k q_nk d_nk
  double L_OLS = 0.0;   // mean_n min_k d_nk
  double L_soft = 0.0;  // mean_n |z_n - mu_n|^2
  double V_soft = 0.0;  // mean_n sum_k q_nk |p_k - mu_n|^2
  double V_alg = 0.0;   // L_q - L_OLS

  // |L_q - (L_soft + V_soft)|
  double identity_residual() const;
  std::string to_string() const;
};

// Loss terms from an already evaluated assignment and centroids.
LossReport loss_report(const Matrix& Z, const Matrix& P, const Assignment& a, const Matrix& M);

// Throws InvariantViolation when V_alg < -1e-8, V_soft < 0, the soft identity
// misses by more than 1e-8 (relative to max(1, L_q)).
void check_report(const LossReport& r, const std::string& context = {});

// One assignment evaluation, all five terms, invariants checked.
LossReport decompose(const Matrix& Z, const PrototypeBank& bank, double T);

// L_q alone.
double competitive_loss(const Matrix& Z, const Matrix& P, double T);

// sum_n (diag(q_n) - q_n q_n^T), K x K. Summed, not averaged.
Matrix sigma_q(const Matrix& Q);

// Gradient of V_soft w.r.t. P with Q held fixed: (2/N) Sigma_q P.
Matrix separation_force(const PrototypeBank& bank, const Matrix& Q);

// dL_q/dd_nk: q_nk under stop-gradient, q_nk (1 - (d_nk - dbar_n)/T) otherwise.
Matrix distance_weights(const Assignment& a, double T, bool stop_gradient_on_Q);

// Gradient of L_q w.r.t. the prototypes. With stop_gradient_on_Q the
// assignments are constants: G[k] = (2/N) sum_n q_nk (p_k - z_n).
Matrix grad_prototypes(const Matrix& Z, const PrototypeBank& bank, double T,
                       bool stop_gradient_on_Q);

// Gradient of L_q w.r.t. the embeddings Z (N x m).
Matrix grad_embeddings(const Matrix& Z, const PrototypeBank& bank, double T,
                       bool stop_gradient_on_Q);

// Per-token encoder signal 2 (z_n - mu_n): the gradient of the summed loss
// w.r.t. z_n under stop-gradient on Q.
Matrix grad_encoder_signal(const Matrix& Z, const Matrix& M);

struct FreeEnergyParams {
  double lambda = 0.0;
  double min_pair_dist_guard = 1e-6;
};

// (lambda / 2) sum over ordered pairs j != k of |p_j - p_k|^-2. Each unordered
// pair contributes twice. Throws if any pair is closer than the guard.
double repulsion_energy(const Matrix& P, const FreeEnergyParams& params);
Matrix repulsion_grad(const Matrix& P, const FreeEnergyParams& params);

// W = L_q + repulsion.
double free_energy(const Matrix& Z, const PrototypeBank& bank, double T,
                   const FreeEnergyParams& params);
Matrix grad_free_energy_P(const Matrix& Z, const PrototypeBank& bank, double T,
                          const FreeEnergyParams& params, bool stop_gradient_on_Q = false);

// dL_q/dT = (1 / (N T^2)) sum_n Var_{q_n}[d_n] >= 0.
double dLq_dT(const Matrix& Z, const PrototypeBank& bank, double T);

// lambda > 2 eta_P K (K - 1) / 2
bool check_regularity(double lambda, double eta_P, Eigen::Index K);

}  // namespace ddcl
