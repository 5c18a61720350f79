#include "ddcl/loss.hpp"

#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace ddcl {

double LossReport::identity_residual() const { return std::abs(L_q - (L_soft + V_soft)); }

std::string LossReport::to_string() const {
  std::ostringstream os;
  os << std::setprecision(17) << "L_q=" << L_q << " L_OLS=" << L_OLS << " L_soft=" << L_soft
     << " V_soft=" << V_soft << " V_alg=" << V_alg;
  return os.str();
}

LossReport loss_report(const Matrix& Z, const Matrix& P, const Assignment& a, const Matrix& M) {
  const Eigen::Index N = Z.rows(), K = P.rows();
  require(N > 0, "loss: empty batch");
  double lq = 0.0, ols = 0.0, soft = 0.0, v = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) {
    double row_q = 0.0, row_v = 0.0;
    double row_min = a.D(n, 0);
    for (Eigen::Index k = 0; k < K; ++k) {
      const double q = a.Q(n, k);
      row_q += q * a.D(n, k);
      row_min = std::min(row_min, a.D(n, k));
      row_v += q * (P.row(k) - M.row(n)).squaredNorm();
    }
    lq += row_q;
    ols += row_min;
    v += row_v;
    soft += (Z.row(n) - M.row(n)).squaredNorm();
  }
  const double inv = 1.0 / static_cast<double>(N);
  LossReport r;
  r.L_q = lq * inv;
  r.L_OLS = ols * inv;
  r.L_soft = soft * inv;
  r.V_soft = v * inv;
  r.V_alg = r.L_q - r.L_OLS;
  return r;
}

void check_report(const LossReport& r, const std::string& context) {
  const std::string where = context.empty() ? "" : context + ": ";
  const double scale = std::max(1.0, std::abs(r.L_q));
  if (!std::isfinite(r.L_q) || !std::isfinite(r.V_soft) || !std::isfinite(r.L_OLS))
    throw InvariantViolation(where + "non-finite loss " + r.to_string());
  if (r.V_alg < -kDecompositionTol)
    throw InvariantViolation(where + "V_alg < -1e-8 " + r.to_string());
  if (r.V_soft < 0.0) throw InvariantViolation(where + "V_soft < 0 " + r.to_string());
  if (r.identity_residual() > kDecompositionTol * scale)
    throw InvariantViolation(where + "L_q != L_soft + V_soft " + r.to_string());
}

LossReport decompose(const Matrix& Z, const PrototypeBank& bank, double T) {
  const Assignment a = boltzmann_assign(Z, bank.P, T);
  const Matrix M = soft_centroids(a.Q, bank);
  LossReport r = loss_report(Z, bank.P, a, M);
  check_report(r, "decompose");
  return r;
}

double competitive_loss(const Matrix& Z, const Matrix& P, double T) {
  const Assignment a = boltzmann_assign(Z, P, T);
  double lq = 0.0;
  for (Eigen::Index n = 0; n < Z.rows(); ++n) {
    double row_q = 0.0;
    for (Eigen::Index k = 0; k < P.rows(); ++k) row_q += a.Q(n, k) * a.D(n, k);
    lq += row_q;
  }
  return lq * (1.0 / static_cast<double>(Z.rows()));
}

Matrix sigma_q(const Matrix& Q) {
  const Eigen::Index K = Q.cols();
  Matrix S = Matrix::Zero(K, K);
  for (Eigen::Index n = 0; n < Q.rows(); ++n) {
    const auto q = Q.row(n);
    for (Eigen::Index i = 0; i < K; ++i) {
      S(i, i) += q(i);
      for (Eigen::Index j = 0; j < K; ++j) S(i, j) -= q(i) * q(j);
    }
  }
  return S;
}

Matrix separation_force(const PrototypeBank& bank, const Matrix& Q) {
  require(Q.cols() == bank.K(), "separation_force: Q/bank shape mismatch");
  require(Q.rows() > 0, "separation_force: empty Q");
  return (2.0 / static_cast<double>(Q.rows())) * sigma_q(Q) * bank.P;
}

Matrix distance_weights(const Assignment& a, double T, bool stop_gradient_on_Q) {
  if (stop_gradient_on_Q) return a.Q;
  Matrix W(a.Q.rows(), a.Q.cols());
  for (Eigen::Index n = 0; n < a.Q.rows(); ++n) {
    const double dbar = a.Q.row(n).dot(a.D.row(n));
    for (Eigen::Index k = 0; k < a.Q.cols(); ++k)
      W(n, k) = a.Q(n, k) * (1.0 - (a.D(n, k) - dbar) / T);
  }
  return W;
}

Matrix grad_prototypes(const Matrix& Z, const PrototypeBank& bank, double T,
                       bool stop_gradient_on_Q) {
  const Assignment a = boltzmann_assign(Z, bank.P, T);
  const Matrix W = distance_weights(a, T, stop_gradient_on_Q);
  Matrix G;
  kernels::parallel::prototype_grad(Z, bank.P, W, G);
  return G / static_cast<double>(Z.rows());
}

Matrix grad_embeddings(const Matrix& Z, const PrototypeBank& bank, double T,
                       bool stop_gradient_on_Q) {
  const Assignment a = boltzmann_assign(Z, bank.P, T);
  const Matrix W = distance_weights(a, T, stop_gradient_on_Q);
  Matrix G;
  kernels::parallel::embedding_grad(Z, bank.P, W, G);
  return G / static_cast<double>(Z.rows());
}

Matrix grad_encoder_signal(const Matrix& Z, const Matrix& M) {
  require(Z.rows() == M.rows() && Z.cols() == M.cols(), "grad_encoder_signal: shape mismatch");
  return 2.0 * (Z - M);
}

namespace {

void check_pair_guard(double dist, double guard, Eigen::Index j, Eigen::Index k) {
  if (dist < guard) {
    throw Error("repulsion: prototypes " + std::to_string(j) + " and " + std::to_string(k) +
                " are " + std::to_string(dist) + " apart, below guard " + std::to_string(guard));
  }
}

}  // namespace

double repulsion_energy(const Matrix& P, const FreeEnergyParams& params) {
  require(params.lambda >= 0.0, "repulsion: lambda must be >= 0");
  if (params.lambda == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index j = 0; j < P.rows(); ++j)
    for (Eigen::Index k = 0; k < P.rows(); ++k) {
      if (j == k) continue;
      const double d2 = (P.row(j) - P.row(k)).squaredNorm();
      check_pair_guard(std::sqrt(d2), params.min_pair_dist_guard, j, k);
      s += 1.0 / d2;
    }
  return 0.5 * params.lambda * s;
}

Matrix repulsion_grad(const Matrix& P, const FreeEnergyParams& params) {
  require(params.lambda >= 0.0, "repulsion: lambda must be >= 0");
  Matrix G = Matrix::Zero(P.rows(), P.cols());
  if (params.lambda == 0.0) return G;
  for (Eigen::Index j = 0; j < P.rows(); ++j)
    for (Eigen::Index k = 0; k < P.rows(); ++k) {
      if (j == k) continue;
      const auto diff = P.row(j) - P.row(k);
      const double d2 = diff.squaredNorm();
      check_pair_guard(std::sqrt(d2), params.min_pair_dist_guard, j, k);
      G.row(j) -= (2.0 * params.lambda / (d2 * d2)) * diff;
    }
  return G;
}

double free_energy(const Matrix& Z, const PrototypeBank& bank, double T,
                   const FreeEnergyParams& params) {
  return competitive_loss(Z, bank.P, T) + repulsion_energy(bank.P, params);
}

Matrix grad_free_energy_P(const Matrix& Z, const PrototypeBank& bank, double T,
                          const FreeEnergyParams& params, bool stop_gradient_on_Q) {
  return grad_prototypes(Z, bank, T, stop_gradient_on_Q) + repulsion_grad(bank.P, params);
}

double dLq_dT(const Matrix& Z, const PrototypeBank& bank, double T) {
  const Assignment a = boltzmann_assign(Z, bank.P, T);
  double s = 0.0;
  for (Eigen::Index n = 0; n < a.Q.rows(); ++n) {
    const double mean = a.Q.row(n).dot(a.D.row(n));
    double var = 0.0;
    // Centered form avoids E[d^2] - E[d]^2 cancellation.
    for (Eigen::Index k = 0; k < a.Q.cols(); ++k) {
      const double c = a.D(n, k) - mean;
      var += a.Q(n, k) * c * c;
    }
    s += var;
  }
  return s / (static_cast<double>(Z.rows()) * T * T);
}

bool check_regularity(double lambda, double eta_P, Eigen::Index K) {
  const double pairs = static_cast<double>(K) * static_cast<double>(K - 1) / 2.0;
  return lambda > 2.0 * eta_P * pairs;
}

}  // namespace ddcl
