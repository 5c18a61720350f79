#include "ddcl/numerics.hpp"

#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddcl {

std::string shape_str(const Matrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

Matrix pairwise_sq_dists(const Matrix& Z, const Matrix& P) {
  require(Z.cols() == P.cols(), "pairwise_sq_dists: dimension mismatch " + shape_str(Z) +
                                    " vs " + shape_str(P));
  Matrix D;
  kernels::parallel::sq_dists(Z, P, D);
  return D;
}

Matrix stable_softmax_rows(const Matrix& A) {
  require(!A.hasNaN(), "stable_softmax_rows: NaN in input");
  require(A.allFinite(), "stable_softmax_rows: non-finite input");
  Matrix out = A;
  kernels::parallel::softmax_rows(out);
  return out;
}

Vector layer_norm(const Vector& x, const Vector& gain, const Vector& bias, double eps) {
  const Eigen::Index m = x.size();
  require(m >= 1, "layer_norm: empty input");
  require(gain.size() == m && bias.size() == m, "layer_norm: dimension mismatch");
  require(eps >= 0.0, "layer_norm: eps must be non-negative");
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(m);
  require(var + eps > 0.0, "layer_norm: zero variance with eps = 0");
  const double inv = 1.0 / std::sqrt(var + eps);
  return (gain.array() * (x.array() - mean) * inv + bias.array()).matrix();
}

PcaModel pca_fit(const Matrix& X, Eigen::Index m_out) {
  const Eigen::Index N = X.rows(), d = X.cols();
  require(m_out >= 1 && m_out <= d, "pca_fit: m_out must be in [1, d]");
  require(N > m_out, "pca_fit: need more samples than components");

  PcaModel model;
  model.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(N - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.info() == Eigen::Success, "pca_fit: eigendecomposition failed");
  // Ascending order from Eigen; walk from the top.
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double top = std::max(vals(d - 1), 0.0);
  const double tol = std::max(top, 1e-300) * 1e-12 * static_cast<double>(d);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (vals(i) > tol) ++rank;
  if (rank < m_out) {
    throw Error("pca_fit: covariance rank " + std::to_string(rank) + " is below m_out = " +
                std::to_string(m_out));
  }

  model.components.resize(m_out, d);
  model.explained_variance.resize(m_out);
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) total += std::max(vals(i), 0.0);
  double kept = 0.0;
  for (Eigen::Index c = 0; c < m_out; ++c) {
    const Eigen::Index src = d - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    model.components.row(c) = v.transpose();
    model.explained_variance(c) = vals(src);
    kept += vals(src);
  }
  model.explained_variance_ratio = std::clamp(kept / total, 0.0, 1.0);
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& X) {
  require(X.cols() == model.input_dim(), "pca_project: dimension mismatch");
  return (X.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& Y) {
  require(Y.cols() == model.output_dim(), "pca_reconstruct: dimension mismatch");
  Matrix X = Y * model.components;
  X.rowwise() += model.mean.transpose();
  return X;
}

Matrix standardize_columns(const Matrix& X) {
  Matrix out = X;
  const double N = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    out.col(j).array() -= mean;
    const double var = out.col(j).squaredNorm() / N;
    if (var > 0.0) out.col(j) /= std::sqrt(var);
  }
  return out;
}

}  // namespace ddcl
