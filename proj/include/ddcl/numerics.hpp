#pragma once

#include "ddcl/matrix.hpp"

namespace ddcl {

// N x K matrix of squared Euclidean distances between rows of Z and rows of P.
Matrix pairwise_sq_dists(const Matrix& Z, const Matrix& P);

// Row-wise softmax with max subtraction. Throws on NaN input.
Matrix stable_softmax_rows(const Matrix& A);

// gain * (x - mean) / sqrt(var + eps) + bias, population variance.
Vector layer_norm(const Vector& x, const Vector& gain, const Vector& bias, double eps = 1e-5);

struct PcaModel {
  Vector mean;
  Matrix components;  // m_out x d, orthonormal rows
  Vector explained_variance;
  double explained_variance_ratio = 0.0;

  Eigen::Index input_dim() const { return components.cols(); }
  Eigen::Index output_dim() const { return components.rows(); }
};

// Top-m_out eigenvectors of the sample covariance. Each component is signed so
// its largest-magnitude entry is positive.
PcaModel pca_fit(const Matrix& X, Eigen::Index m_out);
Matrix pca_project(const PcaModel& model, const Matrix& X);
Matrix pca_reconstruct(const PcaModel& model, const Matrix& Y);

// Zero mean, unit (population) variance per column. Constant columns are only
// centered.
Matrix standardize_columns(const Matrix& X);

}  // namespace ddcl
