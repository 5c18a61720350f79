#pragma once

#include <Eigen/Dense>

#include <string>

namespace ddcl {

// Dense row-major storage; row n of an N x m matrix is token/prototype n.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

std::string shape_str(const Matrix& a);

}  // namespace ddcl
