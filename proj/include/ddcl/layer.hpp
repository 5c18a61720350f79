#pragma once

#include "ddcl/matrix.hpp"
#include "ddcl/rng.hpp"

#include <vector>

namespace ddcl {

// K prototypes in R^m, one per row. These act as the layer's static keys and
// values.
struct PrototypeBank {
  Matrix P;

  PrototypeBank() = default;
  explicit PrototypeBank(Matrix prototypes);

  Eigen::Index K() const { return P.rows(); }
  Eigen::Index dim() const { return P.cols(); }
};

struct LayerParams {
  Matrix W_O;  // m x m output projection
  Vector ln_gain;
  Vector ln_bias;
  double ln_eps = 1e-5;

  // W_O = I, gain = 1, bias = 0.
  static LayerParams identity(Eigen::Index m);
};

struct MultiHeadBank {
  std::vector<Matrix> projections;  // W_h, each m_h x m
  std::vector<PrototypeBank> banks;  // P^(h), each K x m_h

  std::size_t heads() const { return banks.size(); }
  Eigen::Index head_dim() const { return banks.empty() ? 0 : banks.front().dim(); }
  Eigen::Index model_dim() const { return projections.empty() ? 0 : projections.front().cols(); }

  // Projections drawn uniformly from +-1/sqrt(m); prototypes standard normal.
  static MultiHeadBank random(Eigen::Index m, std::size_t heads, Eigen::Index K, Rng& rng);
};

// Squared distances and Boltzmann weights from one evaluation.
struct Assignment {
  Matrix D;  // N x K squared distances
  Matrix Q;  // N x K, rows sum to 1
};

Assignment boltzmann_assign(const Matrix& Z, const Matrix& P, double T);

// Q = softmax(-D / T) row-wise.
Matrix assign(const Matrix& Z, const PrototypeBank& bank, double T);

// M[n] = sum_k Q[n][k] P[k].
Matrix soft_centroids(const Matrix& Q, const PrototypeBank& bank);

struct ForwardResult {
  Matrix H;  // N x m layer output
  Matrix Q;
  Matrix M;
  Matrix D;
};

// H[n] = LayerNorm(Z[n] + W_O M[n]).
ForwardResult forward(const Matrix& Z, const PrototypeBank& bank, const LayerParams& params,
                      double T);

struct MultiHeadResult {
  Matrix H;
  std::vector<Matrix> head_inputs;  // Z W_h^T per head
  std::vector<Matrix> Q;
  std::vector<Matrix> M;
};

MultiHeadResult multi_head_forward(const Matrix& Z, const MultiHeadBank& mh,
                                   const LayerParams& params, double T);

// LayerNorm(Z[n] + W_O O[n]) for every row.
Matrix residual_layer_norm(const Matrix& Z, const Matrix& O, const LayerParams& params);

}  // namespace ddcl
