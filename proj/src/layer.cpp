#include "ddcl/layer.hpp"

#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"
#include "ddcl/numerics.hpp"

#include <cmath>

namespace ddcl {

PrototypeBank::PrototypeBank(Matrix prototypes) : P(std::move(prototypes)) {
  require(P.rows() >= 1, "PrototypeBank: need at least one prototype");
  require(P.allFinite(), "PrototypeBank: non-finite prototype entries");
}

LayerParams LayerParams::identity(Eigen::Index m) {
  LayerParams p;
  p.W_O = Matrix::Identity(m, m);
  p.ln_gain = Vector::Ones(m);
  p.ln_bias = Vector::Zero(m);
  return p;
}

MultiHeadBank MultiHeadBank::random(Eigen::Index m, std::size_t heads, Eigen::Index K, Rng& rng) {
  require(heads >= 1, "MultiHeadBank: need at least one head");
  require(m % static_cast<Eigen::Index>(heads) == 0,
          "MultiHeadBank: m = " + std::to_string(m) + " not divisible by H = " +
              std::to_string(heads));
  const Eigen::Index mh = m / static_cast<Eigen::Index>(heads);
  const double a = 1.0 / std::sqrt(static_cast<double>(m));
  MultiHeadBank bank;
  for (std::size_t h = 0; h < heads; ++h) {
    Matrix W(mh, m);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-a, a);
    Matrix P(K, mh);
    for (Eigen::Index i = 0; i < P.size(); ++i) P.data()[i] = rng.normal();
    bank.projections.push_back(std::move(W));
    bank.banks.emplace_back(std::move(P));
  }
  return bank;
}

Assignment boltzmann_assign(const Matrix& Z, const Matrix& P, double T) {
  require(T > 0.0, "assign: temperature must be positive, got " + std::to_string(T));
  require(Z.cols() == P.cols(), "assign: dimension mismatch " + shape_str(Z) + " vs " +
                                    shape_str(P));
  Assignment a;
  kernels::parallel::sq_dists(Z, P, a.D);
  kernels::parallel::boltzmann_rows(a.D, T, a.Q);
  return a;
}

Matrix assign(const Matrix& Z, const PrototypeBank& bank, double T) {
  return boltzmann_assign(Z, bank.P, T).Q;
}

Matrix soft_centroids(const Matrix& Q, const PrototypeBank& bank) {
  require(Q.cols() == bank.K(), "soft_centroids: Q has " + std::to_string(Q.cols()) +
                                    " columns for K = " + std::to_string(bank.K()));
  Matrix M;
  kernels::parallel::mix_rows(Q, bank.P, M);
  return M;
}

Matrix residual_layer_norm(const Matrix& Z, const Matrix& O, const LayerParams& params) {
  const Eigen::Index m = Z.cols();
  require(params.W_O.rows() == m && params.W_O.cols() == O.cols(),
          "forward: W_O shape " + shape_str(params.W_O) + " incompatible");
  const Matrix pre = Z + O * params.W_O.transpose();
  Matrix H(Z.rows(), m);
  for (Eigen::Index n = 0; n < Z.rows(); ++n) {
    H.row(n) = layer_norm(pre.row(n).transpose(), params.ln_gain, params.ln_bias, params.ln_eps)
                   .transpose();
  }
  return H;
}

ForwardResult forward(const Matrix& Z, const PrototypeBank& bank, const LayerParams& params,
                      double T) {
  ForwardResult r;
  Assignment a = boltzmann_assign(Z, bank.P, T);
  r.D = std::move(a.D);
  r.Q = std::move(a.Q);
  r.M = soft_centroids(r.Q, bank);
  r.H = residual_layer_norm(Z, r.M, params);
  return r;
}

MultiHeadResult multi_head_forward(const Matrix& Z, const MultiHeadBank& mh,
                                   const LayerParams& params, double T) {
  const std::size_t H = mh.heads();
  require(H >= 1 && mh.projections.size() == H, "multi_head_forward: malformed head bank");
  const Eigen::Index m = Z.cols();
  require(m % static_cast<Eigen::Index>(H) == 0,
          "multi_head_forward: m = " + std::to_string(m) + " not divisible by H = " +
              std::to_string(H));
  const Eigen::Index mh_dim = m / static_cast<Eigen::Index>(H);

  MultiHeadResult r;
  Matrix concat(Z.rows(), m);
  for (std::size_t h = 0; h < H; ++h) {
    const Matrix& W = mh.projections[h];
    require(W.rows() == mh_dim && W.cols() == m, "multi_head_forward: projection " +
                                                     std::to_string(h) + " has shape " +
                                                     shape_str(W));
    require(mh.banks[h].dim() == mh_dim, "multi_head_forward: head bank dimension mismatch");
    Matrix Zh = Z * W.transpose();
    Matrix Q = assign(Zh, mh.banks[h], T);
    Matrix M = soft_centroids(Q, mh.banks[h]);
    concat.middleCols(static_cast<Eigen::Index>(h) * mh_dim, mh_dim) = M;
    r.head_inputs.push_back(std::move(Zh));
    r.Q.push_back(std::move(Q));
    r.M.push_back(std::move(M));
  }
  r.H = residual_layer_norm(Z, concat, params);
  return r;
}

}  // namespace ddcl
