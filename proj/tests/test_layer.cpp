#include "ddcl/error.hpp"
#include "ddcl/layer.hpp"
#include "ddcl/numerics.hpp"
#include "test_util.hpp"

#include <chrono>

using namespace ddcl;
using ddcl::test::mat;

TEST_CASE("boltzmann assignment") {
  CHECK(assign(mat({{0.3, -2}}), PrototypeBank(mat({{1, 1}})), 0.5)(0, 0) == 1.0);
  for (double T : {0.01, 1.0, 100.0}) {
    const Matrix Q = assign(mat({{0}}), PrototypeBank(mat({{-1}, {1}})), T);
    CHECK(Q(0, 0) == 0.5);
    CHECK(Q(0, 1) == 0.5);
  }
  const Matrix Q = assign(mat({{0}}), PrototypeBank(mat({{1}, {2}})), 1.0);
  CHECK(Q(0, 0) == doctest::Approx(0.9525741268224333).epsilon(1e-14));
}

TEST_CASE("assignment temperature limits") {
  const PrototypeBank bank(mat({{0, 0}, {5, 0}, {0, 5}}));
  const Matrix Z = mat({{0.4, 0.3}, {4.1, 0.2}, {0.2, 4.4}});
  const Matrix cold = assign(Z, bank, 1e-4);
  for (int n = 0; n < 3; ++n) CHECK(cold(n, n) == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix hot = assign(Z, bank, 1e6);
  CHECK((hot.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-4);
}

TEST_CASE("assignment rejects bad input") {
  const PrototypeBank bank(mat({{0, 0}}));
  CHECK_THROWS_AS(assign(mat({{0, 0}}), bank, 0.0), Error);
  CHECK_THROWS_AS(assign(mat({{0, 0, 0}}), bank, 1.0), Error);
}

TEST_CASE("soft centroids") {
  const PrototypeBank bank(mat({{1, 2}, {-3, 4}}));
  CHECK(test::max_abs_diff(soft_centroids(mat({{1, 0}}), bank), mat({{1, 2}})) == 0.0);
  CHECK(soft_centroids(mat({{0.5, 0.5}}), PrototypeBank(mat({{-1}, {1}})))(0, 0) == 0.0);
  CHECK(soft_centroids(mat({{0.25, 0.75}}), PrototypeBank(mat({{0}, {4}})))(0, 0) == 3.0);
}

TEST_CASE("forward pass") {
  Rng rng(1);
  const Matrix Z = test::random_matrix(rng, 5, 4);
  const PrototypeBank bank(test::random_matrix(rng, 3, 4));
  LayerParams zero = LayerParams::identity(4);
  zero.W_O.setZero();
  const ForwardResult r = forward(Z, bank, zero, 0.8);
  for (Eigen::Index n = 0; n < 5; ++n) {
    const Vector expect = layer_norm(Z.row(n).transpose(), zero.ln_gain, zero.ln_bias, zero.ln_eps);
    CHECK((r.H.row(n).transpose() - expect).cwiseAbs().maxCoeff() == 0.0);
  }

  const Matrix z = mat({{0.5, -1, 2}});
  const LayerParams id = LayerParams::identity(3);
  const ForwardResult one = forward(z, PrototypeBank(z), id, 1.0);
  const Vector expect = layer_norm((2.0 * z).row(0).transpose(), id.ln_gain, id.ln_bias, id.ln_eps);
  CHECK((one.H.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("forward pass matches scripted oracle") {
  const Matrix Z = mat({{0.1, -0.4, 0.3, 0.9}, {1.2, 0.5, -0.7, 0.0}, {-0.3, 0.8, 0.2, -1.1}});
  const PrototypeBank bank(mat({{0.5, 0.0, -0.2, 0.4}, {-0.6, 0.7, 0.1, -0.5}}));
  LayerParams p;
  p.W_O = mat({{0.2, -0.1, 0.0, 0.3}, {0.05, 0.4, -0.2, 0.1}, {0.0, 0.1, 0.5, -0.3}, {0.3, 0.0, 0.1, 0.2}});
  p.ln_gain = Vector(4);
  p.ln_gain << 1.0, 0.5, 2.0, 1.5;
  p.ln_bias = Vector(4);
  p.ln_bias << 0.0, 0.1, -0.2, 0.3;
  const Matrix oracle = mat({{0.017946155993616514, -0.4836772894097372, -1.0386749363438046,
                              2.6531188364966396},
                             {1.2948940883112732, 0.2663062095996114, -3.1603025416786923,
                              0.07896714499327512},
                             {-0.5403863337639679, 0.7095440409267177, 1.1170143004154298,
                              -1.7058133474457737}});
  CHECK(test::max_abs_diff(forward(Z, bank, p, 0.7).H, oracle) < 1e-12);
}

TEST_CASE("multi-head forward") {
  Rng rng(2);
  const Matrix Z = test::random_matrix(rng, 6, 4);
  const LayerParams id = LayerParams::identity(4);

  MultiHeadBank one;
  one.projections = {Matrix::Identity(4, 4)};
  one.banks = {PrototypeBank(test::random_matrix(rng, 3, 4))};
  const ForwardResult single = forward(Z, one.banks[0], id, 0.9);
  CHECK(test::max_abs_diff(multi_head_forward(Z, one, id, 0.9).H, single.H) == 0.0);

  MultiHeadBank split;
  Matrix W0 = Matrix::Zero(2, 4), W1 = Matrix::Zero(2, 4);
  W0(0, 0) = W0(1, 1) = 1.0;
  W1(0, 2) = W1(1, 3) = 1.0;
  split.projections = {W0, W1};
  split.banks = {PrototypeBank(test::random_matrix(rng, 3, 2)),
                 PrototypeBank(test::random_matrix(rng, 3, 2))};
  const MultiHeadResult r = multi_head_forward(Z, split, id, 0.9);
  CHECK(test::max_abs_diff(r.Q[0], assign(Z.leftCols(2), split.banks[0], 0.9)) == 0.0);
  CHECK(test::max_abs_diff(r.Q[1], assign(Z.rightCols(2), split.banks[1], 0.9)) == 0.0);

  Matrix concat(6, 4);
  concat << r.M[0], r.M[1];
  CHECK(test::max_abs_diff(r.H, residual_layer_norm(Z, concat, id)) == 0.0);

  Rng r3(4);
  CHECK_THROWS_AS(MultiHeadBank::random(4, 3, 2, r3), Error);
  MultiHeadBank bad = split;
  bad.projections.pop_back();
  CHECK_THROWS_AS(multi_head_forward(Z, bad, id, 1.0), Error);
}

TEST_CASE("forward scales linearly in N") {
  Rng rng(9);
  const PrototypeBank bank(test::random_matrix(rng, 32, 16));
  const LayerParams id = LayerParams::identity(16);
  const Matrix Z1 = test::random_matrix(rng, 4000, 16);
  const Matrix Z2 = test::random_matrix(rng, 8000, 16);
  auto time = [&](const Matrix& Z) {
    double best = 1e9;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      volatile double sink = forward(Z, bank, id, 1.0).H(0, 0);
      (void)sink;
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const double ratio = time(Z2) / time(Z1);
  CHECK(ratio > 1.3);
  CHECK(ratio < 3.0);
}
