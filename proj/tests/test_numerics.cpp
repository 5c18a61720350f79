#include "ddcl/data.hpp"
#include "ddcl/error.hpp"
#include "ddcl/numerics.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace ddcl;
using ddcl::test::mat;

TEST_CASE("pairwise squared distances") {
  CHECK(pairwise_sq_dists(mat({{0, 0}}), mat({{3, 4}}))(0, 0) == 25.0);
  CHECK(pairwise_sq_dists(mat({{1, 1}}), mat({{1, 1}}))(0, 0) == 0.0);
  const Matrix D = pairwise_sq_dists(mat({{0}, {2}}), mat({{1}, {-1}}));
  CHECK(D(0, 0) == 1.0);
  CHECK(D(0, 1) == 1.0);
  CHECK(D(1, 0) == 1.0);
  CHECK(D(1, 1) == 9.0);
}

TEST_CASE("distances stay exact for nearly coincident points") {
  const Matrix Z = mat({{1e8 + 1e-4, 1e8}});
  const Matrix P = mat({{1e8, 1e8}});
  CHECK(pairwise_sq_dists(Z, P)(0, 0) == doctest::Approx(1e-8).epsilon(1e-6));
}

TEST_CASE("stable softmax") {
  Matrix s = stable_softmax_rows(mat({{0, 0}}));
  CHECK(s(0, 0) == 0.5);
  s = stable_softmax_rows(mat({{-1000, 0}}));
  CHECK(s.allFinite());
  CHECK(s(0, 0) < 1e-300);
  CHECK(s(0, 1) == 1.0);
  s = stable_softmax_rows(mat({{std::log(1.0), std::log(3.0)}}));
  CHECK(s(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s(0, 1) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("softmax rows sum to one for large inputs") {
  Rng rng(3);
  const Matrix A = test::random_matrix(rng, 50, 17, 1e4);
  const Matrix S = stable_softmax_rows(A);
  CHECK(S.allFinite());
  for (Eigen::Index i = 0; i < S.rows(); ++i) CHECK(std::abs(S.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("layer norm") {
  Vector ones = Vector::Ones(4), zeros = Vector::Zero(4);
  CHECK(layer_norm(Vector::Ones(4), ones, zeros).cwiseAbs().maxCoeff() == 0.0);

  Vector x(2);
  x << -1, 1;
  const Vector y = layer_norm(x, Vector::Ones(2), Vector::Zero(2), 0.0);
  CHECK(y(0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(1.0).epsilon(1e-15));

  Vector x3(3);
  x3 << 0, 2, 4;
  const Vector z = layer_norm(x3, Vector::Ones(3), Vector::Constant(3, 5.0), 1e-5);
  CHECK(z(0) == doctest::Approx(3.7752574249985864).epsilon(1e-14));
  CHECK(z(1) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(z(2) == doctest::Approx(6.224742575001414).epsilon(1e-14));
}

TEST_CASE("layer norm output is standardized") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    Vector x(16);
    for (int i = 0; i < 16; ++i) x(i) = rng.normal(2.0, 3.0);
    const Vector y = layer_norm(x, Vector::Ones(16), Vector::Zero(16), 0.0);
    CHECK(std::abs(y.mean()) < 1e-12);
    CHECK(std::abs((y.array() - y.mean()).square().mean() - 1.0) < 1e-6);
  }
}

TEST_CASE("layer norm rejects bad input") {
  CHECK_THROWS_AS(layer_norm(Vector::Ones(3), Vector::Ones(2), Vector::Zero(3)), Error);
  CHECK_THROWS_AS(layer_norm(Vector::Ones(3), Vector::Ones(3), Vector::Zero(3), -1.0), Error);
}

TEST_CASE("pca") {
  Rng rng(5);
  Matrix line(40, 2);
  for (int i = 0; i < 40; ++i) {
    const double t = rng.normal();
    line(i, 0) = t;
    line(i, 1) = -2.0 * t + 1.0;
  }
  CHECK(pca_fit(line, 1).explained_variance_ratio == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix X = test::random_matrix(rng, 200, 6);
  const PcaModel full = pca_fit(X, 6);
  CHECK(full.explained_variance_ratio == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix G = full.components * full.components.transpose();
  CHECK(test::max_abs_diff(G, Matrix::Identity(6, 6)) < 1e-10);
  CHECK(test::max_abs_diff(pca_reconstruct(full, pca_project(full, X)), X) < 1e-8);

  const PcaModel part = pca_fit(X, 3);
  CHECK(part.explained_variance_ratio >= 0.0);
  CHECK(part.explained_variance_ratio <= 1.0);
  CHECK_THROWS_AS(pca_fit(X, 7), Error);
}

TEST_CASE("pca on debris features") {
  const auto d = generate_debris(DebrisParams::defaults(), 42);
  CHECK(pca_fit(d.X, 5).explained_variance_ratio >= 0.95);
}
