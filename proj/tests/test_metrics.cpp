#include "ddcl/error.hpp"
#include "ddcl/layer.hpp"
#include "ddcl/metrics.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>

using namespace ddcl;
using ddcl::test::mat;

TEST_CASE("hungarian accuracy") {
  const Labels truth = {0, 1, 2, 2, 1, 0, 3};
  CHECK(hungarian_accuracy(truth, truth).acc == 1.0);
  Labels perm = truth;
  for (int& v : perm) v = (v + 2) % 4;
  CHECK(hungarian_accuracy(perm, truth).acc == 1.0);
  CHECK(hungarian_accuracy({0, 0, 1, 1}, {0, 1, 0, 0}).acc == 0.75);
  CHECK_THROWS_AS(hungarian_accuracy({0, 1}, {0}), Error);
}

TEST_CASE("max weight assignment against brute force") {
  Rng rng(31);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + static_cast<int>(rng.index(5));
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = std::floor(rng.uniform(0, 10));
    const std::vector<int> m = max_weight_assignment(w);
    double got = 0.0;
    for (int i = 0; i < n; ++i) got += w(i, m[i]);
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    double best = -1.0;
    do {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w(i, p[i]);
      best = std::max(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(got == best);
  }
}

TEST_CASE("nmi and ari") {
  const Labels a = {0, 0, 1, 1, 2, 2};
  CHECK(nmi(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ari(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ari({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(ari({0, 0, 1, 2}, {0, 0, 1, 1}) == doctest::Approx(0.5714285714285715).epsilon(1e-14));
  CHECK(nmi({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(0.3455920299442113).epsilon(1e-14));

  Rng rng(2);
  Labels x(20000), y(20000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<int>(rng.index(5));
    y[i] = static_cast<int>(rng.index(5));
  }
  CHECK(std::abs(ari(x, y)) < 0.01);
}

TEST_CASE("prototype separation") {
  CHECK(prototype_separation(mat({{0, 0}, {3, 4}})) == 25.0);
  CHECK(prototype_separation(mat({{1, 1}, {5, 2}, {1, 1}})) == 0.0);
  Rng rng(5);
  const Matrix P = test::random_matrix(rng, 5, 3);
  double best = 1e300;
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k)
      if (j != k) best = std::min(best, (P.row(j) - P.row(k)).squaredNorm());
  CHECK(prototype_separation(P) == best);
  CHECK_THROWS_AS(prototype_separation(mat({{1, 2}})), Error);
}

TEST_CASE("assignment entropy") {
  CHECK(assignment_entropy(Matrix::Constant(3, 8, 0.125)) == doctest::Approx(std::log(8.0)).epsilon(1e-14));
  CHECK(assignment_entropy(mat({{1, 0}, {0, 1}})) == 0.0);
  CHECK(assignment_entropy(mat({{0.25, 0.75}})) == doctest::Approx(0.5623351446188083).epsilon(1e-14));
}

TEST_CASE("hard labels take the first maximum") {
  const Labels l = hard_labels(mat({{0.2, 0.5, 0.3}, {0.5, 0.5, 0.0}}));
  CHECK(l == Labels{1, 0});
}
