#include "ddcl/error.hpp"
#include "ddcl/loss.hpp"
#include "ddcl/numerics.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace ddcl;
using ddcl::test::mat;

namespace {

double fd_rel_error(const Matrix& analytic, const Matrix& numeric) {
  return (analytic - numeric).cwiseAbs().maxCoeff() /
         std::max(numeric.cwiseAbs().maxCoeff(), 1e-8);
}

template <class F>
Matrix central_fd(Matrix x, F f, double h = 1e-5) {
  Matrix G(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double x0 = x.data()[i];
    x.data()[i] = x0 + h;
    const double fp = f(x);
    x.data()[i] = x0 - h;
    const double fm = f(x);
    x.data()[i] = x0;
    G.data()[i] = (fp - fm) / (2.0 * h);
  }
  return G;
}

}  // namespace

TEST_CASE("decomposition on hand cases") {
  const LossReport sym = decompose(mat({{0}}), PrototypeBank(mat({{-1}, {1}})), 0.7);
  CHECK(sym.L_q == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sym.L_soft == 0.0);
  CHECK(sym.V_soft == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sym.L_OLS == 1.0);
  CHECK(std::abs(sym.V_alg) < 1e-15);

  const Matrix Z = mat({{1, 2}, {3, -1}, {0, 0}});
  const LossReport same = decompose(Z, PrototypeBank(mat({{0.5, 0.5}, {0.5, 0.5}})), 1.3);
  const double direct = ((Z.rowwise() - Eigen::RowVectorXd::Constant(2, 0.5)).rowwise().squaredNorm()).mean();
  CHECK(same.V_soft == 0.0);
  CHECK(same.L_q == doctest::Approx(direct).epsilon(1e-14));
  CHECK(same.L_OLS == doctest::Approx(direct).epsilon(1e-14));
  CHECK(same.L_soft == doctest::Approx(direct).epsilon(1e-14));

  const LossReport sharp = decompose(mat({{1, 1}}), PrototypeBank(mat({{1, 1}, {50, 50}})), 0.01);
  CHECK(sharp.L_q < 1e-12);
  CHECK(sharp.V_soft < 1e-12);
}

TEST_CASE("decomposition identity on random draws") {
  Rng rng(17);
  for (int t = 0; t < 300; ++t) {
    const auto N = static_cast<Eigen::Index>(1 + rng.index(64));
    const auto K = static_cast<Eigen::Index>(1 + rng.index(32));
    const auto m = static_cast<Eigen::Index>(1 + rng.index(16));
    const double T = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
    const LossReport r = decompose(test::random_matrix(rng, N, m, 2.0),
                                   PrototypeBank(test::random_matrix(rng, K, m, 2.0)), T);
    CHECK(r.identity_residual() <= 1e-8 * std::max(1.0, r.L_q));
    CHECK(r.V_alg >= -1e-8);
    CHECK(r.V_soft >= 0.0);
  }
}

TEST_CASE("check_report flags violations") {
  LossReport r;
  r.L_q = 1.0;
  r.L_OLS = 1.0 + 1e-6;
  r.L_soft = 0.5;
  r.V_soft = 0.5;
  r.V_alg = r.L_q - r.L_OLS;
  CHECK_THROWS_AS(check_report(r), InvariantViolation);
  r.L_OLS = 0.9;
  r.V_alg = 0.1;
  CHECK_NOTHROW(check_report(r));
  r.V_soft = 0.6;
  CHECK_THROWS_AS(check_report(r), InvariantViolation);
  r.V_soft = std::nan("");
  CHECK_THROWS_AS(check_report(r), InvariantViolation);
}

TEST_CASE("sigma_q") {
  CHECK(sigma_q(mat({{1, 0, 0}, {0, 0, 1}})).cwiseAbs().maxCoeff() == 0.0);
  CHECK(test::max_abs_diff(sigma_q(mat({{0.5, 0.5}})), mat({{0.25, -0.25}, {-0.25, 0.25}})) == 0.0);
  const Matrix U = Matrix::Constant(5, 4, 0.25);
  const Matrix expect = 5.0 * (Matrix::Identity(4, 4) / 4.0 - Matrix::Constant(4, 4, 1.0 / 16.0));
  CHECK(test::max_abs_diff(sigma_q(U), expect) < 1e-15);

  Rng rng(3);
  const Matrix Q = assign(test::random_matrix(rng, 20, 3), PrototypeBank(test::random_matrix(rng, 6, 3)), 1.0);
  const Matrix S = sigma_q(Q);
  CHECK(test::max_abs_diff(S, S.transpose()) < 1e-14);
  CHECK(S.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("separation force") {
  const PrototypeBank sym(mat({{-1}, {1}}));
  CHECK(test::max_abs_diff(separation_force(sym, mat({{0.5, 0.5}})), mat({{-1}, {1}})) == 0.0);
  const PrototypeBank same(mat({{2, 3}, {2, 3}}));
  CHECK(separation_force(same, mat({{0.5, 0.5}, {0.5, 0.5}})).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(8);
  const Matrix Z = test::random_matrix(rng, 7, 3);
  const PrototypeBank bank(test::random_matrix(rng, 4, 3));
  const Matrix Q = assign(Z, bank, 0.8);
  auto V = [&](const Matrix& P) {
    const Matrix M = Q * P;
    double v = 0.0;
    for (Eigen::Index n = 0; n < Q.rows(); ++n)
      for (Eigen::Index k = 0; k < Q.cols(); ++k) v += Q(n, k) * (P.row(k) - M.row(n)).squaredNorm();
    return v / static_cast<double>(Q.rows());
  };
  CHECK(fd_rel_error(separation_force(bank, Q), central_fd(bank.P, V)) < 1e-5);
}

TEST_CASE("prototype gradients") {
  const Matrix Z = mat({{1, 2}, {3, 0}, {-1, 1}});
  const PrototypeBank one(mat({{0.5, -0.5}}));
  const Matrix expect = 2.0 * (one.P.row(0) - Z.colwise().mean());
  for (bool sg : {false, true})
    CHECK(test::max_abs_diff(grad_prototypes(Z, one, 0.9, sg), expect) < 1e-14);
  const PrototypeBank centred(Z.colwise().mean());
  CHECK(grad_prototypes(Z, centred, 0.9, false).cwiseAbs().maxCoeff() < 1e-14);

  const Matrix g = grad_prototypes(mat({{0}}), PrototypeBank(mat({{-1}, {1}})), 1.0, true);
  CHECK(test::max_abs_diff(g, mat({{-1}, {1}})) < 1e-15);

  Rng rng(21);
  for (int t = 0; t < 5; ++t) {
    const Matrix Zr = test::random_matrix(rng, 5, 2);
    const PrototypeBank bank(test::random_matrix(rng, 3, 2));
    const double T = 0.7;
    auto Lq = [&](const Matrix& P) { return competitive_loss(Zr, P, T); };
    CHECK(fd_rel_error(grad_prototypes(Zr, bank, T, false), central_fd(bank.P, Lq)) < 1e-5);

    const Matrix Q = assign(Zr, bank, T);
    auto Lsg = [&](const Matrix& P) {
      return (Q.array() * pairwise_sq_dists(Zr, P).array()).sum() / static_cast<double>(Zr.rows());
    };
    CHECK(fd_rel_error(grad_prototypes(Zr, bank, T, true), central_fd(bank.P, Lsg)) < 1e-5);
  }
}

TEST_CASE("encoder signal and embedding gradient") {
  CHECK(grad_encoder_signal(mat({{1, 2}}), mat({{1, 2}})).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grad_encoder_signal(mat({{0}}), mat({{3}}))(0, 0) == -6.0);

  Rng rng(4);
  const Matrix Z = test::random_matrix(rng, 6, 3);
  const PrototypeBank bank(test::random_matrix(rng, 4, 3));
  const double T = 1.1;
  const Matrix Q = assign(Z, bank, T);
  auto Lfrozen = [&](const Matrix& Zv) {
    return (Q.array() * pairwise_sq_dists(Zv, bank.P).array()).sum();
  };
  const Matrix M = soft_centroids(Q, bank);
  CHECK(fd_rel_error(grad_encoder_signal(Z, M), central_fd(Z, Lfrozen)) < 1e-5);

  auto Lfull = [&](const Matrix& Zv) { return competitive_loss(Zv, bank.P, T); };
  CHECK(fd_rel_error(grad_embeddings(Z, bank, T, false), central_fd(Z, Lfull)) < 1e-5);
}

TEST_CASE("free energy and repulsion") {
  const Matrix Z = mat({{0.2, 0.1}, {1.0, -0.3}});
  const PrototypeBank pair(mat({{0, 0}, {1, 0}}));
  CHECK(free_energy(Z, pair, 0.5, {0.0}) == competitive_loss(Z, pair.P, 0.5));
  CHECK(repulsion_energy(pair.P, {2.0}) == 2.0);
  CHECK(free_energy(Z, pair, 0.5, {2.0}) == doctest::Approx(competitive_loss(Z, pair.P, 0.5) + 2.0));

  Rng rng(6);
  const Matrix Zr = test::random_matrix(rng, 6, 2);
  const PrototypeBank bank(test::random_matrix(rng, 3, 2));
  const FreeEnergyParams params{0.3};
  auto W = [&](const Matrix& P) { return free_energy(Zr, PrototypeBank(P), 0.9, params); };
  CHECK(fd_rel_error(grad_free_energy_P(Zr, bank, 0.9, params, false), central_fd(bank.P, W)) < 1e-5);

  CHECK_THROWS_AS(repulsion_energy(mat({{0, 0}, {0, 0}}), {1.0}), Error);
  CHECK_THROWS_AS(repulsion_grad(mat({{0, 0}, {0, 0}}), {1.0}), Error);
}

TEST_CASE("temperature derivative") {
  CHECK(dLq_dT(mat({{0}}), PrototypeBank(mat({{-1}, {1}})), 1.0) == 0.0);
  CHECK(dLq_dT(mat({{0.3, 1}}), PrototypeBank(mat({{2, 2}})), 0.4) == 0.0);
  CHECK(dLq_dT(mat({{0}}), PrototypeBank(mat({{1}, {2}})), 1.0) ==
        doctest::Approx(0.4065899375782092).epsilon(1e-13));

  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const Matrix Z = test::random_matrix(rng, 8, 3);
    const PrototypeBank bank(test::random_matrix(rng, 4, 3));
    const double T = rng.uniform(0.3, 3.0), h = 1e-4;
    const double fd = (competitive_loss(Z, bank.P, T + h) - competitive_loss(Z, bank.P, T - h)) / (2 * h);
    const double an = dLq_dT(Z, bank, T);
    CHECK(an >= 0.0);
    CHECK(std::abs(an - fd) / std::max(std::abs(fd), 1e-8) < 1e-4);
  }
}

TEST_CASE("regularity condition") {
  CHECK_FALSE(check_regularity(0.5, 0.05, 4));
  CHECK(check_regularity(0.1, 5.0, 1));
  CHECK(check_regularity(1.5, 1e-3, 20));
}
