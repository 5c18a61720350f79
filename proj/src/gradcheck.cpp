#include "ddcl/gradcheck.hpp"

#include "ddcl/layer.hpp"
#include "ddcl/loss.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ddcl {

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max(scale, std::abs(numeric[i]));
  }
  return diff / std::max(scale, 1e-8);
}

namespace {

std::vector<double> flat(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Central differences of f over every entry of x.
std::vector<double> fd_gradient(const std::function<double(const Matrix&)>& f, Matrix x,
                                double h = 1e-5) {
  std::vector<double> g(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    const double step = h * std::max(1.0, std::abs(orig));
    x.data()[i] = orig + step;
    const double fp = f(x);
    x.data()[i] = orig - step;
    const double fm = f(x);
    x.data()[i] = orig;
    g[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double fixed_q_loss(const Matrix& Z, const Matrix& P, const Matrix& Q) {
  Matrix D;
  D = pairwise_sq_dists(Z, P);
  return (Q.array() * D.array()).sum() / static_cast<double>(Z.rows());
}

double fixed_q_variance(const Matrix& P, const Matrix& Q) {
  const Matrix M = Q * P;
  double v = 0.0;
  for (Eigen::Index n = 0; n < Q.rows(); ++n)
    for (Eigen::Index k = 0; k < P.rows(); ++k) v += Q(n, k) * (P.row(k) - M.row(n)).squaredNorm();
  return v / static_cast<double>(Q.rows());
}

struct Instance {
  Matrix Z;
  Matrix P;
  double T;
};

Instance draw(Rng& rng, int min_K = 2) {
  const auto N = static_cast<Eigen::Index>(2 + rng.index(11));
  const auto K = static_cast<Eigen::Index>(min_K + static_cast<int>(rng.index(5)));
  const auto m = static_cast<Eigen::Index>(1 + rng.index(5));
  Instance in{random_matrix(rng, N, m), random_matrix(rng, K, m), rng.uniform(0.3, 3.0)};
  return in;
}

}  // namespace

std::vector<GradCheckEntry> run_gradcheck(const GradCheckOptions& options) {
  Rng root(options.seed);
  const int n = options.instances;
  std::vector<GradCheckEntry> out;
  auto add = [&](const std::string& name, double tol, const std::function<double(Rng&)>& one) {
    GradCheckEntry e{name, n, 0.0, tol};
    Rng rng = root.split(out.size() + 1);
    for (int i = 0; i < n; ++i) e.max_rel_error = std::max(e.max_rel_error, one(rng));
    out.push_back(e);
  };

  add("grad_P L_q (full)", 1e-5, [&](Rng& rng) {
    const Instance in = draw(rng);
    Matrix g = grad_prototypes(in.Z, PrototypeBank(in.P), in.T, false);
    if (options.corrupt) g(0, 0) += 1e-2 * (1.0 + std::abs(g(0, 0)));
    auto f = [&](const Matrix& P) { return competitive_loss(in.Z, P, in.T); };
    return max_relative_error(flat(g), fd_gradient(f, in.P));
  });

  add("grad_P L_q (stop-gradient)", 1e-5, [&](Rng& rng) {
    const Instance in = draw(rng);
    const Matrix Q = boltzmann_assign(in.Z, in.P, in.T).Q;
    const Matrix g = grad_prototypes(in.Z, PrototypeBank(in.P), in.T, true);
    auto f = [&](const Matrix& P) { return fixed_q_loss(in.Z, P, Q); };
    return max_relative_error(flat(g), fd_gradient(f, in.P));
  });

  add("grad_P V_soft (stop-gradient)", 1e-5, [&](Rng& rng) {
    const Instance in = draw(rng);
    const Matrix Q = boltzmann_assign(in.Z, in.P, in.T).Q;
    const Matrix g = separation_force(PrototypeBank(in.P), Q);
    auto f = [&](const Matrix& P) { return fixed_q_variance(P, Q); };
    return max_relative_error(flat(g), fd_gradient(f, in.P));
  });

  add("encoder signal 2(z - mu)", 1e-5, [&](Rng& rng) {
    const Instance in = draw(rng);
    const Assignment a = boltzmann_assign(in.Z, in.P, in.T);
    const Matrix M = a.Q * in.P;
    // Summed loss, so no 1/N.
    const Matrix g = grad_encoder_signal(in.Z, M);
    auto f = [&](const Matrix& Z) {
      return fixed_q_loss(Z, in.P, a.Q) * static_cast<double>(Z.rows());
    };
    return max_relative_error(flat(g), fd_gradient(f, in.Z));
  });

  add("grad_Z L_q (full)", 1e-5, [&](Rng& rng) {
    const Instance in = draw(rng);
    const Matrix g = grad_embeddings(in.Z, PrototypeBank(in.P), in.T, false);
    auto f = [&](const Matrix& Z) { return competitive_loss(Z, in.P, in.T); };
    return max_relative_error(flat(g), fd_gradient(f, in.Z));
  });

  add("grad_P free energy", 1e-5, [&](Rng& rng) {
    const Instance in = draw(rng);
    const FreeEnergyParams fe{rng.uniform(0.05, 1.0), 1e-6};
    const Matrix g = grad_free_energy_P(in.Z, PrototypeBank(in.P), in.T, fe);
    auto f = [&](const Matrix& P) { return free_energy(in.Z, PrototypeBank(P), in.T, fe); };
    return max_relative_error(flat(g), fd_gradient(f, in.P));
  });

  add("grad linear encoder (W, P)", 1e-5, [&](Rng& rng) {
    LinearEncoderSystem sys;
    sys.X = random_matrix(rng, static_cast<Eigen::Index>(3 + rng.index(8)),
                          static_cast<Eigen::Index>(1 + rng.index(4)));
    sys.m = static_cast<Eigen::Index>(1 + rng.index(3));
    sys.K = static_cast<Eigen::Index>(2 + rng.index(3));
    sys.T = rng.uniform(0.3, 3.0);
    sys.repulsion.lambda = rng.uniform(0.0, 0.5);
    Vector x(sys.n_theta() + sys.n_P());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    const Vector g = sys.gradient(x);
    Matrix xm = x.transpose();
    auto f = [&](const Matrix& v) { return sys.value(v.transpose()); };
    return max_relative_error({g.data(), g.data() + g.size()}, fd_gradient(f, xm));
  });

  add("dL_q/dT", 1e-4, [&](Rng& rng) {
    const Instance in = draw(rng);
    const PrototypeBank bank(in.P);
    const double a = dLq_dT(in.Z, bank, in.T);
    Matrix t(1, 1);
    t(0, 0) = in.T;
    auto f = [&](const Matrix& x) { return competitive_loss(in.Z, in.P, x(0, 0)); };
    return max_relative_error({a}, fd_gradient(f, t));
  });

  add("K=1 closed form 2 mean(p - z)", 1e-12, [&](Rng& rng) {
    const Instance in = draw(rng, 1);
    const Matrix P = in.P.topRows(1);
    const Matrix g = grad_prototypes(in.Z, PrototypeBank(P), in.T, false);
    Matrix expect = 2.0 * (P - in.Z.colwise().mean());
    return max_relative_error(flat(g), flat(expect));
  });

  return out;
}

}  // namespace ddcl
