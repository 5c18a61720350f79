#include "ddcl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ddcl::kernels {

namespace {

inline double row_sq_dist(const double* z, const double* p, Eigen::Index m) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double d = z[j] - p[j];
    s += d * d;
  }
  return s;
}

inline void softmax_row(double* a, Eigen::Index K) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < K; ++k) mx = std::max(mx, a[k]);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    a[k] = std::exp(a[k] - mx);
    sum += a[k];
  }
  const double inv = 1.0 / sum;
  for (Eigen::Index k = 0; k < K; ++k) a[k] *= inv;
}

inline void boltzmann_row(const double* d, double T, double* q, Eigen::Index K) {
  for (Eigen::Index k = 0; k < K; ++k) q[k] = -d[k] / T;
  softmax_row(q, K);
}

inline void mix_row(const double* q, const Matrix& P, double* out) {
  const Eigen::Index K = P.rows(), m = P.cols();
  for (Eigen::Index j = 0; j < m; ++j) out[j] = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double w = q[k];
    const double* p = P.data() + k * m;
    for (Eigen::Index j = 0; j < m; ++j) out[j] += w * p[j];
  }
}

inline void prototype_grad_row(const Matrix& Z, const Matrix& P, const Matrix& W,
                               Eigen::Index k, double* g) {
  const Eigen::Index N = Z.rows(), m = Z.cols();
  const double* p = P.data() + k * m;
  for (Eigen::Index j = 0; j < m; ++j) g[j] = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) {
    const double w = W(n, k);
    if (w == 0.0) continue;
    const double* z = Z.data() + n * m;
    for (Eigen::Index j = 0; j < m; ++j) g[j] += 2.0 * w * (p[j] - z[j]);
  }
}

inline void embedding_grad_row(const Matrix& Z, const Matrix& P, const Matrix& W,
                               Eigen::Index n, double* g) {
  const Eigen::Index K = P.rows(), m = Z.cols();
  const double* z = Z.data() + n * m;
  for (Eigen::Index j = 0; j < m; ++j) g[j] = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double w = W(n, k);
    const double* p = P.data() + k * m;
    for (Eigen::Index j = 0; j < m; ++j) g[j] += 2.0 * w * (z[j] - p[j]);
  }
}

}  // namespace

namespace serial {

void sq_dists(const Matrix& Z, const Matrix& P, Matrix& D) {
  const Eigen::Index N = Z.rows(), K = P.rows(), m = Z.cols();
  D.resize(N, K);
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index k = 0; k < K; ++k)
      D(n, k) = row_sq_dist(Z.data() + n * m, P.data() + k * m, m);
}

void boltzmann_rows(const Matrix& D, double T, Matrix& Q) {
  Q.resize(D.rows(), D.cols());
  for (Eigen::Index n = 0; n < D.rows(); ++n)
    boltzmann_row(D.data() + n * D.cols(), T, Q.data() + n * Q.cols(), D.cols());
}

void softmax_rows(Matrix& A) {
  for (Eigen::Index n = 0; n < A.rows(); ++n) softmax_row(A.data() + n * A.cols(), A.cols());
}

void mix_rows(const Matrix& Q, const Matrix& P, Matrix& M) {
  M.resize(Q.rows(), P.cols());
  for (Eigen::Index n = 0; n < Q.rows(); ++n)
    mix_row(Q.data() + n * Q.cols(), P, M.data() + n * M.cols());
}

void prototype_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G) {
  G.resize(P.rows(), P.cols());
  for (Eigen::Index k = 0; k < P.rows(); ++k)
    prototype_grad_row(Z, P, W, k, G.data() + k * G.cols());
}

void embedding_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G) {
  G.resize(Z.rows(), Z.cols());
  for (Eigen::Index n = 0; n < Z.rows(); ++n)
    embedding_grad_row(Z, P, W, n, G.data() + n * G.cols());
}

}  // namespace serial

namespace parallel {

void sq_dists(const Matrix& Z, const Matrix& P, Matrix& D) {
  const Eigen::Index N = Z.rows(), K = P.rows(), m = Z.cols();
  D.resize(N, K);
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index k = 0; k < K; ++k)
      D(n, k) = row_sq_dist(Z.data() + n * m, P.data() + k * m, m);
}

void boltzmann_rows(const Matrix& D, double T, Matrix& Q) {
  Q.resize(D.rows(), D.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < D.rows(); ++n)
    boltzmann_row(D.data() + n * D.cols(), T, Q.data() + n * Q.cols(), D.cols());
}

void softmax_rows(Matrix& A) {
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < A.rows(); ++n) softmax_row(A.data() + n * A.cols(), A.cols());
}

void mix_rows(const Matrix& Q, const Matrix& P, Matrix& M) {
  M.resize(Q.rows(), P.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < Q.rows(); ++n)
    mix_row(Q.data() + n * Q.cols(), P, M.data() + n * M.cols());
}

void prototype_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G) {
  G.resize(P.rows(), P.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < P.rows(); ++k)
    prototype_grad_row(Z, P, W, k, G.data() + k * G.cols());
}

void embedding_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G) {
  G.resize(Z.rows(), Z.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < Z.rows(); ++n)
    embedding_grad_row(Z, P, W, n, G.data() + n * G.cols());
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace ddcl::kernels
