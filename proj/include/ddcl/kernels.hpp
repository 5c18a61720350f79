#pragma once

#include "ddcl/matrix.hpp"

// Hot loops of the forward/backward pass. Each kernel exists twice: a serial
// reference and an OpenMP version. Both perform the same per-element
// arithmetic in the same order, so their outputs are bit-identical for any
// thread count; reductions over tokens are never split across threads.
namespace ddcl::kernels {

namespace serial {

// D[n][k] = sum_j (Z[n][j] - P[k][j])^2, explicit expansion.
void sq_dists(const Matrix& Z, const Matrix& P, Matrix& D);
// Q = row softmax of (-D / T) with per-row max shift.
void boltzmann_rows(const Matrix& D, double T, Matrix& Q);
// In-place row softmax with per-row max shift.
void softmax_rows(Matrix& A);
// M = Q * P (soft centroids).
void mix_rows(const Matrix& Q, const Matrix& P, Matrix& M);
// G[k] = 2 * sum_n W[n][k] * (P[k] - Z[n]); summed over n in index order.
void prototype_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G);
// G[n] = 2 * sum_k W[n][k] * (Z[n] - P[k]).
void embedding_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G);

}  // namespace serial

namespace parallel {

void sq_dists(const Matrix& Z, const Matrix& P, Matrix& D);
void boltzmann_rows(const Matrix& D, double T, Matrix& Q);
void softmax_rows(Matrix& A);
void mix_rows(const Matrix& Q, const Matrix& P, Matrix& M);
void prototype_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G);
void embedding_grad(const Matrix& Z, const Matrix& P, const Matrix& W, Matrix& G);

}  // namespace parallel

// Number of OpenMP threads used by the parallel kernels (1 when built
// without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace ddcl::kernels
