#pragma once

#include "ddcl/matrix.hpp"

#include <vector>

namespace ddcl {

using Labels = std::vector<int>;

struct ClusteringScore {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  // matching[c] = true label matched to predicted cluster c, or -1.
  std::vector<int> matching;
};

// Maximum-weight perfect matching on a square weight matrix; returns the column
// chosen for each row. O(n^3) Hungarian method with potentials.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

struct Accuracy {
  double acc = 0.0;
  std::vector<int> matching;
};

Accuracy hungarian_accuracy(const Labels& pred, const Labels& truth);
double nmi(const Labels& pred, const Labels& truth);
double ari(const Labels& pred, const Labels& truth);
ClusteringScore score_clustering(const Labels& pred, const Labels& truth);

// min_{j != k} |p_j - p_k|^2. Requires K >= 2.
double prototype_separation(const Matrix& P);

// -(1/N) sum_n sum_k q_nk ln q_nk with 0 ln 0 = 0.
double assignment_entropy(const Matrix& Q);

// argmax of each row.
Labels hard_labels(const Matrix& Q);

}  // namespace ddcl
