#include "ddcl/metrics.hpp"

#include "ddcl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ddcl {

namespace {

// Remaps arbitrary labels to 0..C-1 in order of first appearance.
std::vector<int> compact(const Labels& labels, int& count) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = ids.find(labels[i]);
    if (it == ids.end()) it = ids.emplace(labels[i], static_cast<int>(ids.size())).first;
    out[i] = it->second;
  }
  count = static_cast<int>(ids.size());
  return out;
}

struct Contingency {
  Eigen::MatrixXd table;  // pred x truth counts
  std::vector<int> pred_ids;
  std::vector<int> truth_ids;
  std::vector<int> pred_compact;
  std::vector<int> truth_compact;
};

Contingency contingency(const Labels& pred, const Labels& truth) {
  require(!pred.empty(), "clustering metric: empty input");
  require(pred.size() == truth.size(), "clustering metric: length mismatch");
  Contingency c;
  int kp = 0, kt = 0;
  c.pred_compact = compact(pred, kp);
  c.truth_compact = compact(truth, kt);
  c.table = Eigen::MatrixXd::Zero(kp, kt);
  for (std::size_t i = 0; i < pred.size(); ++i) c.table(c.pred_compact[i], c.truth_compact[i]) += 1;
  c.pred_ids.assign(kp, 0);
  c.truth_ids.assign(kt, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    c.pred_ids[c.pred_compact[i]] = pred[i];
    c.truth_ids[c.truth_compact[i]] = truth[i];
  }
  return c;
}

double entropy_of(const Eigen::VectorXd& counts, double total) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i)
    if (counts(i) > 0) {
      const double p = counts(i) / total;
      h -= p * std::log(p);
    }
  return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight) {
  const int n = static_cast<int>(weight.rows());
  require(weight.cols() == weight.rows(), "max_weight_assignment: matrix must be square");
  if (n == 0) return {};
  // Minimise cost = -weight. 1-based arrays with potentials u, v.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

Accuracy hungarian_accuracy(const Labels& pred, const Labels& truth) {
  const Contingency c = contingency(pred, truth);
  const Eigen::Index kp = c.table.rows(), kt = c.table.cols();
  require(kp <= 64 && kt <= 64, "hungarian_accuracy: more than 64 labels");
  const Eigen::Index n = std::max(kp, kt);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  w.topLeftCorner(kp, kt) = c.table;
  const std::vector<int> assign = max_weight_assignment(w);

  Accuracy out;
  double hits = 0.0;
  const int max_pred = *std::max_element(pred.begin(), pred.end());
  out.matching.assign(static_cast<std::size_t>(std::max(max_pred, 0)) + 1, -1);
  for (Eigen::Index r = 0; r < kp; ++r) {
    const int col = assign[r];
    if (col < kt) {
      hits += w(r, col);
      if (c.pred_ids[r] >= 0) out.matching[c.pred_ids[r]] = c.truth_ids[col];
    }
  }
  out.acc = hits / static_cast<double>(pred.size());
  return out;
}

double nmi(const Labels& pred, const Labels& truth) {
  const Contingency c = contingency(pred, truth);
  const double N = static_cast<double>(pred.size());
  const Eigen::VectorXd rp = c.table.rowwise().sum();
  const Eigen::VectorXd ct = c.table.colwise().sum().transpose();
  const double hp = entropy_of(rp, N), ht = entropy_of(ct, N);
  if (hp <= 0.0 || ht <= 0.0) return 0.0;
  double mi = 0.0;
  for (Eigen::Index i = 0; i < c.table.rows(); ++i)
    for (Eigen::Index j = 0; j < c.table.cols(); ++j) {
      const double nij = c.table(i, j);
      if (nij > 0) mi += (nij / N) * std::log(N * nij / (rp(i) * ct(j)));
    }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

double ari(const Labels& pred, const Labels& truth) {
  const Contingency c = contingency(pred, truth);
  const double N = static_cast<double>(pred.size());
  double index = 0.0;
  for (Eigen::Index i = 0; i < c.table.size(); ++i) index += choose2(c.table.data()[i]);
  double a = 0.0, b = 0.0;
  const Eigen::VectorXd rp = c.table.rowwise().sum();
  const Eigen::VectorXd ct = c.table.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < rp.size(); ++i) a += choose2(rp(i));
  for (Eigen::Index j = 0; j < ct.size(); ++j) b += choose2(ct(j));
  const double total = choose2(N);
  if (total == 0.0) return 1.0;
  const double expected = a * b / total;
  const double max_index = 0.5 * (a + b);
  if (max_index == expected) return 1.0;  // both partitions trivial and identical
  return (index - expected) / (max_index - expected);
}

ClusteringScore score_clustering(const Labels& pred, const Labels& truth) {
  ClusteringScore s;
  Accuracy a = hungarian_accuracy(pred, truth);
  s.acc = a.acc;
  s.matching = std::move(a.matching);
  s.nmi = nmi(pred, truth);
  s.ari = ari(pred, truth);
  return s;
}

double prototype_separation(const Matrix& P) {
  require(P.rows() >= 2, "prototype_separation: undefined for K < 2");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < P.rows(); ++j)
    for (Eigen::Index k = j + 1; k < P.rows(); ++k)
      best = std::min(best, (P.row(j) - P.row(k)).squaredNorm());
  return best;
}

double assignment_entropy(const Matrix& Q) {
  require(Q.rows() > 0, "assignment_entropy: empty Q");
  double h = 0.0;
  for (Eigen::Index i = 0; i < Q.size(); ++i) {
    const double q = Q.data()[i];
    if (q > 0.0) h -= q * std::log(q);
  }
  return h / static_cast<double>(Q.rows());
}

Labels hard_labels(const Matrix& Q) {
  Labels out(static_cast<std::size_t>(Q.rows()));
  for (Eigen::Index n = 0; n < Q.rows(); ++n) {
    Eigen::Index k = 0;
    Q.row(n).maxCoeff(&k);
    out[static_cast<std::size_t>(n)] = static_cast<int>(k);
  }
  return out;
}

}  // namespace ddcl
