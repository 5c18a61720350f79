#include "ddcl/data.hpp"

#include "ddcl/csv.hpp"
#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"
#include "ddcl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ddcl {

double orbital_period(double a_km, double mu) {
  require(a_km > 0.0, "orbital_period: semi-major axis must be positive");
  return 2.0 * std::numbers::pi * std::sqrt(a_km * a_km * a_km / mu);
}

DebrisParams DebrisParams::defaults() {
  DebrisParams p;
  p.regimes = {
      {"LEO", 7200.0, 0.0, 51.6, 0.01, 1.0},
      {"MEO", 20200.0, 0.0, 55.0, 1.0, 10.0},
      {"GEO", 42164.0, 0.0, 0.0, 5.0, 50.0},
      {"HEO", 26560.0, 0.74, 63.4, 0.5, 5.0},
  };
  return p;
}

double DebrisParams::class_sigma(std::size_t c) const {
  if (regimes.size() <= 1) return sigma_min;
  const double t = static_cast<double>(c) / static_cast<double>(regimes.size() - 1);
  return sigma_min + t * (sigma_max - sigma_min);
}

void DebrisParams::validate() const {
  require(!regimes.empty(), "debris: no orbital regimes");
  require(per_class > 0, "debris: per_class must be positive");
  require(sigma_min >= 0.0 && sigma_max >= sigma_min, "debris: invalid noise range");
  for (const auto& r : regimes) {
    require(r.a_km > kEarthRadiusKm, "debris: " + r.name + " semi-major axis below Earth radius");
    require(r.e >= 0.0 && r.e < 1.0, "debris: " + r.name + " eccentricity outside [0, 1)");
    require(r.rcs_min > 0.0 && r.rcs_max >= r.rcs_min, "debris: " + r.name + " invalid RCS range");
  }
}

LabeledDataset generate_debris_raw(const DebrisParams& params, std::uint64_t seed) {
  params.validate();
  const int C = static_cast<int>(params.regimes.size());
  const int N = C * params.per_class;
  Rng rng(seed);
  Rng noise_rng = rng.split(1);

  double a_max = 0.0;
  for (const auto& r : params.regimes) a_max = std::max(a_max, r.a_km);
  const double t_max = orbital_period(a_max, params.mu);

  LabeledDataset out;
  out.X.resize(N, 7);
  out.y.resize(N);
  out.num_classes = C;
  out.feature_names = debris_feature_names();
  std::vector<double> rcs(N);

  for (int n = 0; n < N; ++n) {
    const int c = n % C;
    const OrbitalRegime& r = params.regimes[c];
    const double inc = r.inclination_deg * std::numbers::pi / 180.0;
    const double raan = rng.uniform(0.0, 2.0 * std::numbers::pi);
    rcs[n] = std::exp(rng.uniform(std::log(r.rcs_min), std::log(r.rcs_max)));
    out.y[n] = c;
    out.X(n, 0) = r.a_km / a_max;
    out.X(n, 1) = r.e;
    out.X(n, 2) = std::sin(inc);
    out.X(n, 3) = std::cos(inc);
    out.X(n, 4) = std::sin(raan);
    out.X(n, 6) = orbital_period(r.a_km, params.mu) / t_max;
  }
  const double rcs_max = *std::max_element(rcs.begin(), rcs.end());
  for (int n = 0; n < N; ++n) out.X(n, 5) = rcs[n] / rcs_max;

  for (int n = 0; n < N; ++n) {
    const double sigma = params.class_sigma(static_cast<std::size_t>(out.y[n]));
    if (sigma == 0.0) continue;
    for (int j = 0; j < 7; ++j) out.X(n, j) += noise_rng.normal(0.0, sigma);
  }
  return out;
}

LabeledDataset generate_debris(const DebrisParams& params, std::uint64_t seed) {
  LabeledDataset d = generate_debris_raw(params, seed);
  d.X = standardize_columns(d.X);
  return d;
}

LabeledDataset generate_blobs(int K, int per_class, int dim, double spread, std::uint64_t seed,
                              double center_scale) {
  require(K >= 2, "generate_blobs: need K >= 2");
  require(dim >= K, "generate_blobs: simplex centers need dim >= K");
  require(per_class > 0 && spread >= 0.0, "generate_blobs: invalid size or spread");
  Matrix centers = Matrix::Zero(K, dim);
  for (int k = 0; k < K; ++k) centers(k, k) = center_scale;
  centers.rowwise() -= centers.colwise().mean();

  Rng rng(seed);
  LabeledDataset out;
  out.num_classes = K;
  out.X.resize(static_cast<Eigen::Index>(K) * per_class, dim);
  out.y.resize(static_cast<std::size_t>(K) * per_class);
  for (Eigen::Index n = 0; n < out.X.rows(); ++n) {
    const int c = static_cast<int>(n % K);
    out.y[n] = c;
    for (int j = 0; j < dim; ++j)
      out.X(n, j) = centers(c, j) + (spread > 0.0 ? rng.normal(0.0, spread) : 0.0);
  }
  for (int j = 0; j < dim; ++j) out.feature_names.push_back("x" + std::to_string(j));
  return out;
}

TopicCorpus generate_topic_corpus(const TopicCorpusParams& p, std::uint64_t seed) {
  require(p.topics >= 1 && p.docs_per_topic >= 1 && p.tokens_per_doc >= 1 && p.dim >= 1 &&
              p.subtopics >= 1,
          "generate_topic_corpus: sizes must be positive");
  Rng rng(seed);
  std::vector<Matrix> sub(p.topics);
  for (int t = 0; t < p.topics; ++t) {
    Vector center(p.dim);
    for (int j = 0; j < p.dim; ++j) center(j) = rng.normal(0.0, p.topic_scale);
    sub[t].resize(p.subtopics, p.dim);
    for (int s = 0; s < p.subtopics; ++s)
      for (int j = 0; j < p.dim; ++j) sub[t](s, j) = center(j) + rng.normal(0.0, p.subtopic_scale);
  }
  TopicCorpus corpus;
  for (int d = 0; d < p.topics * p.docs_per_topic; ++d) {
    const int t = d % p.topics;
    Matrix doc(p.tokens_per_doc, p.dim);
    for (int i = 0; i < p.tokens_per_doc; ++i) {
      const auto s = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p.subtopics)));
      for (int j = 0; j < p.dim; ++j) doc(i, j) = sub[t](s, j) + rng.normal(0.0, p.token_noise);
    }
    corpus.docs.push_back(std::move(doc));
    corpus.topic.push_back(t);
  }
  return corpus;
}

TokenMixture TokenMixture::make(int groups, int dim, double center_scale, double spread,
                                Rng& rng) {
  require(groups >= 1 && dim >= 1, "TokenMixture: sizes must be positive");
  TokenMixture mix;
  mix.spread = spread;
  mix.centers.resize(groups, dim);
  for (Eigen::Index i = 0; i < mix.centers.size(); ++i)
    mix.centers.data()[i] = rng.normal(0.0, center_scale);
  return mix;
}

Matrix TokenMixture::sample(int count, Rng& rng, Labels* groups) const {
  Matrix out(count, centers.cols());
  if (groups) groups->assign(static_cast<std::size_t>(count), 0);
  for (int n = 0; n < count; ++n) {
    const auto g = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(centers.rows())));
    if (groups) (*groups)[static_cast<std::size_t>(n)] = static_cast<int>(g);
    for (Eigen::Index j = 0; j < centers.cols(); ++j)
      out(n, j) = centers(g, j) + rng.normal(0.0, spread);
  }
  return out;
}

namespace {

Eigen::Index count_distinct_rows(const Matrix& X) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (X(a, j) < X(b, j)) return true;
      if (X(a, j) > X(b, j)) return false;
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  Eigen::Index distinct = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (less(idx[i - 1], idx[i])) ++distinct;
  return distinct;
}

Matrix plus_plus_seed(const Matrix& X, int K, Rng& rng) {
  const Eigen::Index N = X.rows();
  Matrix C(K, X.cols());
  C.row(0) = X.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(N))));
  std::vector<double> closest(static_cast<std::size_t>(N), std::numeric_limits<double>::infinity());
  for (int k = 1; k < K; ++k) {
    for (Eigen::Index n = 0; n < N; ++n)
      closest[n] = std::min(closest[n], (X.row(n) - C.row(k - 1)).squaredNorm());
    C.row(k) = X.row(static_cast<Eigen::Index>(rng.weighted_index(closest)));
  }
  return C;
}

struct LloydResult {
  Matrix centroids;
  Labels labels;
  double inertia = 0.0;
};

LloydResult lloyd(const Matrix& X, Matrix C, int max_iter) {
  const Eigen::Index N = X.rows(), K = C.rows();
  Labels labels(static_cast<std::size_t>(N), -1);
  Matrix D;
  for (int it = 0; it < max_iter; ++it) {
    kernels::parallel::sq_dists(X, C, D);
    bool changed = false;
    for (Eigen::Index n = 0; n < N; ++n) {
      Eigen::Index k = 0;
      D.row(n).minCoeff(&k);
      if (labels[n] != static_cast<int>(k)) {
        labels[n] = static_cast<int>(k);
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(K, X.cols());
    std::vector<int> counts(static_cast<std::size_t>(K), 0);
    for (Eigen::Index n = 0; n < N; ++n) {
      sums.row(labels[n]) += X.row(n);
      ++counts[labels[n]];
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      if (counts[k] > 0) {
        C.row(k) = sums.row(k) / counts[k];
        continue;
      }
      // Empty cluster: move it to the point worst served by its centroid.
      Eigen::Index far = 0;
      double worst = -1.0;
      for (Eigen::Index n = 0; n < N; ++n)
        if (D(n, labels[n]) > worst && counts[labels[n]] > 1) {
          worst = D(n, labels[n]);
          far = n;
        }
      --counts[labels[far]];
      labels[far] = static_cast<int>(k);
      counts[k] = 1;
      C.row(k) = X.row(far);
      changed = true;
    }
    if (!changed) break;
  }
  kernels::parallel::sq_dists(X, C, D);
  LloydResult r;
  r.inertia = 0.0;
  r.labels.resize(static_cast<std::size_t>(N));
  for (Eigen::Index n = 0; n < N; ++n) {
    Eigen::Index k = 0;
    r.inertia += D.row(n).minCoeff(&k);
    r.labels[n] = static_cast<int>(k);
  }
  r.centroids = std::move(C);
  return r;
}

bool separated(const Matrix& C) {
  for (Eigen::Index j = 0; j < C.rows(); ++j)
    for (Eigen::Index k = j + 1; k < C.rows(); ++k)
      if ((C.row(j) - C.row(k)).squaredNorm() <= 0.0) return false;
  return true;
}

}  // namespace

KMeansResult kmeans(const Matrix& X, int K, int restarts, std::uint64_t seed, int max_iter) {
  require(K >= 1, "kmeans: K must be positive");
  require(restarts >= 1, "kmeans: need at least one restart");
  require(X.rows() >= K, "kmeans: N = " + std::to_string(X.rows()) + " < K = " + std::to_string(K));
  const Eigen::Index distinct = count_distinct_rows(X);
  if (distinct < K) {
    throw Error("kmeans: only " + std::to_string(distinct) + " distinct points for K = " +
                std::to_string(K));
  }
  const Rng root(seed);
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    Rng rng = root.split(static_cast<std::uint64_t>(r));
    LloydResult lr = lloyd(X, plus_plus_seed(X, K, rng), max_iter);
    best.restart_inertia.push_back(lr.inertia);
    if (!separated(lr.centroids)) continue;
    if (!have || lr.inertia < best.inertia) {
      best.centroids = std::move(lr.centroids);
      best.labels = std::move(lr.labels);
      best.inertia = lr.inertia;
      best.best_restart = r;
      have = true;
    }
  }
  if (!have) throw InvariantViolation("kmeans: every restart produced coincident centroids");
  return best;
}

PrototypeBank kmeans_init(const Matrix& Z, int K, int restarts, std::uint64_t seed) {
  return PrototypeBank(kmeans(Z, K, restarts, seed).centroids);
}

void write_dataset_csv(const LabeledDataset& data, const std::string& path) {
  CsvWriter w(path);
  std::vector<std::string> cols = data.feature_names;
  if (cols.size() != static_cast<std::size_t>(data.X.cols())) {
    cols.clear();
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) cols.push_back("x" + std::to_string(j));
  }
  cols.push_back("label");
  w.header(cols);
  for (Eigen::Index n = 0; n < data.X.rows(); ++n) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) w.cell(data.X(n, j));
    w.cell(data.y[static_cast<std::size_t>(n)]);
    w.end_row();
  }
  w.close();
}

}  // namespace ddcl
