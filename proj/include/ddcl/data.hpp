#pragma once

#include "ddcl/layer.hpp"
#include "ddcl/matrix.hpp"
#include "ddcl/metrics.hpp"
#include "ddcl/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ddcl {

inline constexpr double kEarthMu = 398600.4418;  // km^3 / s^2
inline constexpr double kEarthRadiusKm = 6378.0;

struct LabeledDataset {
  Matrix X;
  Labels y;
  std::vector<std::string> feature_names;
  int num_classes = 0;
};

// 2 pi sqrt(a^3 / mu), a in km, result in seconds.
double orbital_period(double a_km, double mu = kEarthMu);

struct OrbitalRegime {
  std::string name;
  double a_km = 0.0;
  double e = 0.0;
  double inclination_deg = 0.0;
  double rcs_min = 0.0;  // m^2, log-uniform range
  double rcs_max = 0.0;
};

struct DebrisParams {
  std::vector<OrbitalRegime> regimes;
  int per_class = 400;
  // Per-class feature noise, linearly spaced over classes in regime order.
  double sigma_min = 0.02;
  double sigma_max = 0.04;
  double mu = kEarthMu;

  // LEO / MEO / GEO / HEO(Molniya).
  static DebrisParams defaults();
  double class_sigma(std::size_t c) const;
  void validate() const;
};

inline const std::vector<std::string>& debris_feature_names() {
  static const std::vector<std::string> names = {"a_norm", "e",        "sin_i",     "cos_i",
                                                 "sin_raan", "rcs_norm", "period_norm"};
  return names;
}

// Feature vectors [a/a_max, e, sin i, cos i, sin RAAN, RCS/RCS_max, T/T_max]
// plus per-class noise, before standardization. Objects cycle through the
// classes in regime order.
LabeledDataset generate_debris_raw(const DebrisParams& params, std::uint64_t seed);

// generate_debris_raw followed by per-feature standardization.
LabeledDataset generate_debris(const DebrisParams& params, std::uint64_t seed);

// K isotropic Gaussian clusters centered on a regular simplex (scaled basis
// vectors, recentered). Requires dim >= K.
LabeledDataset generate_blobs(int K, int per_class, int dim, double spread, std::uint64_t seed,
                              double center_scale = 1.0);

struct TopicCorpusParams {
  int topics = 20;
  int docs_per_topic = 50;
  int tokens_per_doc = 32;
  int dim = 128;
  int subtopics = 4;
  double topic_scale = 1.0;
  double subtopic_scale = 0.5;
  double token_noise = 0.3;
};

struct TopicCorpus {
  std::vector<Matrix> docs;  // each tokens_per_doc x dim
  Labels topic;
};

TopicCorpus generate_topic_corpus(const TopicCorpusParams& params, std::uint64_t seed);

// Gaussian mixture used as a synthetic stand-in for encoder latent tokens.
struct TokenMixture {
  Matrix centers;  // G x d
  double spread = 1.0;

  static TokenMixture make(int groups, int dim, double center_scale, double spread, Rng& rng);
  // Optionally reports the mixture component of each token.
  Matrix sample(int count, Rng& rng, Labels* groups = nullptr) const;
};

struct KMeansResult {
  Matrix centroids;
  Labels labels;
  double inertia = 0.0;
  std::vector<double> restart_inertia;
  int best_restart = 0;
};

// k-means++ seeding, Lloyd iterations, best of `restarts` by inertia. Throws
// when X has fewer than K distinct rows.
KMeansResult kmeans(const Matrix& X, int K, int restarts, std::uint64_t seed, int max_iter = 300);

// Prototype bank from kmeans(); always has S(P) > 0.
PrototypeBank kmeans_init(const Matrix& Z, int K, int restarts, std::uint64_t seed);

// Writes the dataset as comma separated text: header row, one object per line,
// label in the final column.
void write_dataset_csv(const LabeledDataset& data, const std::string& path);

}  // namespace ddcl
