#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ddcl {

// Seeded mt19937_64 stream. Child streams are derived deterministically from
// (seed, stream id) so independent consumers never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const;

  double uniform(double lo = 0.0, double hi = 1.0);
  double normal(double mean = 0.0, double sd = 1.0);
  std::size_t index(std::size_t n);
  // Sample an index with probability proportional to weights (k-means++).
  std::size_t weighted_index(const std::vector<double>& weights);
  std::vector<std::size_t> permutation(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace ddcl
