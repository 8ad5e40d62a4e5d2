#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace aimh {

// Seeded random source shared by samplers and fitters.  All stochastic code
// takes an Rng& so a run is reproducible from a single seed within one build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unif_(engine_); }

  double normal() { return norm_(engine_); }

  // Index in [0, weights.size()) drawn proportionally to weights.
  // Assumes non-negative weights with a positive sum.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  std::uint64_t raw() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace aimh
