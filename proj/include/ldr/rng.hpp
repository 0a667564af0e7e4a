#pragma once

#include <cstdint>
#include <random>

namespace ldr {

// Seeded pseudo-random generator with splittable substreams. All stochastic
// routines in the library draw through an Rng&, so a chain is reproducible
// from (seed, config, data) alone. Variate transforms are implemented here
// rather than with std:: distributions, whose algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Stream derived from (seed, index); independent of the parent's position.
  Rng substream(std::uint64_t index) const;

  // Child stream seeded from the parent's output; advances the parent.
  Rng split();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t raw() { return gen_(); }

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1)
  double normal();       // standard normal
  double exponential();  // rate 1

  // Gamma(shape, scale) with mean shape*scale. Marsaglia-Tsang; shapes below
  // one are boosted through the power-of-uniform identity in log space.
  double gamma(double shape, double scale);

  bool bernoulli(double p);

  // Index in [0, n) drawn with probability weights[i] / sum. Weights must be
  // non-negative with a positive sum.
  int categorical(const double* weights, int n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace ldr
