#include "ldr/rng.hpp"

#include <cmath>
#include <numbers>

#include "ldr/errors.hpp"

namespace ldr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

Rng Rng::substream(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(0x51A9B70FD1E3C284ULL + index)));
}

Rng Rng::split() {
  return Rng(splitmix64(gen_() ^ 0xD6E8FEB86659FD93ULL));
}

double Rng::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

double Rng::normal() {
  // Box-Muller, one variate per call
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ParameterError("gamma: shape and scale must be positive");
  }
  if (shape < 1.0) {
    // boost trick, kept in log space so tiny shapes underflow gracefully
    const double g = gamma(shape + 1.0, 1.0);
    return scale * std::exp(std::log(g) + std::log(uniform_pos()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v * scale;
    }
  }
}

bool Rng::bernoulli(double p) { return uniform() < p; }

int Rng::categorical(const double* weights, int n) {
  if (n <= 0) throw ParameterError("categorical: empty weight vector");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw ParameterError("categorical: negative weight");
    total += weights[i];
  }
  if (!(total > 0.0)) throw ParameterError("categorical: weights sum to zero");
  const double u = uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // u landed on the accumulated rounding slack; return the last positive cell
  for (int i = n - 1; i >= 0; --i) {
    if (weights[i] > 0.0) return i;
  }
  return n - 1;
}

}  // namespace ldr
