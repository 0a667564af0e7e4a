#include "ldr/distributions.hpp"

#include <cmath>
#include <numbers>

#include "ldr/errors.hpp"

namespace ldr {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kPgTerms = 5;
}  // namespace

void CensorInterval::validate() const {
  if (!(lower >= 0.0) || !(upper > lower)) {
    throw ParameterError("CensorInterval: need 0 <= lower < upper");
  }
}

void LomaxParams::validate() const {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ParameterError("LomaxParams: shape and scale must be positive");
  }
}

double LomaxParams::mean() const {
  validate();
  if (!(shape > 1.0)) {
    throw ParameterError("LomaxParams::mean: undefined for shape <= 1");
  }
  return scale / (shape - 1.0);
}

double sample_exponential(double rate, Rng& rng) {
  if (!(rate > 0.0)) throw ParameterError("sample_exponential: rate must be positive");
  return rng.exponential() / rate;
}

double sample_truncated_exponential(double rate, const CensorInterval& interval,
                                    Rng& rng) {
  if (!(rate > 0.0)) {
    throw ParameterError("sample_truncated_exponential: rate must be positive");
  }
  interval.validate();
  if (std::isinf(interval.upper)) {
    double t = interval.lower + rng.exponential() / rate;
    if (t <= interval.lower) t = std::nextafter(interval.lower, interval.upper);
    return t;
  }
  // inverse CDF on (T1, T2): T1 - log(1 + u*(e^{-rate*(T2-T1)} - 1)) / rate
  const double width = interval.upper - interval.lower;
  const double u = rng.uniform_pos();
  double t = interval.lower - std::log1p(u * std::expm1(-rate * width)) / rate;
  if (t <= interval.lower) t = std::nextafter(interval.lower, interval.upper);
  if (t >= interval.upper) t = std::nextafter(interval.upper, interval.lower);
  return t;
}

double lomax_density(double t, const LomaxParams& p) {
  p.validate();
  if (t < 0.0) throw std::domain_error("lomax_density: negative time");
  return p.shape / p.scale *
         std::exp(-(p.shape + 1.0) * std::log1p(t / p.scale));
}

double lomax_survival(double t, const LomaxParams& p) {
  p.validate();
  if (t < 0.0) throw std::domain_error("lomax_survival: negative time");
  return std::exp(-p.shape * std::log1p(t / p.scale));
}

double lomax_hazard(double t, const LomaxParams& p) {
  p.validate();
  if (t < 0.0) throw std::domain_error("lomax_hazard: negative time");
  return p.shape / (t + p.scale);
}

double polya_gamma_mean(double shape, double tilt) {
  const double c = std::abs(tilt);
  if (c < 1e-6) {
    return shape * (0.25 - c * c / 48.0);
  }
  return shape / (2.0 * c) * std::tanh(0.5 * c);
}

double polya_gamma_variance(double shape, double tilt) {
  const double c = std::abs(tilt);
  if (c < 1e-4) {
    return shape * (1.0 / 24.0 - c * c / 120.0);
  }
  const double th = std::tanh(0.5 * c);
  const double sech2 = 1.0 - th * th;
  return shape * (th / (2.0 * c * c * c) - sech2 / (4.0 * c * c));
}

double sample_polya_gamma(double shape, double tilt, Rng& rng) {
  if (!(shape > 0.0)) {
    throw ParameterError("sample_polya_gamma: shape must be positive");
  }
  // PG(b, c) = (1 / 2pi^2) * sum_k g_k / ((k - 1/2)^2 + c^2 / (4pi^2)),
  // g_k ~ Gamma(b, 1). Leading terms are drawn exactly.
  const double c2 = tilt * tilt / (4.0 * kPi * kPi);
  double draw = 0.0;
  double head_mean = 0.0;
  double head_var = 0.0;
  for (int k = 1; k <= kPgTerms; ++k) {
    const double half = k - 0.5;
    const double denom = half * half + c2;
    const double w = 1.0 / (2.0 * kPi * kPi * denom);
    draw += w * rng.gamma(shape, 1.0);
    head_mean += shape * w;
    head_var += shape * w * w;
  }
  const double tail_mean = polya_gamma_mean(shape, tilt) - head_mean;
  const double tail_var = polya_gamma_variance(shape, tilt) - head_var;
  if (tail_mean > 0.0 && tail_var > 0.0) {
    // moment ratios can underflow for astronomically small shapes
    const double tail_shape = tail_mean * tail_mean / tail_var;
    const double tail_scale = tail_var / tail_mean;
    if (tail_shape > 0.0 && std::isfinite(tail_shape) && tail_scale > 0.0 &&
        std::isfinite(tail_scale)) {
      draw += rng.gamma(tail_shape, tail_scale);
    } else {
      draw += tail_mean;
    }
  } else if (tail_mean > 0.0) {
    draw += tail_mean;
  }
  return draw;
}

int sample_crt(int count, double concentration, Rng& rng) {
  if (count < 0) throw ParameterError("sample_crt: count must be non-negative");
  if (!(concentration > 0.0)) {
    throw ParameterError("sample_crt: concentration must be positive");
  }
  int tables = 0;
  for (int i = 1; i <= count; ++i) {
    tables += rng.bernoulli(concentration / (concentration + i - 1)) ? 1 : 0;
  }
  return tables;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance, Rng& rng) {
  const Eigen::Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw ParameterError("sample_mvn: covariance shape mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    for (double jitter : {1e-10, 1e-8, 1e-6}) {
      Eigen::MatrixXd bumped = covariance;
      bumped.diagonal().array() += jitter;
      llt.compute(bumped);
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success) {
      throw NumericalError("sample_mvn: covariance factorization failed after jitter");
    }
  }
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  return mean + llt.matrixL() * z;
}

RaceOutcome exponential_race(const Eigen::VectorXd& rates, Rng& rng) {
  if (rates.size() == 0) throw ParameterError("exponential_race: no competitors");
  if (!(rates.minCoeff() > 0.0)) {
    throw ParameterError("exponential_race: rates must be positive");
  }
  const double total = rates.sum();
  RaceOutcome out;
  out.time = rng.exponential() / total;
  out.winner = rng.categorical(rates.data(), static_cast<int>(rates.size()));
  return out;
}

}  // namespace ldr
