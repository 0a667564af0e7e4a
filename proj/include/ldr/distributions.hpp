#pragma once

#include <Eigen/Dense>
#include <limits>

#include "ldr/rng.hpp"

namespace ldr {

// Open censoring interval (lower, upper); upper may be +infinity. Right
// censoring at T is (T, inf), the general case is (T1, T2).
struct CensorInterval {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  void validate() const;
};

struct LomaxParams {
  double shape;  // r
  double scale;  // b
  void validate() const;
  // defined for shape > 1 only
  double mean() const;
};

double sample_exponential(double rate, Rng& rng);

// Exponential(rate) conditioned on landing in the interval. The unbounded
// right tail uses memorylessness, bounded intervals invert the truncated CDF.
double sample_truncated_exponential(double rate, const CensorInterval& interval,
                                    Rng& rng);

double lomax_density(double t, const LomaxParams& p);
double lomax_survival(double t, const LomaxParams& p);
double lomax_hazard(double t, const LomaxParams& p);

// Approximate PG(shape, tilt) draw: the five leading gamma terms of the
// infinite-sum-of-gammas representation plus a single gamma remainder whose
// first two moments match the exact residual tail.
double sample_polya_gamma(double shape, double tilt, Rng& rng);
double polya_gamma_mean(double shape, double tilt);
double polya_gamma_variance(double shape, double tilt);

// Chinese restaurant table count: sum of Bernoulli(r/(r+i-1)) for i=1..count.
int sample_crt(int count, double concentration, Rng& rng);

// Multivariate normal draw via Cholesky with jitter escalation
// (1e-10 -> 1e-8 -> 1e-6) when the covariance is numerically semi-definite.
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance, Rng& rng);

struct RaceOutcome {
  int winner;  // 0-based index of the minimal arrival
  double time;
};

// Race of independent exponentials: the winning time is Exp(sum of rates),
// the winner is categorical in the rates, and the two are independent.
RaceOutcome exponential_race(const Eigen::VectorXd& rates, Rng& rng);

}  // namespace ldr
