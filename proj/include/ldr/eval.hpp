#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ldr/data.hpp"
#include "ldr/gibbs.hpp"
#include "ldr/model.hpp"

namespace ldr {

struct SplitResult {
  Dataset train;
  Dataset test;               // fully observed rows only
  int excluded_from_test = 0; // rows dropped by the exclusion rule
};

// Deterministic shuffle split; the test part keeps only rows with observed
// uncensored time and known event type.
SplitResult train_test_split(const Dataset& data, double fraction, std::uint64_t seed);

// Cause-specific concordance: fraction of comparable ordered pairs (i, i')
// with y_i = risk and (t_i < t_{i'} or y_{i'} != risk) whose scores are
// concordant; score ties earn half credit. Empty when no pair is comparable.
std::optional<double> c_index(const Eigen::VectorXd& scores, const Dataset& test,
                              int risk, double tau);

// Mean squared difference between the event indicator 1(t <= tau, y = risk)
// and the predicted incidence. Empty on an empty test set.
std::optional<double> brier_score(const Eigen::VectorXd& cif_predictions,
                                  const Dataset& test, int risk, double tau);

// Prognostic score = cumulative incidence, averaged over posterior draws
// (total Monte-Carlo budget n_mc spread across draws).
double score_from_posterior(const PosteriorSamples& samples, const Eigen::VectorXd& x,
                            int risk, double tau, int n_mc, Rng& rng);
Eigen::VectorXd score_curve_from_posterior(const PosteriorSamples& samples,
                                           const Eigen::VectorXd& x, int risk,
                                           const Eigen::VectorXd& taus, int n_mc,
                                           Rng& rng);

struct MetricReport {
  int risk = 0;  // 1-based
  std::string metric;  // "cindex" | "brier"
  std::vector<double> taus;
  std::vector<double> values;
  std::vector<double> std_errors;  // optional, may be empty
  std::string split_id;
};

void write_metric_csv(const std::vector<MetricReport>& reports, const std::string& path);

}  // namespace ldr
