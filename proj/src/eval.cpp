#include "ldr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ldr/errors.hpp"

namespace ldr {

SplitResult train_test_split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ParameterError("train_test_split: fraction must lie in [0, 1]");
  }
  data.validate();
  const int n = data.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int pick = std::min(static_cast<int>(rng.uniform() * (i + 1)), i);
    std::swap(order[i], order[pick]);
  }
  const int n_train = static_cast<int>(std::lround(fraction * n));
  SplitResult split;
  split.train.covariate_names = split.test.covariate_names = data.covariate_names;
  split.train.risk_labels = split.test.risk_labels = data.risk_labels;
  split.train.provenance = data.provenance + " [train]";
  split.test.provenance = data.provenance + " [test]";
  for (int i = 0; i < n; ++i) {
    const auto& rec = data.records[order[i]];
    if (i < n_train) {
      split.train.records.push_back(rec);
    } else if (rec.fully_observed()) {
      split.test.records.push_back(rec);
    } else {
      ++split.excluded_from_test;
    }
  }
  return split;
}

std::optional<double> c_index(const Eigen::VectorXd& scores, const Dataset& test,
                              int risk, double) {
  const int n = test.size();
  if (scores.size() != n) {
    throw ParameterError("c_index: one score per test record required");
  }
  if (risk < 1 || risk > test.num_risks()) {
    throw ParameterError("c_index: risk index out of range");
  }
  for (const auto& rec : test.records) {
    if (!rec.fully_observed()) {
      throw ParameterError("c_index: test records must have observed time and event type");
    }
  }
  double comparable = 0.0;
  double concordant = 0.0;
  for (int i = 0; i < n; ++i) {
    if (test.records[i].event != risk) continue;
    for (int other = 0; other < n; ++other) {
      if (other == i) continue;
      const auto& rec_i = test.records[i];
      const auto& rec_o = test.records[other];
      if (!(rec_i.time < rec_o.time || rec_o.event != risk)) continue;
      comparable += 1.0;
      if (scores[i] > scores[other]) {
        concordant += 1.0;
      } else if (scores[i] == scores[other]) {
        concordant += 0.5;
      }
    }
  }
  if (comparable == 0.0) return std::nullopt;
  return concordant / comparable;
}

std::optional<double> brier_score(const Eigen::VectorXd& cif_predictions,
                                  const Dataset& test, int risk, double tau) {
  const int n = test.size();
  if (cif_predictions.size() != n) {
    throw ParameterError("brier_score: one prediction per test record required");
  }
  if (risk < 1 || risk > test.num_risks()) {
    throw ParameterError("brier_score: risk index out of range");
  }
  if (n == 0) return std::nullopt;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& rec = test.records[i];
    if (!rec.fully_observed()) {
      throw ParameterError("brier_score: test records must have observed time and event type");
    }
    const double outcome = (rec.time <= tau && rec.event == risk) ? 1.0 : 0.0;
    const double diff = outcome - cif_predictions[i];
    acc += diff * diff;
  }
  return acc / n;
}

Eigen::VectorXd score_curve_from_posterior(const PosteriorSamples& samples,
                                           const Eigen::VectorXd& x, int risk,
                                           const Eigen::VectorXd& taus, int n_mc,
                                           Rng& rng) {
  if (samples.draws.empty()) throw ParameterError("score_from_posterior: no draws");
  if (n_mc < 1) throw ParameterError("score_from_posterior: n_mc must be >= 1");
  const int n_draws = static_cast<int>(samples.draws.size());
  const int per_draw = std::max(1, n_mc / n_draws);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(taus.size());
  for (int d = 0; d < n_draws; ++d) {
    const LdrParams params = samples.params_at(d);
    acc += cif_curve(x, taus, params, risk - 1, per_draw, rng);
  }
  return acc / n_draws;
}

double score_from_posterior(const PosteriorSamples& samples, const Eigen::VectorXd& x,
                            int risk, double tau, int n_mc, Rng& rng) {
  Eigen::VectorXd taus(1);
  taus[0] = tau;
  return score_curve_from_posterior(samples, x, risk, taus, n_mc, rng)[0];
}

void write_metric_csv(const std::vector<MetricReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open for writing: " + path);
  out << "risk,tau,metric,value\n";
  for (const auto& rep : reports) {
    if (rep.taus.size() != rep.values.size()) {
      throw ParameterError("write_metric_csv: tau/value length mismatch");
    }
    for (std::size_t q = 0; q < rep.taus.size(); ++q) {
      out << rep.risk << ',' << rep.taus[q] << ',' << rep.metric << ','
          << rep.values[q] << '\n';
    }
  }
}

}  // namespace ldr
