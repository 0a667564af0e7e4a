#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "ldr/data.hpp"
#include "ldr/rng.hpp"

namespace testutil {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / (v.size() - 1);
}

inline double std_error(const std::vector<double>& v) {
  return std::sqrt(variance(v) / v.size());
}

// one-sample Kolmogorov-Smirnov statistic against a CDF
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // advance both sides past ties so the gap is measured between atoms
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

// asymptotic critical values at alpha = 0.01
inline double ks_critical_one(std::size_t n) { return 1.62762 / std::sqrt(static_cast<double>(n)); }
inline double ks_critical_two(std::size_t n, std::size_t m) {
  return 1.62762 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

// chi-square upper 1% critical values, df 1..12
inline double chi2_critical_01(int df) {
  static const double table[] = {6.635,  9.210,  11.345, 13.277, 15.086, 16.812,
                                 18.475, 20.090, 21.666, 23.209, 24.725, 26.217};
  return table[df - 1];
}

// composite Simpson on a geometric segment grid, for density-mass oracles
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        int segments = 200, int points_per_segment = 64) {
  // first segment linear from lo, then geometric growth to hi
  std::vector<double> knots;
  knots.push_back(lo);
  const double first = lo + (hi - lo) * 1e-6;
  knots.push_back(first);
  const double ratio = std::pow((hi - lo) / (first - lo), 1.0 / (segments - 1));
  double width = first - lo;
  double at = first;
  while (at < hi) {
    width *= ratio;
    at = std::min(at + width, hi);
    knots.push_back(at);
  }
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double a = knots[s], b = knots[s + 1];
    const int n = points_per_segment;  // even
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    total += acc * h / 3.0;
  }
  return total;
}

// brute-force cause-specific concordance over ordered pairs
inline std::optional<double> reference_c_index(const std::vector<double>& scores,
                                               const std::vector<double>& times,
                                               const std::vector<int>& events,
                                               int risk) {
  double pairs = 0.0, hits = 0.0;
  const std::size_t n = scores.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < n; ++o) {
      if (i == o) continue;
      if (events[i] != risk) continue;
      if (!(times[i] < times[o] || events[o] != risk)) continue;
      pairs += 1.0;
      if (scores[i] > scores[o]) {
        hits += 1.0;
      } else if (scores[i] == scores[o]) {
        hits += 0.5;
      }
    }
  }
  if (pairs == 0.0) return std::nullopt;
  return hits / pairs;
}

inline double reference_brier(const std::vector<double>& preds,
                              const std::vector<double>& times,
                              const std::vector<int>& events, int risk, double tau) {
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double y = (times[i] <= tau && events[i] == risk) ? 1.0 : 0.0;
    acc += (y - preds[i]) * (y - preds[i]);
  }
  return acc / preds.size();
}

// per-source Dijkstra on a dense matrix with +inf gaps (APSP oracle)
inline Eigen::MatrixXd dijkstra_apsp(const Eigen::MatrixXd& graph) {
  const int n = static_cast<int>(graph.rows());
  Eigen::MatrixXd out(n, n);
  const double inf = std::numeric_limits<double>::infinity();
  for (int src = 0; src < n; ++src) {
    std::vector<double> dist(n, inf);
    std::vector<bool> done(n, false);
    dist[src] = 0.0;
    for (int iter = 0; iter < n; ++iter) {
      int best = -1;
      for (int i = 0; i < n; ++i) {
        if (!done[i] && (best < 0 || dist[i] < dist[best])) best = i;
      }
      if (best < 0 || dist[best] == inf) break;
      done[best] = true;
      for (int i = 0; i < n; ++i) {
        if (graph(best, i) < inf && dist[best] + graph(best, i) < dist[i]) {
          dist[i] = dist[best] + graph(best, i);
        }
      }
    }
    for (int i = 0; i < n; ++i) out(src, i) = dist[i];
  }
  return out;
}

// uncensored two-risk test dataset from plain vectors
inline ldr::Dataset make_dataset(const std::vector<double>& times,
                                 const std::vector<int>& events, int num_risks,
                                 int num_covariates = 1) {
  ldr::Dataset data;
  for (int v = 1; v <= num_covariates; ++v) {
    data.covariate_names.push_back("x" + std::to_string(v));
  }
  for (int j = 1; j <= num_risks; ++j) {
    data.risk_labels.push_back("risk" + std::to_string(j));
  }
  ldr::Rng rng(99);
  for (std::size_t i = 0; i < times.size(); ++i) {
    ldr::ObservationRecord rec;
    rec.x = Eigen::VectorXd(num_covariates + 1);
    rec.x[0] = 1.0;
    for (int v = 1; v <= num_covariates; ++v) rec.x[v] = rng.normal();
    rec.time_status = ldr::TimeStatus::observed;
    rec.time = times[i];
    rec.event = events[i];
    data.records.push_back(std::move(rec));
  }
  return data;
}

}  // namespace testutil
