// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1-4 and 9 share one pool of Gibbs fits over seeded
// synthetic partitions; 5-8 are sampler- and estimator-level checks.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ldr/data.hpp"
#include "ldr/distributions.hpp"
#include "ldr/eval.hpp"
#include "ldr/gibbs.hpp"
#include "ldr/map.hpp"
#include "ldr/math.hpp"
#include "ldr/model.hpp"

using namespace ldr;

namespace {

int g_failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, label.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / v.size();
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (v.size() - 1));
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
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

double ks_critical(std::size_t n, std::size_t m) {
  return 1.62762 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

void run_parallel(std::vector<std::function<void()>> jobs) {
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      jobs[idx]();
    }
  };
  std::thread other(worker);
  worker();
  other.join();
}

// ---------------------------------------------------------------------------
// shared fit pool

struct Partition {
  SplitResult split;
  PosteriorSamples ldr;       // K = 10
  PosteriorSamples baseline;  // K = 1 (data2 partitions only)
  PosteriorSamples masked;    // 20% masked events (data1 partitions only)
  Dataset masked_train;
  std::vector<int> masked_rows;  // indices into split.train
};

ChainConfig fast_chain(int truncation, std::uint64_t seed) {
  ChainConfig config = ChainConfig::fast_profile();
  config.truncation = truncation;
  config.seed = seed;
  return config;
}

Eigen::VectorXd test_scores(const PosteriorSamples& fit, const Dataset& test, int risk,
                            double tau, std::uint64_t seed) {
  Eigen::VectorXd taus(1);
  taus[0] = tau;
  Rng rng(seed);
  Eigen::VectorXd scores(test.size());
  for (int i = 0; i < test.size(); ++i) {
    scores[i] = score_curve_from_posterior(fit, test.records[i].x, risk, taus,
                                           static_cast<int>(fit.draws.size()), rng)[0];
  }
  return scores;
}

}  // namespace

// ---------------------------------------------------------------------------

int main() {
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_min = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
               .count() /
           60.0;
  };

  // ---- fit pool -----------------------------------------------------------
  const int n_partitions = 5;
  std::vector<Partition> data2_parts(n_partitions);
  std::vector<Partition> data1_parts(n_partitions);

  const auto t_fit0 = std::chrono::steady_clock::now();
  {
    std::vector<std::function<void()>> jobs;
    for (int p = 0; p < n_partitions; ++p) {
      jobs.push_back([&, p]() {
        Rng data_rng(200 + p);
        const Dataset full = simulate(SyntheticSpec::data2(1000, 200 + p), data_rng);
        data2_parts[p].split = train_test_split(full, 0.8, 200 + p);
        Rng rng_a(5200 + p), rng_b(6200 + p);
        data2_parts[p].ldr = run_chain(data2_parts[p].split.train, fast_chain(10, 5200 + p), rng_a);
        data2_parts[p].baseline =
            run_chain(data2_parts[p].split.train, fast_chain(1, 6200 + p), rng_b);
      });
      jobs.push_back([&, p]() {
        Rng data_rng(100 + p);
        const Dataset full = simulate(SyntheticSpec::data1(1000, 100 + p), data_rng);
        data1_parts[p].split = train_test_split(full, 0.8, 100 + p);
        Rng rng_a(5100 + p);
        data1_parts[p].ldr = run_chain(data1_parts[p].split.train, fast_chain(10, 5100 + p), rng_a);

        // mask 20% of the known training event types
        Dataset masked = data1_parts[p].split.train;
        Rng mask_rng(7100 + p);
        for (int i = 0; i < masked.size(); ++i) {
          if (masked.records[i].event_known() && mask_rng.uniform() < 0.2) {
            masked.records[i].event = 0;
            data1_parts[p].masked_rows.push_back(i);
          }
        }
        data1_parts[p].masked_train = std::move(masked);
        Rng rng_b(8100 + p);
        data1_parts[p].masked =
            run_chain(data1_parts[p].masked_train, fast_chain(10, 8100 + p), rng_b);
      });
    }
    run_parallel(std::move(jobs));
  }

  // ---- criterion 1: data2 separation --------------------------------------
  {
    const std::vector<double> taus{1, 2, 3, 4, 5, 6};
    bool pass = true;
    std::string detail;
    double worst_ldr = 1.0, worst_low = 1.0, worst_high = 0.0;
    for (int risk = 1; risk <= 2; ++risk) {
      for (double tau : taus) {
        std::vector<double> c_ldr, c_base;
        for (int p = 0; p < n_partitions; ++p) {
          const Dataset& test = data2_parts[p].split.test;
          const auto scores_l =
              test_scores(data2_parts[p].ldr, test, risk, tau, 900 + p);
          const auto scores_b =
              test_scores(data2_parts[p].baseline, test, risk, tau, 950 + p);
          c_ldr.push_back(*c_index(scores_l, test, risk, tau));
          c_base.push_back(*c_index(scores_b, test, risk, tau));
        }
        const double avg_l = mean_of(c_ldr);
        const double avg_b = mean_of(c_base);
        worst_ldr = std::min(worst_ldr, avg_l);
        worst_low = std::min(worst_low, avg_b);
        worst_high = std::max(worst_high, avg_b);
        if (!(avg_l > 0.60)) pass = false;
        if (!(avg_b >= 0.45 && avg_b <= 0.58)) pass = false;
      }
    }
    const double fit_minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_fit0).count() /
        60.0;
    if (fit_minutes > 30.0) pass = false;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "min LDR C=%.3f; baseline C in [%.3f, %.3f]; %.1f min",
                  worst_ldr, worst_low, worst_high, fit_minutes);
    report(1, "data2 separation: LDR C-index > 0.60, log-linear baseline near 0.5",
           pass, buf);
  }

  // ---- criterion 2: shrinkage structure ------------------------------------
  {
    int data1_hits = 0, data2_hits = 0;
    for (int p = 0; p < n_partitions; ++p) {
      const auto d1 = data1_parts[p].ldr.median_dominant_atoms();
      const auto d2 = data2_parts[p].ldr.median_dominant_atoms();
      data1_hits += (d1[0] == 1 && d1[1] == 1);
      data2_hits += (d2[0] == 2 && d2[1] == 2);
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "data1 1-atom runs: %d/5; data2 2-atom runs: %d/5",
                  data1_hits, data2_hits);
    report(2, "posterior keeps one dominant sub-risk on data1, two on data2",
           data1_hits >= 4 && data2_hits >= 4, buf);
  }

  // ---- criteria 3 and 4: Brier reproduction --------------------------------
  const auto brier_avg = [&](std::vector<Partition>& parts, bool baseline, int risk,
                             double tau, int seed_base) {
    std::vector<double> values;
    for (int p = 0; p < n_partitions; ++p) {
      const Dataset& test = parts[p].split.test;
      const PosteriorSamples& fit = baseline ? parts[p].baseline : parts[p].ldr;
      const auto scores = test_scores(fit, test, risk, tau, seed_base + p);
      values.push_back(*brier_score(scores, test, risk, tau));
    }
    return mean_of(values);
  };
  {
    const std::vector<double> taus{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    const double table_r1[] = {.164, .166, .164, .165, .164, .162};
    const double table_r2[] = {.152, .158, .158, .156, .157, .158};
    bool pass = true;
    double worst_gap = 0.0;
    for (std::size_t q = 0; q < taus.size(); ++q) {
      const double b1 = brier_avg(data1_parts, false, 1, taus[q], 1300);
      const double b2 = brier_avg(data1_parts, false, 2, taus[q], 1400);
      worst_gap = std::max({worst_gap, std::abs(b1 - table_r1[q]), std::abs(b2 - table_r2[q])});
      if (std::abs(b1 - table_r1[q]) > 0.03 || std::abs(b2 - table_r2[q]) > 0.03) pass = false;
    }
    char buf[100];
    std::snprintf(buf, sizeof(buf), "largest gap to the published rows: %.3f", worst_gap);
    report(3, "data1 Brier within 0.03 of the published LDR rows", pass, buf);
  }
  {
    const std::vector<double> taus{1, 2, 3, 4, 5, 6};
    const double table_r1[] = {.193, .194, .191, .191, .191, .191};
    const double table_r2[] = {.204, .199, .197, .198, .197, .199};
    bool pass = true;
    double worst_gap = 0.0, worst_margin = 1.0;
    for (std::size_t q = 0; q < taus.size(); ++q) {
      const double l1 = brier_avg(data2_parts, false, 1, taus[q], 1500);
      const double l2 = brier_avg(data2_parts, false, 2, taus[q], 1600);
      const double k1 = brier_avg(data2_parts, true, 1, taus[q], 1700);
      const double k2 = brier_avg(data2_parts, true, 2, taus[q], 1800);
      worst_gap = std::max({worst_gap, std::abs(l1 - table_r1[q]), std::abs(l2 - table_r2[q])});
      worst_margin = std::min({worst_margin, k1 - l1, k2 - l2});
      if (std::abs(l1 - table_r1[q]) > 0.03 || std::abs(l2 - table_r2[q]) > 0.03) pass = false;
      if (!(l1 < k1 && l2 < k2)) pass = false;
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "largest gap %.3f; smallest LDR advantage over K=1: %.3f",
                  worst_gap, worst_margin);
    report(4, "data2 Brier within 0.03 of published rows and below the K=1 baseline",
           pass, buf);
  }

  // ---- criterion 5: sampler correctness ------------------------------------
  {
    bool pass_a = true;
    std::string detail_a;
    {
      // (a) no-data prior reproduction. Run at vague-but-representable
      // hyperparameters: under the 0.01-shape defaults the priors carry
      // mass below the double floor and the no-data precision subchain
      // has to diffuse across hundreds of orders of magnitude, so no
      // empirical comparison at the defaults can converge.
      Dataset empty;
      empty.covariate_names = {"x1"};
      empty.risk_labels = {"risk1"};
      ChainConfig config;
      config.iterations = 2;
      config.burn_in = 1;
      config.truncation = 2;
      config.prune = false;
      config.hyper.a0 = config.hyper.b0 = config.hyper.e0 = 0.25;
      config.hyper.f0 = config.hyper.e1 = config.hyper.f1 = 0.25;
      Rng rng(41);
      GibbsState st = init_state(empty, config, rng);
      const int sweeps = 800000, thin = 40, burn = 1000;
      std::vector<double> g_r, g_gamma0, g_c0, g_alpha, g_beta;
      for (int s = 0; s < sweeps; ++s) {
        gibbs_sweep(st, empty, config, rng);
        if (s >= burn && s % thin == 0) {
          g_r.push_back(st.atom_weight(0, 0));
          g_gamma0.push_back(st.gamma0[0]);
          g_c0.push_back(st.c0[0]);
          g_alpha.push_back(st.coeff_prec(0, 0));
          g_beta.push_back(st.coeff(0, 0));
        }
      }
      const std::size_t n_fwd = g_r.size();
      std::vector<double> f_r(n_fwd), f_gamma0(n_fwd), f_c0(n_fwd), f_alpha(n_fwd), f_beta(n_fwd);
      Rng fwd(42);
      const Hyperparams hp = config.hyper;
      const double floor = std::numeric_limits<double>::min();
      for (std::size_t i = 0; i < n_fwd; ++i) {
        f_gamma0[i] = std::max(fwd.gamma(hp.e0, 1.0 / hp.f0), floor);
        f_c0[i] = std::max(fwd.gamma(hp.e1, 1.0 / hp.f1), floor);
        f_r[i] = std::max(fwd.gamma(f_gamma0[i] / config.truncation, 1.0 / f_c0[i]), floor);
        f_alpha[i] = std::max(fwd.gamma(hp.a0, 1.0 / hp.b0), floor);
        f_beta[i] = fwd.normal() / std::sqrt(f_alpha[i]);
      }
      struct Family {
        const char* name;
        std::vector<double>* chain;
        std::vector<double>* prior;
      };
      std::vector<Family> families{{"r", &g_r, &f_r},
                                   {"gamma0", &g_gamma0, &f_gamma0},
                                   {"c0", &g_c0, &f_c0},
                                   {"alpha", &g_alpha, &f_alpha},
                                   {"beta", &g_beta, &f_beta}};
      for (auto& fam : families) {
        // bounded-transform moment test at 3 MC standard errors (raw moments
        // of these families are heavy-tailed or undefined)
        auto bounded = [](double x) { return x / (1.0 + std::abs(x)); };
        std::vector<double> tc, tp;
        for (double x : *fam.chain) tc.push_back(bounded(x));
        for (double x : *fam.prior) tp.push_back(bounded(x));
        const double se = std::sqrt(sd_of(tc) * sd_of(tc) / tc.size() +
                                    sd_of(tp) * sd_of(tp) / tp.size());
        const double gap = std::abs(mean_of(tc) - mean_of(tp));
        const double ks = ks_two_sample(*fam.chain, *fam.prior);
        const double crit = ks_critical(fam.chain->size(), fam.prior->size());
        if (gap > 3 * se + 1e-4 || ks > crit) {
          pass_a = false;
          detail_a += std::string(fam.name) + " off; ";
        }
      }
    }

    bool pass_b = true;
    double geweke_worst = 0.0;
    {
      // (b) successive-conditional joint test on a 5-subject problem, run at
      // moderate hyperparameters so the forward model stays inside double
      // range; the kernel under test is the production sweep
      const int n = 5, num_risks = 2, truncation = 2, dim = 2;
      ChainConfig config;
      config.iterations = 2;
      config.burn_in = 1;
      config.truncation = truncation;
      config.prune = false;
      Hyperparams hp;
      hp.a0 = hp.b0 = hp.e0 = hp.f0 = hp.e1 = hp.f1 = 1.0;
      config.hyper = hp;
      Rng rng(43);
      Eigen::MatrixXd design(n, dim);
      for (int i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = rng.normal();
      }

      GibbsState st;
      st.n = n;
      st.num_risks = num_risks;
      st.truncation = truncation;
      st.dim = dim;
      st.design = design;
      st.time.resize(n);
      st.log_time.resize(n);
      st.event.resize(n);
      st.subrisk.resize(n);
      st.lambda.resize(n, num_risks * truncation);
      st.assign_count.setZero(num_risks, truncation);
      st.active.setConstant(num_risks, truncation, true);
      st.gamma0.resize(num_risks);
      st.c0.resize(num_risks);
      st.atom_weight.resize(num_risks, truncation);
      st.coeff.resize(dim, num_risks * truncation);
      st.coeff_prec.resize(dim, num_risks * truncation);
      auto prior_theta = [&](Rng& r, GibbsState& state) {
        for (int j = 0; j < num_risks; ++j) {
          state.gamma0[j] = std::max(r.gamma(hp.e0, 1.0 / hp.f0), 1e-300);
          state.c0[j] = std::max(r.gamma(hp.e1, 1.0 / hp.f1), 1e-300);
          for (int k = 0; k < truncation; ++k) {
            state.atom_weight(j, k) =
                std::max(r.gamma(state.gamma0[j] / truncation, 1.0 / state.c0[j]), 1e-300);
          }
        }
        for (int a = 0; a < num_risks * truncation; ++a) {
          for (int v = 0; v < dim; ++v) {
            state.coeff_prec(v, a) = std::max(r.gamma(hp.a0, 1.0 / hp.b0), 1e-300);
            state.coeff(v, a) = r.normal() / std::sqrt(state.coeff_prec(v, a));
          }
        }
      };
      prior_theta(rng, st);

      const int rounds = 6000000, thin = 300;
      std::vector<double> chain_gamma0, chain_c0, chain_r, chain_beta;
      for (int round = 0; round < rounds; ++round) {
        Dataset data;
        data.covariate_names = {"x1"};
        data.risk_labels = {"risk1", "risk2"};
        st.assign_count.setZero();
        for (int i = 0; i < n; ++i) {
          double best_t = 0.0;
          int best_a = -1;
          for (int j = 0; j < num_risks; ++j) {
            for (int k = 0; k < truncation; ++k) {
              const int a = st.flat(j, k);
              const double eta = st.coeff.col(a).dot(design.row(i));
              const double log_lt = std::log(rng.gamma(st.atom_weight(j, k), 1.0)) + eta;
              st.lambda(i, a) = std::clamp(std::exp(log_lt), 1e-300, 1e300);
              const double t_atom = rng.exponential() / st.lambda(i, a);
              if (best_a < 0 || t_atom < best_t) {
                best_t = t_atom;
                best_a = a;
              }
            }
          }
          st.event[i] = best_a / truncation;
          st.subrisk[i] = best_a % truncation;
          st.time[i] = std::min(best_t, 1e300);
          st.log_time[i] = std::log(st.time[i]);
          ++st.assign_count(st.event[i], st.subrisk[i]);
          ObservationRecord rec;
          rec.x = design.row(i);
          rec.time_status = TimeStatus::observed;
          rec.time = st.time[i];
          rec.event = st.event[i] + 1;
          data.records.push_back(std::move(rec));
        }
        gibbs_sweep(st, data, config, rng);
        if (round % thin == 0) {
          chain_gamma0.push_back(st.gamma0[0]);
          chain_c0.push_back(st.c0[0]);
          chain_r.push_back(st.atom_weight(0, 0));
          chain_beta.push_back(st.coeff(0, 0));
        }
      }
      const std::size_t n_fwd = chain_gamma0.size();
      std::vector<double> fwd_gamma0(n_fwd), fwd_c0(n_fwd), fwd_r(n_fwd), fwd_beta(n_fwd);
      Rng fwd(44);
      for (std::size_t i = 0; i < n_fwd; ++i) {
        fwd_gamma0[i] = std::max(fwd.gamma(hp.e0, 1.0 / hp.f0), 1e-300);
        fwd_c0[i] = std::max(fwd.gamma(hp.e1, 1.0 / hp.f1), 1e-300);
        fwd_r[i] = std::max(fwd.gamma(fwd_gamma0[i] / truncation, 1.0 / fwd_c0[i]), 1e-300);
        const double prec = std::max(fwd.gamma(hp.a0, 1.0 / hp.b0), 1e-300);
        fwd_beta[i] = fwd.normal() / std::sqrt(prec);
      }
      for (auto [chain, prior] :
           {std::pair{&chain_gamma0, &fwd_gamma0}, std::pair{&chain_c0, &fwd_c0},
            std::pair{&chain_r, &fwd_r}, std::pair{&chain_beta, &fwd_beta}}) {
        const double ks = ks_two_sample(*chain, *prior);
        geweke_worst = std::max(geweke_worst, ks / ks_critical(chain->size(), prior->size()));
        if (ks > ks_critical(chain->size(), prior->size())) pass_b = false;
      }
    }

    bool pass_c = true;
    {
      // (c) full-conditional cross-checks against Metropolis oracles
      // lambda: target lambda^n e^{-t lambda} Gamma(lambda; r, e^{xb})
      const double r = 1.3, xb = 0.4, t_obs = 1.7;
      const int n_ijk = 1;
      Rng rng(45);
      std::vector<double> gibbs_draws;
      for (int rep = 0; rep < 200000; ++rep) {
        gibbs_draws.push_back(
            rng.gamma(r + n_ijk, 1.0 / (std::exp(-xb) + t_obs)));
      }
      auto log_target = [&](double ll) {
        const double lambda = std::exp(ll);
        return (r + n_ijk) * ll - lambda * (std::exp(-xb) + t_obs);
      };
      std::vector<double> mh;
      double theta = 0.0, current = log_target(theta);
      Rng mh_rng(46);
      for (int step = 0; step < 400000; ++step) {
        const double prop = theta + 0.8 * mh_rng.normal();
        const double cand = log_target(prop);
        if (std::log(mh_rng.uniform_pos()) < cand - current) {
          theta = prop;
          current = cand;
        }
        if (step >= 50000) mh.push_back(std::exp(theta));
      }
      if (std::abs(mean_of(gibbs_draws) - mean_of(mh)) > 0.03 * mean_of(mh)) pass_c = false;

      // r: CRT-augmented subchain vs Metropolis on the collapsed conditional
      const double gamma0 = 1.2, c0 = 0.8, k_trunc = 3.0;
      const std::vector<int> wins{1, 1, 0};
      const std::vector<double> terms{0.9, 0.4, 1.3};
      const double s_total = 2.6;
      Rng sub_rng(47);
      double r_draw = 1.0;
      std::vector<double> sub;
      for (int step = 0; step < 400000; ++step) {
        int tables = 0;
        for (int i = 0; i < 3; ++i) tables += sample_crt(wins[i], r_draw, sub_rng);
        r_draw = std::max(sub_rng.gamma(tables + gamma0 / k_trunc, 1.0 / (c0 + s_total)),
                          1e-300);
        if (step >= 50000) sub.push_back(r_draw);
      }
      auto r_target = [&](double th) {
        const double rr = std::exp(th);
        double lt = (gamma0 / k_trunc) * th - c0 * rr;
        for (int i = 0; i < 3; ++i) {
          if (wins[i] == 1) lt += std::log(rr);
          lt -= rr * terms[i];
        }
        return lt;
      };
      std::vector<double> mh_r;
      theta = 0.0;
      current = r_target(theta);
      Rng mh2(48);
      for (int step = 0; step < 700000; ++step) {
        const double prop = theta + 1.0 * mh2.normal();
        const double cand = r_target(prop);
        if (std::log(mh2.uniform_pos()) < cand - current) {
          theta = prop;
          current = cand;
        }
        if (step >= 50000) mh_r.push_back(std::exp(theta));
      }
      if (std::abs(mean_of(sub) - mean_of(mh_r)) > 0.03 * mean_of(mh_r)) pass_c = false;
    }

    char buf[200];
    std::snprintf(buf, sizeof(buf), "prior-reproduction %s; Geweke worst KS ratio %.2f; oracles %s",
                  pass_a ? "ok" : ("FAILED: " + detail_a).c_str(), geweke_worst,
                  pass_c ? "ok" : "FAILED");
    report(5, "Gibbs correctness: prior reproduction, Geweke, Metropolis oracles",
           pass_a && pass_b && pass_c, buf);
  }

  // ---- criterion 6: MAP gradient fidelity -----------------------------------
  {
    bool pass = true;
    double worst_rel = 0.0;
    Rng rng(61);
    for (int config_i = 0; config_i < 20; ++config_i) {
      const int num_risks = 2, k = 2, v = 2;
      std::vector<Eigen::VectorXd> w;
      std::vector<Eigen::MatrixXd> c;
      for (int j = 0; j < num_risks; ++j) {
        Eigen::VectorXd wj(k);
        Eigen::MatrixXd cj(k, v + 1);
        for (int kk = 0; kk < k; ++kk) {
          wj[kk] = rng.gamma(2.0, 0.5);
          for (int col = 0; col <= v; ++col) cj(kk, col) = 0.4 * rng.normal();
        }
        w.push_back(wj);
        c.push_back(cj);
      }
      const LdrParams params(w, c);
      ObservationRecord rec;
      rec.x = Eigen::VectorXd(v + 1);
      rec.x[0] = 1.0;
      for (int col = 1; col <= v; ++col) rec.x[col] = rng.normal();
      rec.time_status =
          config_i % 3 == 0 ? TimeStatus::right_censored : TimeStatus::observed;
      rec.time = 0.4 + rng.uniform();
      rec.event = config_i % 3 == 0 ? 0 : 1 + config_i % 2;

      const Eigen::MatrixXd draws = sample_lambda_tilde(params, 24, rng);
      const Eigen::MatrixXd grad = grad_beta(rec, params, draws);
      int flat = 0;
      for (int j = 0; j < num_risks; ++j) {
        for (int kk = 0; kk < k; ++kk, ++flat) {
          for (int col = 0; col <= v; ++col) {
            const double h = 1e-5;
            auto value = [&](double delta) {
              auto c2 = c;
              c2[j](kk, col) += delta;
              return mc_log_likelihood(rec, LdrParams(w, c2), draws);
            };
            const double fd = (value(h) - value(-h)) / (2 * h);
            const double rel =
                std::abs(grad(col, flat) - fd) / std::max(std::abs(fd), 1e-4);
            worst_rel = std::max(worst_rel, rel);
            if (rel >= 1e-5) pass = false;
          }
        }
      }
    }
    // grad_r against the exact single-atom marginal derivative at M = 10^4
    Eigen::MatrixXd coeff(1, 1);
    coeff << 0.2;
    const double r_atom = 1.4;
    const LdrParams single({Eigen::VectorXd::Constant(1, r_atom)}, {coeff});
    ObservationRecord rec;
    rec.x = Eigen::VectorXd::Constant(1, 1.0);
    rec.time_status = TimeStatus::observed;
    rec.time = 1.1;
    rec.event = 1;
    const double b = std::exp(-0.2);
    const double exact = 1.0 / r_atom + std::log(b) - std::log(rec.time + b);
    std::vector<double> estimates;
    for (int rep = 0; rep < 50; ++rep) {
      estimates.push_back(
          grad_r(rec, single, sample_lambda_tilde(single, 10000, rng))[0]);
    }
    const double se = sd_of(estimates) / std::sqrt(50.0);
    const double gap = std::abs(mean_of(estimates) - exact);
    if (gap > 2 * se) pass = false;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "worst FD rel err %.2e; grad_r gap %.4f (2 SE = %.4f)",
                  worst_rel, gap, 2 * se);
    report(6, "MAP gradients: finite-difference and marginal-derivative fidelity",
           pass, buf);
  }

  // ---- criterion 7: gamma-convolution series ---------------------------------
  {
    bool pass = true;
    double worst = 0.0;
    int worst_terms = 0;
    Rng rng(71);
    for (int spec_i = 0; spec_i < 50; ++spec_i) {
      const int comps = 2 + static_cast<int>(rng.uniform() * 4);
      Eigen::VectorXd shapes(comps), scales(comps);
      for (int t = 0; t < comps; ++t) {
        shapes[t] = 0.4 + 2.1 * rng.uniform();
        scales[t] = 0.4 * std::pow(10.0, rng.uniform());
      }
      const GammaConvolutionSpec spec(shapes, scales);
      if (spec.retained_mass() < 0.9999) pass = false;
      worst_terms = std::max(worst_terms, spec.truncation_terms());

      const int n = 1000000;
      std::vector<double> draws(n);
      for (auto& d : draws) {
        double rate = 0.0;
        for (int t = 0; t < comps; ++t) rate += rng.gamma(shapes[t], 1.0 / scales[t]);
        d = rng.exponential() / rate;
      }
      std::sort(draws.begin(), draws.end());
      for (double p : {0.25, 0.5, 0.75}) {
        const double q = draws[static_cast<std::size_t>(p * n)];
        const double gap = std::abs(marginal_time_cdf(q, spec) - p);
        worst = std::max(worst, gap);
        if (gap > 0.003) pass = false;
      }
    }
    // closed forms
    {
      Eigen::VectorXd shapes(1), scales(1);
      shapes << 1.7;
      scales << 2.3;
      const GammaConvolutionSpec one(shapes, scales);
      for (double q : {0.3, 1.0, 5.0}) {
        const double exact = 1.0 - std::pow(2.3 / (q + 2.3), 1.7);
        if (std::abs(marginal_time_cdf(q, one) - exact) > 1e-8) pass = false;
      }
      Eigen::VectorXd sh(3), sc(3);
      sh << 0.5, 1.5, 2.0;
      sc << 2.0, 2.0, 2.0;
      const GammaConvolutionSpec same(sh, sc);
      for (double q : {0.3, 1.0, 5.0}) {
        const double exact = 1.0 - std::pow(2.0 / (q + 2.0), 4.0);
        if (std::abs(marginal_time_cdf(q, same) - exact) > 1e-8) pass = false;
      }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "worst quantile gap %.4f; largest truncation %d terms",
                  worst, worst_terms);
    report(7, "gamma-convolution CDF matches simulation and closed forms", pass, buf);
  }

  // ---- criterion 8: metric oracles -------------------------------------------
  {
    bool pass = true;
    Rng rng(81);
    for (int rep = 0; rep < 1000 && pass; ++rep) {
      const int n = 2 + static_cast<int>(rng.uniform() * 5);
      std::vector<double> times(n), scores_v(n);
      std::vector<int> events(n);
      Eigen::VectorXd scores(n);
      for (int i = 0; i < n; ++i) {
        times[i] = 0.25 * (1 + static_cast<int>(rng.uniform() * 8));
        scores_v[i] = 0.1 * static_cast<int>(rng.uniform() * 10);
        scores[i] = scores_v[i];
        events[i] = 1 + static_cast<int>(rng.uniform() * 2);
      }
      Dataset data;
      data.covariate_names = {"x1"};
      data.risk_labels = {"risk1", "risk2"};
      for (int i = 0; i < n; ++i) {
        ObservationRecord rec;
        rec.x = Eigen::VectorXd(2);
        rec.x << 1.0, 0.0;
        rec.time_status = TimeStatus::observed;
        rec.time = times[i];
        rec.event = events[i];
        data.records.push_back(rec);
      }
      for (int risk : {1, 2}) {
        // exhaustive pair enumeration
        double pairs = 0.0, hits = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int o = 0; o < n; ++o) {
            if (i == o || events[i] != risk) continue;
            if (!(times[i] < times[o] || events[o] != risk)) continue;
            pairs += 1.0;
            hits += scores_v[i] > scores_v[o] ? 1.0 : scores_v[i] == scores_v[o] ? 0.5 : 0.0;
          }
        }
        const auto mine = c_index(scores, data, risk, 1.0);
        if (pairs == 0.0) {
          if (mine.has_value()) pass = false;
        } else if (!mine || std::abs(*mine - hits / pairs) > 1e-12) {
          pass = false;
        }
        const double tau = 1.25;
        double brier_ref = 0.0;
        for (int i = 0; i < n; ++i) {
          const double y = (times[i] <= tau && events[i] == risk) ? 1.0 : 0.0;
          brier_ref += (y - scores_v[i]) * (y - scores_v[i]);
        }
        brier_ref /= n;
        if (std::abs(*brier_score(scores, data, risk, tau) - brier_ref) > 1e-12) {
          pass = false;
        }
      }
    }
    // permutation baseline concentrates at one half
    std::vector<double> cs;
    {
      const int n = 200;
      std::vector<double> times(n);
      std::vector<int> events(n);
      Dataset data;
      data.covariate_names = {"x1"};
      data.risk_labels = {"risk1", "risk2"};
      for (int i = 0; i < n; ++i) {
        ObservationRecord rec;
        rec.x = Eigen::VectorXd(2);
        rec.x << 1.0, 0.0;
        rec.time_status = TimeStatus::observed;
        rec.time = rng.exponential();
        rec.event = 1 + (rng.uniform() < 0.5);
        data.records.push_back(rec);
      }
      for (int rep = 0; rep < 200; ++rep) {
        Eigen::VectorXd random_scores(n);
        for (int i = 0; i < n; ++i) random_scores[i] = rng.uniform();
        cs.push_back(*c_index(random_scores, data, 1, 1.0));
      }
    }
    const double center = mean_of(cs);
    if (std::abs(center - 0.5) > 0.05) pass = false;
    char buf[100];
    std::snprintf(buf, sizeof(buf), "permutation mean C = %.3f", center);
    report(8, "metrics equal exhaustive references; random scores sit at 0.5", pass, buf);
  }

  // ---- criterion 9: missing-data handling -------------------------------------
  {
    const std::vector<double> taus{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    bool pass = true;
    double worst_degrade = 0.0;
    for (int risk = 1; risk <= 2; ++risk) {
      for (double tau : taus) {
        std::vector<double> full_c, masked_c;
        for (int p = 0; p < n_partitions; ++p) {
          const Dataset& test = data1_parts[p].split.test;
          full_c.push_back(*c_index(
              test_scores(data1_parts[p].ldr, test, risk, tau, 1900 + p), test, risk, tau));
          masked_c.push_back(*c_index(
              test_scores(data1_parts[p].masked, test, risk, tau, 1950 + p), test, risk, tau));
        }
        const double degrade = mean_of(full_c) - mean_of(masked_c);
        worst_degrade = std::max(worst_degrade, degrade);
        if (!(degrade < 0.05)) pass = false;
      }
    }
    // imputed event types recover the truth by majority vote
    double recovered = 0.0, total = 0.0;
    for (int p = 0; p < n_partitions; ++p) {
      const Partition& part = data1_parts[p];
      for (int row : part.masked_rows) {
        const int truth = data1_parts[p].split.train.records[row].event;
        if (truth == 0) continue;
        int votes_risk1 = 0;
        for (const auto& draw : part.masked.draws) {
          votes_risk1 += draw.event[row] == 0;
        }
        const int majority =
            votes_risk1 * 2 >= static_cast<int>(part.masked.draws.size()) ? 1 : 2;
        recovered += majority == truth;
        total += 1.0;
      }
    }
    const double recovery = recovered / total;
    if (!(recovery > 0.60)) pass = false;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "worst C-index degradation %.3f; recovery %.1f%% of %d",
                  worst_degrade, 100.0 * recovery, static_cast<int>(total));
    report(9, "masked event types degrade C-index by < 0.05 and are recovered", pass, buf);
  }

  std::printf("acceptance: %d criterion(s) failed, %.1f minutes total\n", g_failures,
              elapsed_min());
  return g_failures == 0 ? 0 : 1;
}
