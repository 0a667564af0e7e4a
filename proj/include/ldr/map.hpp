#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ldr/data.hpp"
#include "ldr/model.hpp"
#include "ldr/rng.hpp"

namespace ldr {

struct MapConfig {
  int mc_samples = 10;        // M per subject per gradient pass
  int eval_mc_samples = 100;  // M for objective evaluation
  double step_size = 1e-2;
  double step_decay = 0.0;    // step_t = step_size / (1 + decay * epoch)
  int minibatch = 64;
  int max_epochs = 200;
  double tol = 0.0;           // stop when the eval objective moves less than this
  double t_prior_df = 4.0;    // Student-t prior on each coefficient

  enum class RPrior {
    gamma_process,  // Gamma(0.01/K, scale 100)
    gamma_unit,     // Gamma(1/K, scale 1)
    l2,             // -0.001 * ||r||_2 regularizer
  };
  RPrior r_prior = RPrior::gamma_unit;

  std::uint64_t seed = 0;
  void validate() const;
};

// lambda-tilde draws for one subject: rows are replicates, column a holds
// Gamma(r_a, 1) for atom a in the risk-major layout.
Eigen::MatrixXd sample_lambda_tilde(const LdrParams& params, int m, Rng& rng);

// log of the Monte-Carlo likelihood (1/M) sum_m p_t * p_y evaluated on the
// given draws, in log-sum-exp form. Throws on a subject with both the time
// and the event type missing.
double mc_log_likelihood(const ObservationRecord& subject, const LdrParams& params,
                         const Eigen::MatrixXd& lambda_draws);

struct SubjectGradient {
  Eigen::MatrixXd beta;  // (V+1) x total_atoms
  Eigen::VectorXd r;     // total_atoms
  double log_lik = 0.0;
  bool ok = true;  // false when every draw underflowed; gradients are zero
};

// Self-normalized score gradients sharing one set of draws; grad_beta is the
// exact gradient of mc_log_likelihood on those same draws.
SubjectGradient subject_gradient(const ObservationRecord& subject,
                                 const LdrParams& params,
                                 const Eigen::MatrixXd& lambda_draws);

Eigen::MatrixXd grad_beta(const ObservationRecord& subject, const LdrParams& params,
                          const Eigen::MatrixXd& lambda_draws);
Eigen::VectorXd grad_r(const ObservationRecord& subject, const LdrParams& params,
                       const Eigen::MatrixXd& lambda_draws);

// log prior terms of the MAP objective (Student-t on coefficients, selected
// prior or regularizer on the atom weights)
double log_prior(const LdrParams& params, const MapConfig& config);

// full objective estimate: sum_i mc_log_likelihood + log_prior
double map_objective(const Dataset& data, const LdrParams& params,
                     const MapConfig& config, int m, Rng& rng);

struct MapResult {
  LdrParams params;
  std::vector<double> objective_trace;  // eval objective per epoch
  int epochs_run = 0;
};

// Stochastic gradient ascent with per-coordinate momentum and RMS step
// scaling; atom weights are updated through log r. Returns the iterate with
// the best evaluation objective.
MapResult fit_map(const Dataset& data, const LdrParams& init, const MapConfig& config,
                  Rng& rng);

// K atoms per risk with unit weights and small random coefficients.
LdrParams default_map_init(const Dataset& data, int truncation, Rng& rng);

}  // namespace ldr
