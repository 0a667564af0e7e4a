#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ldr/data.hpp"
#include "ldr/model.hpp"
#include "ldr/rng.hpp"

namespace ldr {

struct ChainConfig {
  int iterations = 10000;
  int burn_in = 8000;
  int thin = 1;
  int truncation = 10;  // K atoms per risk
  std::uint64_t seed = 0;
  Hyperparams hyper;
  // Step 8 masks atoms that won no assignments; the mask is permanent. Off
  // only for kernel-level correctness checks (a masked atom would otherwise
  // break detailed balance of the sweep).
  bool prune = true;

  void validate() const;
  static ChainConfig fast_profile();  // 2000 iterations, 1500 burn-in
};

// Full augmented state. Atoms are laid out risk-major: column a = j*K + k
// for lambda/coefficients, so per-atom slices are contiguous columns.
struct GibbsState {
  int n = 0, num_risks = 0, truncation = 0, dim = 0;

  Eigen::MatrixXd design;        // n x (V+1)
  Eigen::VectorXd time;          // imputed/observed t_i
  Eigen::VectorXd log_time;      // cached ln t_i
  Eigen::VectorXi event;         // current y_i, 0-based
  Eigen::VectorXi subrisk;       // current kappa_i, 0-based
  Eigen::MatrixXd lambda;        // n x J*K
  Eigen::MatrixXi assign_count;  // m_jk, J x K
  Eigen::MatrixXd atom_weight;   // r_jk, J x K
  Eigen::VectorXd gamma0;        // J
  Eigen::VectorXd c0;            // J
  Eigen::MatrixXd coeff;         // (V+1) x J*K, column per atom
  Eigen::MatrixXd coeff_prec;    // alpha_vjk, (V+1) x J*K
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active;  // J x K

  int flat(int risk, int k) const { return risk * truncation + k; }
  int active_atoms(int risk) const;
};

struct PosteriorDraw {
  int sweep = 0;
  Eigen::MatrixXd atom_weight;  // J x K
  std::vector<Eigen::MatrixXd> coeff;  // per risk: K x (V+1)
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active;
  Eigen::VectorXi event;  // current per-subject assignment, 0-based
  double log_lik = 0.0;
};

struct SweepDiagnostics {
  int sweep = 0;
  std::vector<int> active_atoms;  // per risk
  double log_lik = 0.0;
};

struct PosteriorSamples {
  int num_risks = 0, truncation = 0, dim = 0;
  std::vector<PosteriorDraw> draws;
  std::vector<SweepDiagnostics> diagnostics;

  // Active atoms of one stored draw as frozen parameters. A risk whose atoms
  // are all masked keeps its heaviest atom so the hazard stays defined (its
  // weight is a prior draw, effectively zero).
  LdrParams params_at(int draw_index) const;

  // Atoms within a 10:1 weight ratio of the risk's heaviest active atom,
  // medianed over draws: the dominant-structure summary.
  std::vector<int> median_dominant_atoms() const;

  void save_trace_jsonl(const std::string& path) const;
  static PosteriorSamples load_trace_jsonl(const std::string& path);
  void save_diagnostics_csv(const std::string& path) const;
};

// One full sweep, steps in order:
//   1 assign (y_i,) kappa_i     2 impute t_i          3 lambda_ijk
//   4 omega, beta_jk            5 alpha_vjk           6 r_jk, gamma_0j
//   7 c_0j                      8 prune
GibbsState init_state(const Dataset& data, const ChainConfig& config, Rng& rng);
void step_assign_subrisk(GibbsState& state, const Dataset& data, Rng& rng);
void step_impute_time(GibbsState& state, const Dataset& data, Rng& rng);
void step_sample_lambda(GibbsState& state, const Dataset& data, Rng& rng);
void step_sample_beta(GibbsState& state, const Dataset& data, Rng& rng);
void step_sample_alpha(GibbsState& state, const Hyperparams& hyper, Rng& rng);
void step_sample_r_gamma0(GibbsState& state, const Dataset& data,
                          const Hyperparams& hyper, Rng& rng);
void step_sample_c0(GibbsState& state, const Hyperparams& hyper, Rng& rng);
void step_prune(GibbsState& state);
void gibbs_sweep(GibbsState& state, const Dataset& data, const ChainConfig& config,
                 Rng& rng);

// Joint likelihood of the current augmented state in the negative-binomial
// factorized form, active atoms only.
double augmented_log_likelihood(const GibbsState& state);

PosteriorSamples run_chain(const Dataset& data, const ChainConfig& config, Rng& rng);

}  // namespace ldr
