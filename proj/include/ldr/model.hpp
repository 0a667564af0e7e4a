#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ldr/rng.hpp"

#include <json.hpp>

namespace ldr {

struct Hyperparams {
  double a0 = 0.01, b0 = 0.01;  // coefficient precision prior
  double e0 = 0.01, f0 = 0.01;  // gamma-process mass gamma_0j
  double e1 = 0.01, f1 = 0.01;  // gamma-process scale c_0j
  void validate() const;
};

// Frozen LDR parameters: per risk j a list of atoms (r_jk, beta_jk), with
// beta_jk of length V+1 including the intercept. Atom counts may differ
// across risks once pruned atoms have been dropped. Covariate vectors follow
// the x = (1, x_1, ..., x_V) convention throughout.
class LdrParams {
 public:
  // atom_weights[j] holds r_jk for risk j; coefficients[j] is K_j x (V+1)
  // with one row per atom.
  LdrParams(std::vector<Eigen::VectorXd> atom_weights,
            std::vector<Eigen::MatrixXd> coefficients);

  int num_risks() const { return static_cast<int>(weights_.size()); }
  int num_subrisks(int risk) const;
  int max_subrisks() const;
  int total_atoms() const { return total_atoms_; }
  int num_covariates() const { return dim_ - 1; }  // V
  int dim() const { return dim_; }                 // V + 1

  double atom_weight(int risk, int subrisk) const;
  // coefficient row for one atom, length V+1
  Eigen::VectorXd coeff(int risk, int subrisk) const;
  const Eigen::VectorXd& weights(int risk) const { return weights_[risk]; }
  const Eigen::MatrixXd& coeffs(int risk) const { return coeffs_[risk]; }

  // x' beta_jk for every atom of every risk, flattened risk-major.
  Eigen::VectorXd linear_predictors(const Eigen::VectorXd& x) const;
  // flat index of atom (risk, subrisk) in the risk-major layout
  int flat_index(int risk, int subrisk) const;

  nlohmann::json to_json() const;
  static LdrParams from_json(const nlohmann::json& doc);
  void save(const std::string& path) const;
  static LdrParams load(const std::string& path);

 private:
  std::vector<Eigen::VectorXd> weights_;
  std::vector<Eigen::MatrixXd> coeffs_;
  std::vector<int> offsets_;
  int dim_ = 0;
  int total_atoms_ = 0;
};

// sum over atoms of r_jk / (t + e^{-x'beta_jk})
double ldr_hazard(double t, const Eigen::VectorXd& x, const LdrParams& params);

// product over atoms of (e^{x'beta_jk} t + 1)^{-r_jk}
double ldr_survival(double t, const Eigen::VectorXd& x, const LdrParams& params);

struct EventDraw {
  double time;
  int risk;     // 0-based
  int subrisk;  // 0-based within the risk
};

// Generative draw: lambda_jk ~ Gamma(r_jk, 1) scaled by e^{x'beta_jk} race
// to the first arrival over all atoms.
EventDraw sample_event(const Eigen::VectorXd& x, const LdrParams& params, Rng& rng);

// Monte-Carlo cumulative incidence P(t <= tau, y = risk | x) with
// lambda_jk ~ Gamma(r_jk, e^{x'beta_jk}).
double cif(const Eigen::VectorXd& x, double tau, const LdrParams& params,
           int risk, int n_mc, Rng& rng);

// Same estimator over a tau grid sharing one set of draws per replicate.
Eigen::VectorXd cif_curve(const Eigen::VectorXd& x, const Eigen::VectorXd& taus,
                          const LdrParams& params, int risk, int n_mc, Rng& rng);

// Distribution of t ~ Exp(sum_t lambda_t), lambda_t ~ Gamma(r_t, 1/b_t):
// the series CDF of the gamma convolution, truncated once the retained
// mass c * sum_{m<=M} delta_m reaches 1 - mass_tol. Component t alone would
// give the Lomax(r_t, b_t) time marginal, so b_t acts as a time scale.
class GammaConvolutionSpec {
 public:
  GammaConvolutionSpec(Eigen::VectorXd shapes, Eigen::VectorXd scales,
                       double mass_tol = 1e-4, int max_terms = 10000);

  const Eigen::VectorXd& shapes() const { return shapes_; }
  const Eigen::VectorXd& scales() const { return scales_; }
  double mass_tol() const { return mass_tol_; }
  int truncation_terms() const { return static_cast<int>(log_delta_.size()); }
  double retained_mass() const { return retained_mass_; }

  double log_c() const { return log_c_; }
  double rho() const { return rho_; }
  double max_scale() const { return b1_; }
  // log delta_m, m = 0..M
  const std::vector<double>& log_delta() const { return log_delta_; }

 private:
  Eigen::VectorXd shapes_, scales_;
  double mass_tol_;
  double log_c_, rho_, b1_;
  double retained_mass_;
  std::vector<double> log_delta_;
};

// Truncated series CDF at q, clamped to [0, 1].
double marginal_time_cdf(double q, const GammaConvolutionSpec& spec);

// Inverse-CDF draw by bisection on a geometrically grown bracket.
double sample_marginal_time(const GammaConvolutionSpec& spec, Rng& rng);

// Flatten (params, x) into the convolution spec with scales e^{-x'beta_jk}.
GammaConvolutionSpec marginal_time_spec(const Eigen::VectorXd& x,
                                        const LdrParams& params,
                                        double mass_tol = 1e-4);

}  // namespace ldr
