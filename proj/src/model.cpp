#include "ldr/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ldr/errors.hpp"
#include "ldr/math.hpp"

namespace ldr {

void Hyperparams::validate() const {
  for (double v : {a0, b0, e0, f0, e1, f1}) {
    if (!(v > 0.0)) throw ParameterError("Hyperparams: all entries must be positive");
  }
}

LdrParams::LdrParams(std::vector<Eigen::VectorXd> atom_weights,
                     std::vector<Eigen::MatrixXd> coefficients)
    : weights_(std::move(atom_weights)), coeffs_(std::move(coefficients)) {
  if (weights_.empty() || weights_.size() != coeffs_.size()) {
    throw ParameterError("LdrParams: need one weight vector and one coefficient block per risk");
  }
  dim_ = static_cast<int>(coeffs_[0].cols());
  if (dim_ < 1) throw ParameterError("LdrParams: coefficient rows must include the intercept");
  offsets_.resize(weights_.size());
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (weights_[j].size() == 0 || weights_[j].size() != coeffs_[j].rows()) {
      throw ParameterError("LdrParams: atom weights and coefficient rows disagree");
    }
    if (coeffs_[j].cols() != dim_) {
      throw ParameterError("LdrParams: coefficient length differs across risks");
    }
    if (!(weights_[j].minCoeff() > 0.0)) {
      throw ParameterError("LdrParams: atom weights must be positive");
    }
    offsets_[j] = total_atoms_;
    total_atoms_ += static_cast<int>(weights_[j].size());
  }
}

int LdrParams::num_subrisks(int risk) const {
  if (risk < 0 || risk >= num_risks()) throw ParameterError("LdrParams: risk index out of range");
  return static_cast<int>(weights_[risk].size());
}

int LdrParams::max_subrisks() const {
  int k = 0;
  for (const auto& w : weights_) k = std::max<int>(k, static_cast<int>(w.size()));
  return k;
}

double LdrParams::atom_weight(int risk, int subrisk) const {
  if (risk < 0 || risk >= num_risks() || subrisk < 0 || subrisk >= num_subrisks(risk)) {
    throw ParameterError("LdrParams: atom index out of range");
  }
  return weights_[risk][subrisk];
}

Eigen::VectorXd LdrParams::coeff(int risk, int subrisk) const {
  if (risk < 0 || risk >= num_risks() || subrisk < 0 || subrisk >= num_subrisks(risk)) {
    throw ParameterError("LdrParams: atom index out of range");
  }
  return coeffs_[risk].row(subrisk);
}

int LdrParams::flat_index(int risk, int subrisk) const {
  if (risk < 0 || risk >= num_risks() || subrisk < 0 || subrisk >= num_subrisks(risk)) {
    throw ParameterError("LdrParams: atom index out of range");
  }
  return offsets_[risk] + subrisk;
}

Eigen::VectorXd LdrParams::linear_predictors(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw ParameterError("LdrParams: covariate vector has wrong length");
  }
  Eigen::VectorXd eta(total_atoms_);
  for (int j = 0; j < num_risks(); ++j) {
    eta.segment(offsets_[j], weights_[j].size()) = coeffs_[j] * x;
  }
  return eta;
}

nlohmann::json LdrParams::to_json() const {
  nlohmann::json doc;
  doc["J"] = num_risks();
  doc["K"] = max_subrisks();
  nlohmann::json r = nlohmann::json::array();
  nlohmann::json beta = nlohmann::json::array();
  for (int j = 0; j < num_risks(); ++j) {
    nlohmann::json rj = nlohmann::json::array();
    nlohmann::json bj = nlohmann::json::array();
    for (int k = 0; k < num_subrisks(j); ++k) {
      rj.push_back(weights_[j][k]);
      nlohmann::json row = nlohmann::json::array();
      for (int v = 0; v < dim_; ++v) row.push_back(coeffs_[j](k, v));
      bj.push_back(std::move(row));
    }
    r.push_back(std::move(rj));
    beta.push_back(std::move(bj));
  }
  doc["r"] = std::move(r);
  doc["beta"] = std::move(beta);
  return doc;
}

LdrParams LdrParams::from_json(const nlohmann::json& doc) {
  try {
    const auto& r = doc.at("r");
    const auto& beta = doc.at("beta");
    if (!r.is_array() || !beta.is_array() || r.size() != beta.size() || r.empty()) {
      throw IngestionError("params: r and beta must be parallel non-empty arrays");
    }
    std::vector<Eigen::VectorXd> weights;
    std::vector<Eigen::MatrixXd> coeffs;
    for (std::size_t j = 0; j < r.size(); ++j) {
      const auto& rj = r[j];
      const auto& bj = beta[j];
      if (rj.empty() || rj.size() != bj.size()) {
        throw IngestionError("params: risk " + std::to_string(j + 1) +
                             " has mismatched atom counts");
      }
      Eigen::VectorXd w(rj.size());
      Eigen::MatrixXd c(bj.size(), bj[0].size());
      for (std::size_t k = 0; k < rj.size(); ++k) {
        w[static_cast<Eigen::Index>(k)] = rj[k].get<double>();
        const auto& row = bj[k];
        if (row.size() != static_cast<std::size_t>(c.cols())) {
          throw IngestionError("params: ragged coefficient rows");
        }
        for (std::size_t v = 0; v < row.size(); ++v) {
          c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = row[v].get<double>();
        }
      }
      weights.push_back(std::move(w));
      coeffs.push_back(std::move(c));
    }
    LdrParams params(std::move(weights), std::move(coeffs));
    if (doc.contains("J") && doc.at("J").get<int>() != params.num_risks()) {
      throw IngestionError("params: J disagrees with the r array");
    }
    if (doc.contains("K") && doc.at("K").get<int>() != params.max_subrisks()) {
      throw IngestionError("params: K disagrees with the atom counts");
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("params: malformed document: ") + e.what());
  }
}

void LdrParams::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open for writing: " + path);
  out << to_json().dump(2) << '\n';
}

LdrParams LdrParams::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(path + ": " + e.what());
  }
  return from_json(doc);
}

double ldr_hazard(double t, const Eigen::VectorXd& x, const LdrParams& params) {
  if (t < 0.0) throw std::domain_error("ldr_hazard: negative time");
  const Eigen::VectorXd eta = params.linear_predictors(x);
  double h = 0.0;
  int a = 0;
  for (int j = 0; j < params.num_risks(); ++j) {
    for (int k = 0; k < params.num_subrisks(j); ++k, ++a) {
      h += params.atom_weight(j, k) / (t + std::exp(-eta[a]));
    }
  }
  return h;
}

double ldr_survival(double t, const Eigen::VectorXd& x, const LdrParams& params) {
  if (t < 0.0) throw std::domain_error("ldr_survival: negative time");
  const Eigen::VectorXd eta = params.linear_predictors(x);
  double log_s = 0.0;
  int a = 0;
  for (int j = 0; j < params.num_risks(); ++j) {
    for (int k = 0; k < params.num_subrisks(j); ++k, ++a) {
      log_s -= params.atom_weight(j, k) * std::log1p(t * std::exp(eta[a]));
    }
  }
  return std::exp(log_s);
}

EventDraw sample_event(const Eigen::VectorXd& x, const LdrParams& params, Rng& rng) {
  const Eigen::VectorXd eta = params.linear_predictors(x);
  Eigen::VectorXd rates(params.total_atoms());
  int a = 0;
  for (int j = 0; j < params.num_risks(); ++j) {
    for (int k = 0; k < params.num_subrisks(j); ++k, ++a) {
      rates[a] = std::exp(eta[a]) * rng.gamma(params.atom_weight(j, k), 1.0);
    }
  }
  const double total = rates.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("sample_event: degenerate atom rates");
  }
  EventDraw draw;
  draw.time = rng.exponential() / total;
  const int winner = rng.categorical(rates.data(), params.total_atoms());
  int offset = 0;
  for (int j = 0; j < params.num_risks(); ++j) {
    if (winner < offset + params.num_subrisks(j)) {
      draw.risk = j;
      draw.subrisk = winner - offset;
      return draw;
    }
    offset += params.num_subrisks(j);
  }
  throw NumericalError("sample_event: winner index out of range");
}

Eigen::VectorXd cif_curve(const Eigen::VectorXd& x, const Eigen::VectorXd& taus,
                          const LdrParams& params, int risk, int n_mc, Rng& rng) {
  if (risk < 0 || risk >= params.num_risks()) {
    throw ParameterError("cif: risk index out of range");
  }
  if (n_mc < 1) throw ParameterError("cif: need at least one Monte-Carlo draw");
  for (Eigen::Index q = 0; q < taus.size(); ++q) {
    if (taus[q] < 0.0) throw ParameterError("cif: negative tau");
  }
  const Eigen::VectorXd eta = params.linear_predictors(x);
  const int base = params.flat_index(risk, 0);
  const int k_risk = params.num_subrisks(risk);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(taus.size());
  Eigen::VectorXd lambda(params.total_atoms());
  for (int m = 0; m < n_mc; ++m) {
    int a = 0;
    for (int j = 0; j < params.num_risks(); ++j) {
      for (int k = 0; k < params.num_subrisks(j); ++k, ++a) {
        lambda[a] = rng.gamma(params.atom_weight(j, k), std::exp(eta[a]));
      }
    }
    const double total = lambda.sum();
    if (!(total > 0.0)) continue;  // all-atom underflow contributes zero incidence
    const double share = lambda.segment(base, k_risk).sum() / total;
    for (Eigen::Index q = 0; q < taus.size(); ++q) {
      acc[q] += share * -std::expm1(-taus[q] * total);
    }
  }
  return acc / static_cast<double>(n_mc);
}

double cif(const Eigen::VectorXd& x, double tau, const LdrParams& params,
           int risk, int n_mc, Rng& rng) {
  Eigen::VectorXd taus(1);
  taus[0] = tau;
  return cif_curve(x, taus, params, risk, n_mc, rng)[0];
}

GammaConvolutionSpec::GammaConvolutionSpec(Eigen::VectorXd shapes,
                                           Eigen::VectorXd scales,
                                           double mass_tol, int max_terms)
    : shapes_(std::move(shapes)), scales_(std::move(scales)), mass_tol_(mass_tol) {
  if (shapes_.size() == 0 || shapes_.size() != scales_.size()) {
    throw ParameterError("GammaConvolutionSpec: need matching non-empty shapes and scales");
  }
  if (!(shapes_.minCoeff() > 0.0) || !(scales_.minCoeff() > 0.0)) {
    throw ParameterError("GammaConvolutionSpec: components must be positive");
  }
  if (!(mass_tol_ > 0.0 && mass_tol_ < 1.0)) {
    throw ParameterError("GammaConvolutionSpec: mass_tol must lie in (0, 1)");
  }
  rho_ = shapes_.sum();
  b1_ = scales_.maxCoeff();
  log_c_ = 0.0;
  for (Eigen::Index t = 0; t < shapes_.size(); ++t) {
    log_c_ += shapes_[t] * std::log(scales_[t] / b1_);
  }

  // delta_{m+1} = (1/(m+1)) sum_{h=1}^{m+1} (h gamma_h) delta_{m+1-h}, with
  // h gamma_h = sum_t r_t (1 - b_t/b1)^h. Kept in log space; the retained
  // mass c * sum delta_m is what the truncation rule watches.
  Eigen::ArrayXd frac = 1.0 - (scales_.array() / b1_);
  Eigen::ArrayXd pow_h = Eigen::ArrayXd::Ones(shapes_.size());
  std::vector<double> log_hgamma;  // log(h * gamma_h), h = 1, 2, ...
  log_delta_.push_back(0.0);       // delta_0 = 1
  double retained = std::exp(log_c_);
  std::vector<double> terms;
  while (retained < 1.0 - mass_tol_) {
    const int m1 = static_cast<int>(log_delta_.size());  // computing delta_{m1}
    if (m1 > max_terms) {
      throw ConvergenceError("GammaConvolutionSpec: series cap exceeded before reaching the mass target");
    }
    pow_h *= frac;
    log_hgamma.push_back(std::log((shapes_.array() * pow_h).sum()));
    if (m1 == 1 && !std::isfinite(log_hgamma[0])) break;  // equal scales: delta_0 is exact
    terms.clear();
    for (int h = 1; h <= m1; ++h) {
      const double lg = log_hgamma[h - 1];
      if (std::isfinite(lg) && std::isfinite(log_delta_[m1 - h])) {
        terms.push_back(lg + log_delta_[m1 - h]);
      }
    }
    const double log_delta_m1 =
        terms.empty() ? -std::numeric_limits<double>::infinity()
                      : log_sum_exp(terms) - std::log(static_cast<double>(m1));
    log_delta_.push_back(log_delta_m1);
    retained += std::exp(log_c_ + log_delta_m1);
  }
  retained_mass_ = retained;
}

double marginal_time_cdf(double q, const GammaConvolutionSpec& spec) {
  if (q < 0.0) throw std::domain_error("marginal_time_cdf: negative quantile");
  const double log_u = std::log(spec.max_scale() / (q + spec.max_scale()));
  const auto& log_delta = spec.log_delta();
  double tail = 0.0;
  for (std::size_t m = 0; m < log_delta.size(); ++m) {
    tail += std::exp(spec.log_c() + log_delta[m] +
                     (spec.rho() + static_cast<double>(m)) * log_u);
  }
  return std::clamp(1.0 - tail, 0.0, 1.0);
}

double sample_marginal_time(const GammaConvolutionSpec& spec, Rng& rng) {
  const double u = rng.uniform_pos();
  double hi = spec.max_scale();
  int growth = 0;
  while (marginal_time_cdf(hi, spec) < u) {
    hi *= 2.0;
    if (++growth > 1024) {
      throw NumericalError("sample_marginal_time: bracket growth failed");
    }
  }
  double lo = 0.0;
  while (hi - lo > 1e-10 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (marginal_time_cdf(mid, spec) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GammaConvolutionSpec marginal_time_spec(const Eigen::VectorXd& x,
                                        const LdrParams& params, double mass_tol) {
  const Eigen::VectorXd eta = params.linear_predictors(x);
  Eigen::VectorXd shapes(params.total_atoms());
  int a = 0;
  for (int j = 0; j < params.num_risks(); ++j) {
    for (int k = 0; k < params.num_subrisks(j); ++k, ++a) {
      shapes[a] = params.atom_weight(j, k);
    }
  }
  return GammaConvolutionSpec(shapes, (-eta.array()).exp(), mass_tol);
}

}  // namespace ldr
