#include "ldr/map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ldr/errors.hpp"
#include "ldr/math.hpp"

namespace ldr {

namespace {

struct DrawTerms {
  Eigen::VectorXd log_p;      // M, log(p_t * p_y) per draw
  Eigen::MatrixXd coeff_g;    // M x A, d log(p_t p_y) / d eta_a per draw
  bool any_finite = false;
};

// Per-draw likelihood factors and their eta-gradients for one subject.
DrawTerms draw_terms(const ObservationRecord& rec, const LdrParams& params,
                     const Eigen::MatrixXd& lambda_draws, bool want_grad) {
  if (rec.time_status == TimeStatus::missing && !rec.event_known()) {
    throw ParameterError("map: subject with both time and event type missing");
  }
  const Eigen::Index m = lambda_draws.rows();
  const Eigen::Index atoms = lambda_draws.cols();
  if (atoms != params.total_atoms()) {
    throw ParameterError("map: lambda draws do not match the atom layout");
  }
  const Eigen::VectorXd eta = params.linear_predictors(rec.x);
  const Eigen::ArrayXd scale = eta.array().exp();

  DrawTerms out;
  out.log_p.resize(m);
  if (want_grad) out.coeff_g.setZero(m, atoms);

  int base = 0, width = 0;
  if (rec.event_known()) {
    base = params.flat_index(rec.event - 1, 0);
    width = params.num_subrisks(rec.event - 1);
  }

  for (Eigen::Index d = 0; d < m; ++d) {
    const Eigen::ArrayXd s = lambda_draws.row(d).transpose().array() * scale;
    const double total = s.sum();
    if (!std::isfinite(total) || !(total > 0.0)) {
      out.log_p[d] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double log_p = 0.0;
    switch (rec.time_status) {
      case TimeStatus::observed:
        log_p += std::log(total) - rec.time * total;
        if (want_grad) {
          out.coeff_g.row(d) = (s / total - rec.time * s).matrix().transpose();
        }
        break;
      case TimeStatus::right_censored:
        log_p += -rec.time * total;
        if (want_grad) out.coeff_g.row(d) = (-rec.time * s).matrix().transpose();
        break;
      case TimeStatus::missing:
        break;
    }
    if (rec.event_known()) {
      const double under = s.segment(base, width).sum();
      if (!(under > 0.0)) {
        out.log_p[d] = -std::numeric_limits<double>::infinity();
        if (want_grad) out.coeff_g.row(d).setZero();
        continue;
      }
      log_p += std::log(under) - std::log(total);
      if (want_grad) {
        out.coeff_g.row(d) -= (s / total).matrix().transpose();
        out.coeff_g.row(d).segment(base, width) +=
            (s.segment(base, width) / under).matrix().transpose();
      }
    }
    out.log_p[d] = log_p;
    if (std::isfinite(log_p)) out.any_finite = true;
  }
  return out;
}

Eigen::VectorXd flat_weights(const LdrParams& params) {
  Eigen::VectorXd r(params.total_atoms());
  int a = 0;
  for (int j = 0; j < params.num_risks(); ++j) {
    for (int k = 0; k < params.num_subrisks(j); ++k, ++a) {
      r[a] = params.atom_weight(j, k);
    }
  }
  return r;
}

LdrParams rebuild_params(const LdrParams& like, const Eigen::VectorXd& flat_r,
                         const Eigen::MatrixXd& flat_beta) {
  std::vector<Eigen::VectorXd> weights;
  std::vector<Eigen::MatrixXd> coeffs;
  int a = 0;
  for (int j = 0; j < like.num_risks(); ++j) {
    const int kj = like.num_subrisks(j);
    Eigen::VectorXd w(kj);
    Eigen::MatrixXd c(kj, like.dim());
    for (int k = 0; k < kj; ++k, ++a) {
      w[k] = flat_r[a];
      c.row(k) = flat_beta.col(a);
    }
    weights.push_back(std::move(w));
    coeffs.push_back(std::move(c));
  }
  return LdrParams(std::move(weights), std::move(coeffs));
}

}  // namespace

void MapConfig::validate() const {
  if (mc_samples < 1) throw ParameterError("MapConfig: mc_samples must be >= 1");
  if (eval_mc_samples < 1) throw ParameterError("MapConfig: eval_mc_samples must be >= 1");
  if (!(step_size > 0.0)) throw ParameterError("MapConfig: step size must be positive");
  if (step_decay < 0.0) throw ParameterError("MapConfig: step decay must be >= 0");
  if (minibatch < 1) throw ParameterError("MapConfig: minibatch must be >= 1");
  if (max_epochs < 0) throw ParameterError("MapConfig: max_epochs must be >= 0");
  if (!(t_prior_df > 0.0)) throw ParameterError("MapConfig: t_prior_df must be positive");
}

Eigen::MatrixXd sample_lambda_tilde(const LdrParams& params, int m, Rng& rng) {
  if (m < 1) throw ParameterError("sample_lambda_tilde: need at least one draw");
  const Eigen::VectorXd r = flat_weights(params);
  Eigen::MatrixXd draws(m, params.total_atoms());
  for (int d = 0; d < m; ++d) {
    for (int a = 0; a < params.total_atoms(); ++a) draws(d, a) = rng.gamma(r[a], 1.0);
  }
  return draws;
}

double mc_log_likelihood(const ObservationRecord& rec, const LdrParams& params,
                         const Eigen::MatrixXd& lambda_draws) {
  const DrawTerms terms = draw_terms(rec, params, lambda_draws, false);
  const double lse = log_sum_exp({terms.log_p.data(),
                                  static_cast<std::size_t>(terms.log_p.size())});
  return lse - std::log(static_cast<double>(lambda_draws.rows()));
}

SubjectGradient subject_gradient(const ObservationRecord& rec, const LdrParams& params,
                                 const Eigen::MatrixXd& lambda_draws) {
  const DrawTerms terms = draw_terms(rec, params, lambda_draws, true);
  const Eigen::Index m = lambda_draws.rows();
  const int atoms = params.total_atoms();

  SubjectGradient out;
  out.beta.setZero(params.dim(), atoms);
  out.r.setZero(atoms);
  if (!terms.any_finite) {
    out.ok = false;
    out.log_lik = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double lse = log_sum_exp({terms.log_p.data(),
                                  static_cast<std::size_t>(terms.log_p.size())});
  out.log_lik = lse - std::log(static_cast<double>(m));

  const Eigen::VectorXd r = flat_weights(params);
  Eigen::VectorXd psi(atoms);
  for (int a = 0; a < atoms; ++a) psi[a] = digamma(r[a]);

  Eigen::VectorXd eta_coeff = Eigen::VectorXd::Zero(atoms);
  for (Eigen::Index d = 0; d < m; ++d) {
    if (!std::isfinite(terms.log_p[d])) continue;
    const double w = std::exp(terms.log_p[d] - lse);
    eta_coeff += w * terms.coeff_g.row(d).transpose();
    // score of the Gamma(r_a, 1) draw density
    out.r += w * (lambda_draws.row(d).transpose().array().log() - psi.array()).matrix();
  }
  out.beta = rec.x * eta_coeff.transpose();
  return out;
}

Eigen::MatrixXd grad_beta(const ObservationRecord& rec, const LdrParams& params,
                          const Eigen::MatrixXd& lambda_draws) {
  return subject_gradient(rec, params, lambda_draws).beta;
}

Eigen::VectorXd grad_r(const ObservationRecord& rec, const LdrParams& params,
                       const Eigen::MatrixXd& lambda_draws) {
  return subject_gradient(rec, params, lambda_draws).r;
}

double log_prior(const LdrParams& params, const MapConfig& config) {
  const double a = config.t_prior_df;
  double lp = 0.0;
  for (int j = 0; j < params.num_risks(); ++j) {
    const auto& c = params.coeffs(j);
    lp += (-0.5 * (a + 1.0)) * (1.0 + c.array().square() / a).log().sum();
  }
  const Eigen::VectorXd r = flat_weights(params);
  const double k = static_cast<double>(params.max_subrisks());
  switch (config.r_prior) {
    case MapConfig::RPrior::gamma_process:
      lp += ((0.01 / k - 1.0) * r.array().log() - 0.01 * r.array()).sum();
      break;
    case MapConfig::RPrior::gamma_unit:
      lp += ((1.0 / k - 1.0) * r.array().log() - r.array()).sum();
      break;
    case MapConfig::RPrior::l2:
      lp -= 0.001 * r.norm();
      break;
  }
  return lp;
}

double map_objective(const Dataset& data, const LdrParams& params,
                     const MapConfig& config, int m, Rng& rng) {
  double obj = log_prior(params, config);
  for (const auto& rec : data.records) {
    obj += mc_log_likelihood(rec, params, sample_lambda_tilde(params, m, rng));
  }
  return obj;
}

LdrParams default_map_init(const Dataset& data, int truncation, Rng& rng) {
  if (truncation < 1) throw ParameterError("default_map_init: truncation must be >= 1");
  std::vector<Eigen::VectorXd> weights;
  std::vector<Eigen::MatrixXd> coeffs;
  for (int j = 0; j < data.num_risks(); ++j) {
    weights.push_back(Eigen::VectorXd::Constant(truncation, 1.0 / truncation));
    Eigen::MatrixXd c(truncation, data.dim());
    for (int k = 0; k < truncation; ++k) {
      for (int v = 0; v < data.dim(); ++v) c(k, v) = 0.1 * rng.normal();
    }
    coeffs.push_back(std::move(c));
  }
  return LdrParams(std::move(weights), std::move(coeffs));
}

MapResult fit_map(const Dataset& data, const LdrParams& init, const MapConfig& config,
                  Rng& rng) {
  config.validate();
  data.validate();
  if (data.size() < 1) throw ParameterError("fit_map: empty dataset");

  const int n = data.size();
  const int atoms = init.total_atoms();
  const int dim = init.dim();
  const double k = static_cast<double>(init.max_subrisks());

  Eigen::VectorXd log_r = flat_weights(init).array().log();
  Eigen::MatrixXd beta(dim, atoms);
  {
    int a = 0;
    for (int j = 0; j < init.num_risks(); ++j) {
      for (int kk = 0; kk < init.num_subrisks(j); ++kk, ++a) {
        beta.col(a) = init.coeff(j, kk);
      }
    }
  }

  // momentum + RMS-normalized steps, bias-corrected
  Eigen::MatrixXd m_beta = Eigen::MatrixXd::Zero(dim, atoms);
  Eigen::MatrixXd v_beta = Eigen::MatrixXd::Zero(dim, atoms);
  Eigen::VectorXd m_r = Eigen::VectorXd::Zero(atoms);
  Eigen::VectorXd v_r = Eigen::VectorXd::Zero(atoms);
  const double mom = 0.9, rms = 0.999, eps = 1e-8;
  long step_count = 0;

  const std::uint64_t eval_seed = rng.split().seed();
  auto evaluate = [&](const LdrParams& p) {
    Rng eval_rng(eval_seed);  // common draws across epochs
    return map_objective(data, p, config, config.eval_mc_samples, eval_rng);
  };

  MapResult result{init, {}, 0};
  double best = evaluate(init);
  double prev = best;
  result.objective_trace.push_back(best);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    // seeded Fisher-Yates
    for (int i = n - 1; i > 0; --i) {
      const int pick = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(order[i], order[std::min(pick, i)]);
    }
    const double step = config.step_size / (1.0 + config.step_decay * epoch);
    LdrParams params = rebuild_params(init, log_r.array().exp(), beta);

    for (int start = 0; start < n; start += config.minibatch) {
      const int stop = std::min(n, start + config.minibatch);
      Eigen::MatrixXd g_beta = Eigen::MatrixXd::Zero(dim, atoms);
      Eigen::VectorXd g_r = Eigen::VectorXd::Zero(atoms);
      for (int idx = start; idx < stop; ++idx) {
        const auto& rec = data.records[order[idx]];
        const Eigen::MatrixXd draws = sample_lambda_tilde(params, config.mc_samples, rng);
        const SubjectGradient sg = subject_gradient(rec, params, draws);
        g_beta += sg.beta;
        g_r += sg.r;
      }
      const double scale = static_cast<double>(n) / (stop - start);
      g_beta *= scale;
      g_r *= scale;

      // exact prior gradients; r terms are chained through theta = log r
      const Eigen::VectorXd r = log_r.array().exp();
      const double a = config.t_prior_df;
      g_beta -= ((a + 1.0) * beta.array() / (a + beta.array().square())).matrix();
      Eigen::VectorXd g_theta = r.asDiagonal() * g_r;
      switch (config.r_prior) {
        case MapConfig::RPrior::gamma_process:
          g_theta.array() += (0.01 / k - 1.0) - 0.01 * r.array();
          break;
        case MapConfig::RPrior::gamma_unit:
          g_theta.array() += (1.0 / k - 1.0) - r.array();
          break;
        case MapConfig::RPrior::l2:
          g_theta.array() -= 0.001 * r.array().square() / std::max(r.norm(), 1e-12);
          break;
      }

      ++step_count;
      const double bc1 = 1.0 - std::pow(mom, static_cast<double>(step_count));
      const double bc2 = 1.0 - std::pow(rms, static_cast<double>(step_count));
      m_beta = mom * m_beta + (1.0 - mom) * g_beta;
      v_beta = rms * v_beta + (1.0 - rms) * g_beta.cwiseProduct(g_beta);
      beta.array() += step * (m_beta.array() / bc1) /
                      ((v_beta.array() / bc2).sqrt() + eps);
      m_r = mom * m_r + (1.0 - mom) * g_theta;
      v_r = rms * v_r + (1.0 - rms) * g_theta.cwiseProduct(g_theta);
      log_r.array() += step * (m_r.array() / bc1) /
                       ((v_r.array() / bc2).sqrt() + eps);

      params = rebuild_params(init, log_r.array().exp(), beta);
    }

    result.epochs_run = epoch + 1;
    const double obj = evaluate(params);
    if (std::isnan(obj)) {
      throw NumericalError("fit_map: objective diverged at epoch " +
                           std::to_string(epoch + 1) + " (step " +
                           std::to_string(step) + ")");
    }
    result.objective_trace.push_back(obj);
    if (obj > best) {
      best = obj;
      result.params = params;
    }
    if (config.tol > 0.0 && std::abs(obj - prev) < config.tol) break;
    prev = obj;
  }
  return result;
}

}  // namespace ldr
