#include "ldr/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ldr/distributions.hpp"
#include "ldr/errors.hpp"
#include "ldr/math.hpp"

namespace ldr {

namespace {

constexpr double kTinyPositive = std::numeric_limits<double>::min();

// saturate prior-corner draws to the representable positive range
double positive_clamp(double x) { return std::clamp(x, kTinyPositive, 1e300); }

// log(1 + t e^z) without overflowing e^z
double log1p_texp(double t, double z) {
  if (z < 30.0) return std::log1p(t * std::exp(z));
  return z + std::log(t + std::exp(-z));
}

// gamma scale e^z / (1 + t e^z) = 1 / (e^{-z} + t), kept positive
double lambda_scale(double t, double z) {
  const double s = 1.0 / (std::exp(-z) + t);
  return std::max(s, kTinyPositive);
}

}  // namespace

void ChainConfig::validate() const {
  if (iterations < 1) throw ParameterError("ChainConfig: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) {
    throw ParameterError("ChainConfig: need 0 <= burn_in < iterations");
  }
  if (thin < 1) throw ParameterError("ChainConfig: thin must be >= 1");
  if (truncation < 1) throw ParameterError("ChainConfig: need at least one atom per risk");
  hyper.validate();
}

ChainConfig ChainConfig::fast_profile() {
  ChainConfig config;
  config.iterations = 2000;
  config.burn_in = 1500;
  return config;
}

int GibbsState::active_atoms(int risk) const {
  int n_active = 0;
  for (int k = 0; k < truncation; ++k) n_active += active(risk, k);
  return n_active;
}

GibbsState init_state(const Dataset& data, const ChainConfig& config, Rng& rng) {
  config.validate();
  data.validate();
  GibbsState st;
  st.n = data.size();
  st.num_risks = data.num_risks();
  st.truncation = config.truncation;
  st.dim = data.dim();
  const int atoms = st.num_risks * st.truncation;

  st.design.resize(st.n, st.dim);
  for (int i = 0; i < st.n; ++i) st.design.row(i) = data.records[i].x;
  st.time.setZero(st.n);
  st.log_time.setZero(st.n);
  st.event.setZero(st.n);
  st.subrisk.setZero(st.n);
  st.assign_count.setZero(st.num_risks, st.truncation);
  st.active.setConstant(st.num_risks, st.truncation, true);

  // Dispersed start: unit weights, coefficients ~ N(0, 3^2), so the atoms
  // begin in distinct covariate directions and the first assignments can
  // specialize before shrinkage prunes capacity.
  st.atom_weight.setOnes(st.num_risks, st.truncation);
  st.gamma0.setOnes(st.num_risks);
  st.c0.setOnes(st.num_risks);
  st.coeff.resize(st.dim, atoms);
  for (int a = 0; a < atoms; ++a) {
    for (int v = 0; v < st.dim; ++v) st.coeff(v, a) = 3.0 * rng.normal();
  }
  st.coeff_prec.setOnes(st.dim, atoms);
  st.lambda.resize(st.n, atoms);
  for (int i = 0; i < st.n; ++i) {
    const Eigen::VectorXd eta = (st.coeff.transpose() * st.design.row(i).transpose());
    for (int a = 0; a < atoms; ++a) {
      st.lambda(i, a) = std::max(rng.gamma(1.0, std::exp(std::clamp(eta[a], -30.0, 30.0))),
                                 kTinyPositive);
    }
  }

  step_assign_subrisk(st, data, rng);
  step_impute_time(st, data, rng);
  return st;
}

void step_assign_subrisk(GibbsState& st, const Dataset& data, Rng& rng) {
  const int atoms = st.num_risks * st.truncation;
  st.assign_count.setZero();
  for (int i = 0; i < st.n; ++i) {
    const auto& rec = data.records[i];
    int j, k;
    if (rec.event_known()) {
      j = rec.event - 1;
      const Eigen::VectorXd w = st.lambda.row(i).segment(st.flat(j, 0), st.truncation);
      if (!(w.sum() > 0.0)) {
        throw NumericalError("step_assign_subrisk: subject " + std::to_string(i) +
                             " has no live atom under its observed risk");
      }
      k = rng.categorical(w.data(), st.truncation);
    } else {
      const Eigen::VectorXd w = st.lambda.row(i);
      if (!(w.sum() > 0.0)) {
        throw NumericalError("step_assign_subrisk: subject " + std::to_string(i) +
                             " has no live atom");
      }
      const int flat = rng.categorical(w.data(), atoms);
      j = flat / st.truncation;
      k = flat % st.truncation;
    }
    st.event[i] = j;
    st.subrisk[i] = k;
    ++st.assign_count(j, k);
  }
}

void step_impute_time(GibbsState& st, const Dataset& data, Rng& rng) {
  for (int i = 0; i < st.n; ++i) {
    const auto& rec = data.records[i];
    if (rec.time_status == TimeStatus::observed) {
      st.time[i] = rec.time;
    } else {
      const double total = st.lambda.row(i).sum();
      if (!(total > 0.0)) {
        throw NumericalError("step_impute_time: subject " + std::to_string(i) +
                             " has zero total rate");
      }
      // cap keeps log-time and the NB data sums finite when the total rate
      // sits at the double floor
      st.time[i] = std::min(rec.censor_lower() + rng.exponential() / total, 1e300);
    }
    st.log_time[i] = std::log(st.time[i]);
  }
}

void step_sample_lambda(GibbsState& st, const Dataset&, Rng& rng) {
  for (int j = 0; j < st.num_risks; ++j) {
    for (int k = 0; k < st.truncation; ++k) {
      const int a = st.flat(j, k);
      if (!st.active(j, k)) {
        st.lambda.col(a).setZero();
        continue;
      }
      const Eigen::VectorXd eta = st.design * st.coeff.col(a);
      const double r = st.atom_weight(j, k);
      for (int i = 0; i < st.n; ++i) {
        const int n_ijk = (st.event[i] == j && st.subrisk[i] == k) ? 1 : 0;
        st.lambda(i, a) = rng.gamma(r + n_ijk, lambda_scale(st.time[i], eta[i]));
      }
    }
  }
}

void step_sample_beta(GibbsState& st, const Dataset&, Rng& rng) {
  for (int j = 0; j < st.num_risks; ++j) {
    for (int k = 0; k < st.truncation; ++k) {
      const int a = st.flat(j, k);
      if (!st.active(j, k)) {
        // masked atoms keep prior-driven coefficients
        for (int v = 0; v < st.dim; ++v) {
          st.coeff(v, a) = rng.normal() / std::sqrt(st.coeff_prec(v, a));
        }
        continue;
      }
      const double r = st.atom_weight(j, k);
      const Eigen::VectorXd eta = st.design * st.coeff.col(a);
      Eigen::VectorXd omega(st.n);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(st.dim);
      for (int i = 0; i < st.n; ++i) {
        const int n_ijk = (st.event[i] == j && st.subrisk[i] == k) ? 1 : 0;
        omega[i] = sample_polya_gamma(r + n_ijk, eta[i] + st.log_time[i], rng);
        rhs -= (omega[i] * st.log_time[i] + 0.5 * (r - n_ijk)) * st.design.row(i).transpose();
      }
      Eigen::MatrixXd precision = st.design.transpose() * omega.asDiagonal() * st.design;
      precision.diagonal() += st.coeff_prec.col(a);
      const Eigen::LLT<Eigen::MatrixXd> llt(precision);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("step_sample_beta: precision factorization failed");
      }
      const Eigen::MatrixXd cov =
          llt.solve(Eigen::MatrixXd::Identity(st.dim, st.dim));
      st.coeff.col(a) = sample_mvn(llt.solve(rhs), cov, rng);
    }
  }
}

void step_sample_alpha(GibbsState& st, const Hyperparams& hyper, Rng& rng) {
  const int atoms = st.num_risks * st.truncation;
  for (int a = 0; a < atoms; ++a) {
    for (int v = 0; v < st.dim; ++v) {
      const double b = st.coeff(v, a);
      // prior tails under shape-0.01 hyperpriors can push b*b past double
      // range; saturate instead of handing gamma a zero scale
      double half_b2 = 0.5 * b * b;
      if (!std::isfinite(half_b2)) half_b2 = 1e300;
      st.coeff_prec(v, a) = std::max(
          rng.gamma(hyper.a0 + 0.5, 1.0 / (hyper.b0 + half_b2)), kTinyPositive);
    }
  }
}

void step_sample_r_gamma0(GibbsState& st, const Dataset&, const Hyperparams& hyper,
                          Rng& rng) {
  // Blocked draw of (gamma_0j, {r_jk}): the CRT tables give the
  // r-marginalized conditional of gamma_0j, so gamma_0j must be drawn first
  // and the atom weights refreshed from the new value. Drawing the weights
  // first would leave a stale (r, gamma_0) pair.
  const double K = static_cast<double>(st.truncation);
  for (int j = 0; j < st.num_risks; ++j) {
    int tables = 0;
    double log_one_minus_p_sum = 0.0;
    std::vector<double> data_sums(st.truncation, 0.0);
    for (int k = 0; k < st.truncation; ++k) {
      if (!st.active(j, k)) continue;
      // n_ijk in {0,1} makes the first CRT layer the identity, so the table
      // total under this atom is m_jk.
      const int a = st.flat(j, k);
      tables += sample_crt(st.assign_count(j, k), st.gamma0[j] / K, rng);
      const Eigen::VectorXd eta = st.design * st.coeff.col(a);
      double data_sum = 0.0;
      for (int i = 0; i < st.n; ++i) data_sum += log1p_texp(st.time[i], eta[i]);
      data_sums[k] = std::min(data_sum, 1e300);
      log_one_minus_p_sum += std::log(st.c0[j]) - std::log(st.c0[j] + data_sums[k]);
    }
    st.gamma0[j] = positive_clamp(
        rng.gamma(hyper.e0 + tables, 1.0 / (hyper.f0 - log_one_minus_p_sum / K)));
    for (int k = 0; k < st.truncation; ++k) {
      // masked atoms are excluded from the likelihood: prior draw
      const int m = st.active(j, k) ? st.assign_count(j, k) : 0;
      st.atom_weight(j, k) = positive_clamp(
          rng.gamma(m + st.gamma0[j] / K, 1.0 / (st.c0[j] + data_sums[k])));
    }
  }
}

void step_sample_c0(GibbsState& st, const Hyperparams& hyper, Rng& rng) {
  for (int j = 0; j < st.num_risks; ++j) {
    const double total_weight = st.atom_weight.row(j).sum();
    st.c0[j] = positive_clamp(
        rng.gamma(hyper.e1 + st.gamma0[j], 1.0 / (hyper.f1 + total_weight)));
  }
}

void step_prune(GibbsState& st) {
  for (int j = 0; j < st.num_risks; ++j) {
    for (int k = 0; k < st.truncation; ++k) {
      if (st.active(j, k) && st.assign_count(j, k) == 0) {
        st.active(j, k) = false;
        st.lambda.col(st.flat(j, k)).setZero();
      }
    }
  }
}

void gibbs_sweep(GibbsState& st, const Dataset& data, const ChainConfig& config,
                 Rng& rng) {
  // The rate refresh leads the sweep so the assignment and imputation draws
  // condition on rates that match the current weights and coefficients; the
  // remaining updates work on the rate-marginalized likelihood and leave the
  // rates untouched until the next sweep refreshes them.
  step_sample_lambda(st, data, rng);
  step_assign_subrisk(st, data, rng);
  step_impute_time(st, data, rng);
  step_sample_beta(st, data, rng);
  step_sample_alpha(st, config.hyper, rng);
  step_sample_r_gamma0(st, data, config.hyper, rng);
  step_sample_c0(st, config.hyper, rng);
  if (config.prune) step_prune(st);
}

double augmented_log_likelihood(const GibbsState& st) {
  double ll = 0.0;
  for (int j = 0; j < st.num_risks; ++j) {
    for (int k = 0; k < st.truncation; ++k) {
      if (!st.active(j, k)) continue;
      const int a = st.flat(j, k);
      const double r = st.atom_weight(j, k);
      const Eigen::VectorXd eta = st.design * st.coeff.col(a);
      for (int i = 0; i < st.n; ++i) {
        const double big_l = log1p_texp(st.time[i], eta[i]);
        ll -= r * big_l;
        if (st.event[i] == j && st.subrisk[i] == k) {
          ll += std::log(r) + st.log_time[i] + eta[i] - big_l;
        }
      }
    }
  }
  ll -= st.log_time.sum();
  return ll;
}

PosteriorSamples run_chain(const Dataset& data, const ChainConfig& config, Rng& rng) {
  if (data.size() < 1) throw ParameterError("run_chain: empty dataset");
  GibbsState st = init_state(data, config, rng);
  PosteriorSamples out;
  out.num_risks = st.num_risks;
  out.truncation = st.truncation;
  out.dim = st.dim;
  out.draws.reserve((config.iterations - config.burn_in + config.thin - 1) / config.thin);
  out.diagnostics.reserve(config.iterations);
  for (int sweep = 1; sweep <= config.iterations; ++sweep) {
    try {
      gibbs_sweep(st, data, config, rng);
    } catch (const NumericalError& e) {
      throw NumericalError("sweep " + std::to_string(sweep) + ": " + e.what());
    }
    const double ll = augmented_log_likelihood(st);
    SweepDiagnostics diag;
    diag.sweep = sweep;
    diag.log_lik = ll;
    for (int j = 0; j < st.num_risks; ++j) diag.active_atoms.push_back(st.active_atoms(j));
    out.diagnostics.push_back(std::move(diag));
    if (sweep > config.burn_in && (sweep - config.burn_in - 1) % config.thin == 0) {
      PosteriorDraw draw;
      draw.sweep = sweep;
      draw.atom_weight = st.atom_weight;
      draw.active = st.active;
      draw.event = st.event;
      draw.log_lik = ll;
      for (int j = 0; j < st.num_risks; ++j) {
        Eigen::MatrixXd cj(st.truncation, st.dim);
        for (int k = 0; k < st.truncation; ++k) {
          cj.row(k) = st.coeff.col(st.flat(j, k));
        }
        draw.coeff.push_back(std::move(cj));
      }
      out.draws.push_back(std::move(draw));
    }
  }
  return out;
}

LdrParams PosteriorSamples::params_at(int draw_index) const {
  if (draw_index < 0 || draw_index >= static_cast<int>(draws.size())) {
    throw ParameterError("params_at: draw index out of range");
  }
  const PosteriorDraw& d = draws[draw_index];
  std::vector<Eigen::VectorXd> weights;
  std::vector<Eigen::MatrixXd> coeffs;
  for (int j = 0; j < num_risks; ++j) {
    std::vector<int> keep;
    for (int k = 0; k < truncation; ++k) {
      if (d.active(j, k)) keep.push_back(k);
    }
    if (keep.empty()) {
      int k_best = 0;
      for (int k = 1; k < truncation; ++k) {
        if (d.atom_weight(j, k) > d.atom_weight(j, k_best)) k_best = k;
      }
      keep.push_back(k_best);
    }
    Eigen::VectorXd w(keep.size());
    Eigen::MatrixXd c(keep.size(), dim);
    for (std::size_t idx = 0; idx < keep.size(); ++idx) {
      w[static_cast<Eigen::Index>(idx)] = d.atom_weight(j, keep[idx]);
      c.row(static_cast<Eigen::Index>(idx)) = d.coeff[j].row(keep[idx]);
    }
    weights.push_back(std::move(w));
    coeffs.push_back(std::move(c));
  }
  return LdrParams(std::move(weights), std::move(coeffs));
}

std::vector<int> PosteriorSamples::median_dominant_atoms() const {
  std::vector<int> result;
  for (int j = 0; j < num_risks; ++j) {
    std::vector<int> counts;
    counts.reserve(draws.size());
    for (const auto& d : draws) {
      double top = 0.0;
      for (int k = 0; k < truncation; ++k) {
        if (d.active(j, k)) top = std::max(top, d.atom_weight(j, k));
      }
      int dominant = 0;
      for (int k = 0; k < truncation; ++k) {
        if (d.active(j, k) && top > 0.0 && d.atom_weight(j, k) >= 0.1 * top) ++dominant;
      }
      counts.push_back(dominant);
    }
    std::sort(counts.begin(), counts.end());
    result.push_back(counts.empty() ? 0 : counts[counts.size() / 2]);
  }
  return result;
}

void PosteriorSamples::save_trace_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open for writing: " + path);
  for (const auto& d : draws) {
    nlohmann::json rec;
    rec["sweep"] = d.sweep;
    rec["loglik"] = d.log_lik;
    nlohmann::json r = nlohmann::json::array();
    nlohmann::json beta = nlohmann::json::array();
    nlohmann::json mask = nlohmann::json::array();
    for (int j = 0; j < num_risks; ++j) {
      nlohmann::json rj = nlohmann::json::array();
      nlohmann::json bj = nlohmann::json::array();
      nlohmann::json mj = nlohmann::json::array();
      for (int k = 0; k < truncation; ++k) {
        rj.push_back(d.atom_weight(j, k));
        mj.push_back(static_cast<bool>(d.active(j, k)));
        nlohmann::json row = nlohmann::json::array();
        for (int v = 0; v < dim; ++v) row.push_back(d.coeff[j](k, v));
        bj.push_back(std::move(row));
      }
      r.push_back(std::move(rj));
      beta.push_back(std::move(bj));
      mask.push_back(std::move(mj));
    }
    rec["r"] = std::move(r);
    rec["beta"] = std::move(beta);
    rec["active_mask"] = std::move(mask);
    out << rec.dump() << '\n';
  }
}

PosteriorSamples PosteriorSamples::load_trace_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open: " + path);
  PosteriorSamples out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      PosteriorDraw d;
      d.sweep = rec.at("sweep").get<int>();
      d.log_lik = rec.at("loglik").get<double>();
      const auto& r = rec.at("r");
      const auto& beta = rec.at("beta");
      const auto& mask = rec.at("active_mask");
      const int J = static_cast<int>(r.size());
      const int K = static_cast<int>(r[0].size());
      const int dim = static_cast<int>(beta[0][0].size());
      if (out.draws.empty()) {
        out.num_risks = J;
        out.truncation = K;
        out.dim = dim;
      } else if (J != out.num_risks || K != out.truncation || dim != out.dim) {
        throw IngestionError("trace: inconsistent shapes across draws");
      }
      d.atom_weight.resize(J, K);
      d.active.resize(J, K);
      for (int j = 0; j < J; ++j) {
        Eigen::MatrixXd cj(K, dim);
        for (int k = 0; k < K; ++k) {
          d.atom_weight(j, k) = r[j][k].get<double>();
          d.active(j, k) = mask[j][k].get<bool>();
          for (int v = 0; v < dim; ++v) cj(k, v) = beta[j][k][v].get<double>();
        }
        d.coeff.push_back(std::move(cj));
      }
      out.draws.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw IngestionError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.draws.empty()) throw IngestionError(path + ": empty trace");
  return out;
}

void PosteriorSamples::save_diagnostics_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot open for writing: " + path);
  out << "sweep";
  for (int j = 1; j <= num_risks; ++j) out << ",active_risk" << j;
  out << ",loglik\n";
  for (const auto& diag : diagnostics) {
    out << diag.sweep;
    for (int a : diag.active_atoms) out << ',' << a;
    out << ',' << diag.log_lik << '\n';
  }
}

}  // namespace ldr
