// Batch CLI: simulate / fit / predict / evaluate / embed pipelines over the
// CSV and JSON formats defined by the library.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldr/data.hpp"
#include "ldr/errors.hpp"
#include "ldr/eval.hpp"
#include "ldr/gibbs.hpp"
#include "ldr/interpret.hpp"
#include "ldr/map.hpp"
#include "ldr/model.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("LDR_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ldr::IngestionError("cannot open for writing: " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["seed"] = seed;
    doc_["version"] = kVersion;
    doc_["config"] = nlohmann::json::object();
  }
  nlohmann::json& config() { return doc_["config"]; }
  void add_input(const std::string& path) { doc_["inputs"].push_back(path); }
  void add_output(const std::string& path) { doc_["outputs"].push_back(path); }
  void write(const std::filesystem::path& path) {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(elapsed).count();
    write_atomic(path, doc_.dump(2) + "\n");
  }

 private:
  nlohmann::json doc_;
  std::chrono::steady_clock::time_point start_;
};

// trace (posterior-averaged scores) or frozen params (point scores)
using Model = std::variant<ldr::LdrParams, ldr::PosteriorSamples>;

Model load_model(const std::string& path) {
  if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
    return ldr::PosteriorSamples::load_trace_jsonl(path);
  }
  return ldr::LdrParams::load(path);
}

int model_num_risks(const Model& model) {
  if (std::holds_alternative<ldr::LdrParams>(model)) {
    return std::get<ldr::LdrParams>(model).num_risks();
  }
  return std::get<ldr::PosteriorSamples>(model).num_risks;
}

Eigen::VectorXd model_score_curve(const Model& model, const Eigen::VectorXd& x,
                                  int risk, const Eigen::VectorXd& taus, int n_mc,
                                  ldr::Rng& rng) {
  if (std::holds_alternative<ldr::LdrParams>(model)) {
    return ldr::cif_curve(x, taus, std::get<ldr::LdrParams>(model), risk - 1, n_mc, rng);
  }
  return ldr::score_curve_from_posterior(std::get<ldr::PosteriorSamples>(model), x,
                                         risk, taus, n_mc, rng);
}

ldr::Dataset keep_fully_observed(const ldr::Dataset& data, const char* context) {
  ldr::Dataset kept = data;
  kept.records.clear();
  int dropped = 0;
  for (const auto& rec : data.records) {
    if (rec.fully_observed()) {
      kept.records.push_back(rec);
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) {
    std::cerr << context << ": excluded " << dropped
              << " rows without observed time and event type\n";
  }
  return kept;
}

struct CommonOpts {
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--output-dir", opts.output_dir, "Directory for artifacts");
  cmd->add_option("--seed", opts.seed, "RNG seed (default: LDR_SEED env or random)");
  cmd->add_option("--config", "TOML config file of key=value defaults (flags win)");
}

// key = value lines, optional quotes, # comments; section headers ignored
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ldr::IngestionError("cannot open config: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ldr::IngestionError(path + " line " + std::to_string(line_no) +
                                ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || value.empty()) {
      throw ldr::IngestionError(path + " line " + std::to_string(line_no) +
                                ": expected key = value");
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

// append config-supplied defaults for options absent from the command line
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") config_path = args[i + 1];
  }
  for (const auto& arg : args) {
    if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
  }
  if (config_path.empty()) return args;
  for (const auto& [key, value] : read_config(config_path)) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) present = true;
    }
    if (!present) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

std::filesystem::path out_path(const CommonOpts& opts, const std::string& name) {
  std::filesystem::create_directories(opts.output_dir);
  return std::filesystem::path(opts.output_dir) / name;
}

int run_simulate(const CommonOpts& opts, const std::string& generator, int n,
                 std::optional<double> censor_override, const std::string& out_name) {
  const std::uint64_t seed = resolve_seed(opts.seed);
  ldr::SyntheticSpec spec = generator == "data1" ? ldr::SyntheticSpec::data1(n, seed)
                                                 : ldr::SyntheticSpec::data2(n, seed);
  if (censor_override) spec.censor_time = *censor_override;

  Manifest manifest("simulate", seed);
  manifest.config() = {{"generator", generator},
                       {"n", n},
                       {"censor_time", spec.censor_time},
                       {"beta1", {spec.beta1[0], spec.beta1[1], spec.beta1[2]}},
                       {"beta2", {spec.beta2[0], spec.beta2[1], spec.beta2[2]}}};

  ldr::Rng rng(seed);
  const ldr::Dataset data = ldr::simulate(spec, rng);
  const auto csv = out_path(opts, out_name);
  ldr::write_csv(data, csv.string());
  const auto meta = out_path(opts, out_name + ".meta.json");
  write_atomic(meta, ldr::dataset_metadata(data).dump(2) + "\n");
  manifest.add_output(csv.string());
  manifest.add_output(meta.string());
  manifest.write(out_path(opts, out_name + ".manifest.json"));
  std::cout << "wrote " << csv.string() << " (" << data.size() << " rows)\n";
  return 0;
}

int run_fit(const CommonOpts& opts, const std::string& method, const std::string& data_path,
            ldr::ChainConfig chain, bool fast, int chains, ldr::MapConfig map_config,
            int map_truncation, const std::string& r_prior, const std::string& prefix) {
  const std::uint64_t seed = resolve_seed(opts.seed);
  const ldr::Dataset data = ldr::load_csv(data_path);

  Manifest manifest("fit", seed);
  manifest.add_input(data_path);

  if (method == "gibbs") {
    if (fast) {
      const ldr::ChainConfig fast_cfg = ldr::ChainConfig::fast_profile();
      chain.iterations = fast_cfg.iterations;
      chain.burn_in = fast_cfg.burn_in;
    }
    chain.seed = seed;
    chain.validate();
    manifest.config() = {{"method", "gibbs"},
                         {"iterations", chain.iterations},
                         {"burn_in", chain.burn_in},
                         {"thin", chain.thin},
                         {"K", chain.truncation},
                         {"chains", chains}};

    std::vector<ldr::PosteriorSamples> results(chains);
    std::vector<std::exception_ptr> failures(chains);
    std::vector<std::thread> workers;
    ldr::Rng root(seed);
    for (int c = 0; c < chains; ++c) {
      workers.emplace_back([&, c]() {
        try {
          ldr::Rng rng = root.substream(c);
          results[c] = ldr::run_chain(data, chain, rng);
        } catch (...) {
          failures[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }

    for (int c = 0; c < chains; ++c) {
      const std::string tag = chains == 1 ? prefix : prefix + "_chain" + std::to_string(c + 1);
      const auto trace = out_path(opts, tag + ".trace.jsonl");
      const auto diag = out_path(opts, tag + ".diagnostics.csv");
      const auto params_path = out_path(opts, tag + ".params.json");
      results[c].save_trace_jsonl(trace.string());
      results[c].save_diagnostics_csv(diag.string());
      int best = 0;
      for (std::size_t d = 1; d < results[c].draws.size(); ++d) {
        if (results[c].draws[d].log_lik > results[c].draws[best].log_lik) {
          best = static_cast<int>(d);
        }
      }
      results[c].params_at(best).save(params_path.string());
      manifest.add_output(trace.string());
      manifest.add_output(diag.string());
      manifest.add_output(params_path.string());
      std::cout << "chain " << c + 1 << ": " << results[c].draws.size()
                << " stored draws, params at " << params_path.string() << "\n";
    }
  } else {  // map
    map_config.seed = seed;
    if (r_prior == "gp") {
      map_config.r_prior = ldr::MapConfig::RPrior::gamma_process;
    } else if (r_prior == "l2") {
      map_config.r_prior = ldr::MapConfig::RPrior::l2;
    } else {
      map_config.r_prior = ldr::MapConfig::RPrior::gamma_unit;
    }
    map_config.validate();
    manifest.config() = {{"method", "map"},
                         {"epochs", map_config.max_epochs},
                         {"mc_samples", map_config.mc_samples},
                         {"minibatch", map_config.minibatch},
                         {"step_size", map_config.step_size},
                         {"K", map_truncation},
                         {"r_prior", r_prior}};
    ldr::Rng rng(seed);
    const ldr::LdrParams init = ldr::default_map_init(data, map_truncation, rng);
    const ldr::MapResult result = ldr::fit_map(data, init, map_config, rng);
    const auto params_path = out_path(opts, prefix + ".params.json");
    result.params.save(params_path.string());
    const auto trace_path = out_path(opts, prefix + ".objective.csv");
    {
      std::ofstream out(trace_path);
      out << "epoch,logp\n";
      for (std::size_t e = 0; e < result.objective_trace.size(); ++e) {
        out << e << ',' << result.objective_trace[e] << '\n';
      }
    }
    manifest.add_output(params_path.string());
    manifest.add_output(trace_path.string());
    std::cout << "map fit: " << result.epochs_run << " epochs, params at "
              << params_path.string() << "\n";
  }
  manifest.write(out_path(opts, prefix + ".manifest.json"));
  return 0;
}

int run_predict(const CommonOpts& opts, const std::string& model_path,
                const std::string& data_path, std::vector<double> taus,
                std::vector<int> risks, int n_mc, const std::string& out_name) {
  const std::uint64_t seed = resolve_seed(opts.seed);
  const Model model = load_model(model_path);
  const ldr::Dataset data = ldr::load_csv(data_path);
  if (risks.empty()) {
    for (int j = 1; j <= model_num_risks(model); ++j) risks.push_back(j);
  }
  Eigen::VectorXd tau_vec(taus.size());
  for (std::size_t q = 0; q < taus.size(); ++q) tau_vec[q] = taus[q];

  Manifest manifest("predict", seed);
  manifest.add_input(model_path);
  manifest.add_input(data_path);
  manifest.config() = {{"tau", taus}, {"risk", risks}, {"n_mc", n_mc}};

  ldr::Rng rng(seed);
  const auto path = out_path(opts, out_name);
  std::ofstream out(path);
  if (!out) throw ldr::IngestionError("cannot open for writing: " + path.string());
  out << "subject,risk,tau,cif\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int risk : risks) {
      const Eigen::VectorXd curve =
          model_score_curve(model, data.records[i].x, risk, tau_vec, n_mc, rng);
      for (Eigen::Index q = 0; q < tau_vec.size(); ++q) {
        out << i << ',' << risk << ',' << tau_vec[q] << ',' << curve[q] << '\n';
      }
    }
  }
  manifest.add_output(path.string());
  manifest.write(out_path(opts, out_name + ".manifest.json"));
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int run_evaluate(const CommonOpts& opts, const std::string& model_path,
                 const std::string& data_path, const std::string& metric,
                 std::vector<double> taus, std::vector<int> risks, int n_mc,
                 const std::string& out_name) {
  const std::uint64_t seed = resolve_seed(opts.seed);
  const Model model = load_model(model_path);
  const ldr::Dataset test = keep_fully_observed(ldr::load_csv(data_path), "evaluate");
  if (risks.empty()) {
    for (int j = 1; j <= model_num_risks(model); ++j) risks.push_back(j);
  }
  Eigen::VectorXd tau_vec(taus.size());
  for (std::size_t q = 0; q < taus.size(); ++q) tau_vec[q] = taus[q];

  Manifest manifest("evaluate", seed);
  manifest.add_input(model_path);
  manifest.add_input(data_path);
  manifest.config() = {{"metric", metric}, {"tau", taus}, {"risk", risks}, {"n_mc", n_mc}};

  ldr::Rng rng(seed);
  std::vector<ldr::MetricReport> reports;
  for (int risk : risks) {
    Eigen::MatrixXd scores(test.size(), tau_vec.size());
    for (int i = 0; i < test.size(); ++i) {
      scores.row(i) =
          model_score_curve(model, test.records[i].x, risk, tau_vec, n_mc, rng).transpose();
    }
    ldr::MetricReport report;
    report.risk = risk;
    report.metric = metric;
    report.split_id = data_path;
    for (Eigen::Index q = 0; q < tau_vec.size(); ++q) {
      report.taus.push_back(tau_vec[q]);
      std::optional<double> value;
      if (metric == "cindex") {
        value = ldr::c_index(scores.col(q), test, risk, tau_vec[q]);
      } else {
        value = ldr::brier_score(scores.col(q), test, risk, tau_vec[q]);
      }
      if (!value) {
        throw ldr::NumericalError("evaluate: metric undefined (no comparable pairs)");
      }
      report.values.push_back(*value);
    }
    reports.push_back(std::move(report));
  }
  const auto path = out_path(opts, out_name);
  ldr::write_metric_csv(reports, path.string());
  manifest.add_output(path.string());
  manifest.write(out_path(opts, out_name + ".manifest.json"));
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int run_embed(const CommonOpts& opts, const std::string& params_path,
              const std::string& data_path, int knn, int n_mc,
              const std::string& out_name) {
  const std::uint64_t seed = resolve_seed(opts.seed);
  const ldr::LdrParams params = ldr::LdrParams::load(params_path);
  const ldr::Dataset data = keep_fully_observed(ldr::load_csv(data_path), "embed");

  Manifest manifest("embed", seed);
  manifest.add_input(params_path);
  manifest.add_input(data_path);
  manifest.config() = {{"knn", knn}, {"n_mc", n_mc}};

  ldr::Rng rng(seed);
  const ldr::SubriskWeights weights = ldr::subrisk_weights(data, params, n_mc, rng);
  const ldr::Representatives reps = ldr::representatives(weights, data);

  const int n = data.size();
  const int v = data.num_covariates();
  int n_reps = 0;
  for (bool defined : reps.defined) n_reps += defined;
  Eigen::MatrixXd points(n + n_reps, v);
  for (int i = 0; i < n; ++i) points.row(i) = data.records[i].x.tail(v);
  std::vector<int> rep_rows;  // atom index per appended row
  for (std::size_t a = 0; a < reps.defined.size(); ++a) {
    if (reps.defined[a]) {
      points.row(n + static_cast<int>(rep_rows.size())) = reps.x.row(a);
      rep_rows.push_back(static_cast<int>(a));
    }
  }

  const ldr::Embedding emb = ldr::isomap_embed(points, knn);
  if (!emb.excluded.empty()) {
    std::cerr << "embed: " << emb.excluded.size()
              << " points fell outside the largest neighbor-graph component\n";
  }

  const auto path = out_path(opts, out_name);
  std::ofstream out(path);
  if (!out) throw ldr::IngestionError("cannot open for writing: " + path.string());
  out << "id,is_representative,risk,subrisk,coord_x,coord_y\n";
  for (std::size_t row = 0; row < emb.kept.size(); ++row) {
    const int point = emb.kept[row];
    if (point < n) {
      // subject row: report its observed risk and, when one atom carries more
      // than half of the within-risk weight, that sub-risk
      const int risk = data.records[point].event;
      std::string subrisk;
      if (risk > 0) {
        double risk_total = 0.0;
        double best_w = 0.0;
        int best_k = -1;
        for (std::size_t a = 0; a < weights.atoms.size(); ++a) {
          if (weights.atoms[a].first == risk - 1) {
            risk_total += weights.w(point, static_cast<int>(a));
            if (weights.w(point, static_cast<int>(a)) > best_w) {
              best_w = weights.w(point, static_cast<int>(a));
              best_k = weights.atoms[a].second;
            }
          }
        }
        if (risk_total > 0.0 && best_w / risk_total > 0.5) {
          subrisk = std::to_string(best_k + 1);
        }
      }
      out << point << ",0," << risk << ',' << subrisk << ',' << emb.coords(row, 0)
          << ',' << emb.coords(row, 1) << '\n';
    } else {
      const auto [risk, subrisk] = reps.atoms[rep_rows[point - n]];
      out << point << ",1," << risk + 1 << ',' << subrisk + 1 << ','
          << emb.coords(row, 0) << ',' << emb.coords(row, 1) << '\n';
    }
  }
  manifest.add_output(path.string());
  manifest.write(out_path(opts, out_name + ".manifest.json"));
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lomax delegate racing for survival analysis with competing risks"};
  app.require_subcommand(1);

  // simulate
  CommonOpts sim_opts;
  std::string sim_generator;
  int sim_n = 1000;
  std::optional<double> sim_censor;
  std::string sim_out = "dataset.csv";
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_common(sim, sim_opts);
  sim->add_option("--generator", sim_generator, "data1 (log-linear) or data2 (non-monotone)")
      ->check(CLI::IsMember({"data1", "data2"}));
  sim->add_option("--n", sim_n, "Number of subjects")->check(CLI::PositiveNumber);
  sim->add_option("--censor-time", sim_censor, "Override the censoring time");
  sim->add_option("--out", sim_out, "Output CSV name");

  // fit
  CommonOpts fit_opts;
  std::string fit_method, fit_data, fit_prefix = "fit", fit_r_prior = "unit";
  bool fit_fast = false;
  int fit_chains = 1, fit_map_k = 10;
  ldr::ChainConfig chain_config;
  ldr::MapConfig map_config;
  auto* fit = app.add_subcommand("fit", "Fit the model by Gibbs sampling or MAP");
  add_common(fit, fit_opts);
  fit->add_option("--method", fit_method, "gibbs or map")
      ->check(CLI::IsMember({"gibbs", "map"}));
  fit->add_option("--data", fit_data, "Training CSV");
  fit->add_option("--prefix", fit_prefix, "Output file prefix");
  fit->add_option("--iterations", chain_config.iterations, "Gibbs sweeps");
  fit->add_option("--burnin", chain_config.burn_in, "Burn-in sweeps");
  fit->add_option("--thin", chain_config.thin, "Thinning stride");
  fit->add_option("--K", chain_config.truncation, "Atoms per risk (gibbs)");
  fit->add_flag("--fast", fit_fast, "Fast chain profile (2000 sweeps, 1500 burn-in)");
  fit->add_option("--chains", fit_chains, "Independent chains")->check(CLI::PositiveNumber);
  fit->add_option("--epochs", map_config.max_epochs, "MAP epochs");
  fit->add_option("--mc-samples", map_config.mc_samples, "MAP draws per subject");
  fit->add_option("--batch", map_config.minibatch, "MAP minibatch size");
  fit->add_option("--step", map_config.step_size, "MAP base step size");
  fit->add_option("--map-K", fit_map_k, "Atoms per risk (map)");
  fit->add_option("--r-prior", fit_r_prior, "Atom-weight prior: gp, unit, or l2")
      ->check(CLI::IsMember({"gp", "unit", "l2"}));

  // predict
  CommonOpts pred_opts;
  std::string pred_model, pred_data, pred_out = "cif.csv";
  std::vector<double> pred_taus;
  std::vector<int> pred_risks;
  int pred_n_mc = 1000;
  auto* pred = app.add_subcommand("predict", "Cumulative incidence per subject");
  add_common(pred, pred_opts);
  pred->add_option("--model", pred_model, "params.json or trace.jsonl");
  pred->add_option("--data", pred_data, "Subjects CSV");
  pred->add_option("--tau", pred_taus, "Evaluation times");
  pred->add_option("--risk", pred_risks, "Risk indices (default: all)");
  pred->add_option("--n-mc", pred_n_mc, "Monte-Carlo draws per CIF");
  pred->add_option("--out", pred_out, "Output CSV name");

  // evaluate
  CommonOpts eval_opts;
  std::string eval_model, eval_data, eval_metric, eval_out = "metrics.csv";
  std::vector<double> eval_taus;
  std::vector<int> eval_risks;
  int eval_n_mc = 1000;
  auto* eval = app.add_subcommand("evaluate", "Cause-specific C-index or Brier score");
  add_common(eval, eval_opts);
  eval->add_option("--model", eval_model, "params.json or trace.jsonl");
  eval->add_option("--data", eval_data, "Test CSV");
  eval->add_option("--metric", eval_metric, "cindex or brier")
      ->check(CLI::IsMember({"cindex", "brier"}));
  eval->add_option("--tau", eval_taus, "Evaluation times");
  eval->add_option("--risk", eval_risks, "Risk indices (default: all)");
  eval->add_option("--n-mc", eval_n_mc, "Monte-Carlo draws per CIF");
  eval->add_option("--out", eval_out, "Output CSV name");

  // embed
  CommonOpts emb_opts;
  std::string emb_params, emb_data, emb_out = "embedding.csv";
  int emb_knn = 5, emb_n_mc = 1000;
  auto* emb = app.add_subcommand("embed", "Isomap of subjects and sub-risk representatives");
  add_common(emb, emb_opts);
  emb->add_option("--params", emb_params, "params.json");
  emb->add_option("--data", emb_data, "Subjects CSV (uncensored rows used)");
  emb->add_option("--knn", emb_knn, "Neighbors per point")->check(CLI::PositiveNumber);
  emb->add_option("--n-mc", emb_n_mc, "Monte-Carlo draws per weight");
  emb->add_option("--out", emb_out, "Output CSV name");

  const auto require = [](bool present, const char* what) {
    if (!present) throw ldr::ParameterError(std::string(what) + " is required");
  };

  try {
    std::vector<std::string> args = merge_config({argv + 1, argv + argc});
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
    if (*sim) {
      require(!sim_generator.empty(), "--generator");
      return run_simulate(sim_opts, sim_generator, sim_n, sim_censor, sim_out);
    }
    if (*fit) {
      require(!fit_method.empty(), "--method");
      require(!fit_data.empty(), "--data");
      return run_fit(fit_opts, fit_method, fit_data, chain_config, fit_fast, fit_chains,
                     map_config, fit_map_k, fit_r_prior, fit_prefix);
    }
    if (*pred) {
      require(!pred_model.empty(), "--model");
      require(!pred_data.empty(), "--data");
      require(!pred_taus.empty(), "--tau");
      return run_predict(pred_opts, pred_model, pred_data, pred_taus, pred_risks,
                         pred_n_mc, pred_out);
    }
    if (*eval) {
      require(!eval_model.empty(), "--model");
      require(!eval_data.empty(), "--data");
      require(!eval_metric.empty(), "--metric");
      require(!eval_taus.empty(), "--tau");
      return run_evaluate(eval_opts, eval_model, eval_data, eval_metric, eval_taus,
                          eval_risks, eval_n_mc, eval_out);
    }
    if (*emb) {
      require(!emb_params.empty(), "--params");
      require(!emb_data.empty(), "--data");
      return run_embed(emb_opts, emb_params, emb_data, emb_knn, emb_n_mc, emb_out);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  } catch (const ldr::IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return 3;
  } catch (const ldr::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  }
}
