// acsbm: simulate, fit and benchmark additive-covariate block models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "acsbm/errors.hpp"
#include "acsbm/harness.hpp"
#include "acsbm/io.hpp"
#include "acsbm/pipeline.hpp"
#include "acsbm/rng.hpp"
#include "acsbm/sampler.hpp"

namespace fs = std::filesystem;
using namespace acsbm;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

struct SimulateArgs {
  std::string config;
  long long n = 0;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int simulate(const SimulateArgs& a) {
  const SpecDocument doc = load_spec(a.config);
  const ValidationReport report = validate_spec(doc.spec, a.n, doc.sparsity);
  if (!report.ok()) {
    for (const auto& e : report.structural_errors) std::cerr << "error: " << e << '\n';
    for (const auto& e : report.range_violations) std::cerr << "error: " << e << '\n';
    return kConfigError;
  }
  for (const auto& w : report.warnings()) std::cerr << "warning: " << w << '\n';
  const NodeAttributes attrs = sample_attributes(doc.spec, a.n, derive_seed(a.seed, 0));
  const Network net = sample_network(doc.spec, attrs, doc.sparsity, derive_seed(a.seed, 1));
  const fs::path dir(a.out);
  ensure_dir(dir);
  save_network(net, dir / "edges.txt", dir / "attributes.tsv");
  std::cout << "n=" << net.n() << " edges=" << net.edge_count() << " -> " << dir.string() << '\n';
  return 0;
}

struct FitArgs {
  std::string network;
  std::string attributes;
  int K = 0;
  std::optional<int> d;
  std::string method = "gmm";
  std::string solver = "auto";
  std::uint64_t seed = 0;
  std::string out;
};

int run_fit(const FitArgs& a) {
  const Network net = load_network(a.network, a.attributes);
  if (a.K < 1) throw ConfigError("--K must be positive");
  FitOptions opts;
  opts.dimension = a.d;
  opts.method = parse_cluster_method(a.method);
  if (a.solver == "dense") opts.solver = EigenSolverChoice::dense;
  if (a.solver == "lanczos") opts.solver = EigenSolverChoice::lanczos;
  const FitResult result = fit(net, a.K, a.seed, opts);
  std::optional<double> rate;
  if (net.truth()) rate = misclassification(result.theta_hat, *net.truth(), a.K);
  for (const auto& w : result.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
  const std::string text = fit_result_json(result, rate).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    ensure_dir(a.out);
    write_text(fs::path(a.out) / "fit.json", text);
  }
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> method;
  std::optional<std::string> out;
  bool quiet = false;
};

int experiment(const ExperimentArgs& a) {
  const fs::path config_path(a.config);
  ExperimentConfig cfg = parse_experiment(load_json(config_path), config_path.parent_path());
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (a.method) cfg.method = parse_cluster_method(*a.method);
  if (a.out) cfg.output_dir = *a.out;
  cfg.validate();
  const ValidationReport report = validate_spec(cfg.spec, cfg.n_values.front(), cfg.sched);
  for (const auto& w : report.warnings()) std::cerr << "warning: " << w << '\n';

  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  const auto records = run_experiment(cfg, [&](const ReplicateRecord& r) {
    if (a.quiet) return;
    std::cerr << "n=" << r.n << " rep=" << r.replicate << ' ';
    if (r.ok()) std::cerr << "misclassification=" << format_double(r.misclassification) << '\n';
    else std::cerr << "FAILED: " << r.error << '\n';
  });

  std::ostringstream csv;
  write_csv(csv, records);
  write_text(dir / cfg.csv_name, csv.str());
  const ExperimentSummary summary = summarize(records, cfg.spec.K);
  Json js = summary_json(summary);
  js["master_seed"] = cfg.master_seed;
  js["method"] = std::string(to_string(cfg.method));
  Json failures = Json::array();
  for (const auto& r : records) {
    if (!r.ok()) failures.push_back({{"n", r.n}, {"replicate", r.replicate}, {"seed", r.seed}, {"error", r.error}});
  }
  js["failures"] = failures;
  write_text(dir / cfg.summary_name, js.dump(2) + "\n");
  if (!failures.empty()) {
    std::ostringstream f;
    write_failures(f, records);
    write_text(dir / "failures.csv", f.str());
  }
  std::cout << js.dump(2) << '\n';
  return 0;
}

struct SummarizeArgs {
  std::string csv;
  int K = 0;
  std::string config;
  std::string out;
};

int run_summarize(const SummarizeArgs& a) {
  int K = a.K;
  if (!a.config.empty()) {
    const Json doc = load_json(a.config);
    K = parse_spec(doc.contains("model") ? doc.at("model") : doc).spec.K;
  }
  if (K < 1) throw ConfigError("summarize needs --K or --config");
  std::ifstream in(a.csv);
  if (!in) throw ConfigError("cannot open " + a.csv);
  const std::string text = summary_json(summarize(read_csv(in), K)).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    ensure_dir(a.out);
    write_text(fs::path(a.out) / "summary.json", text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral community recovery for additive-covariate block models"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a network and write edges.txt + attributes.tsv");
  sim_cmd->add_option("--config", sim.config, "Model spec JSON")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--n", sim.n, "Number of nodes")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--out", sim.out, "Output directory");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Recover communities; prints FitResult JSON");
  fit_cmd->add_option("--network", fa.network, "Edge list")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--attributes", fa.attributes, "Attribute table")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--K", fa.K, "Number of latent communities")->required();
  fit_cmd->add_option("--d", fa.d, "Embedding dimension (default K * number of configurations)");
  fit_cmd->add_option("--method", fa.method, "gmm or kmeans")->check(CLI::IsMember({"gmm", "kmeans"}));
  fit_cmd->add_option("--solver", fa.solver, "Eigensolver: auto, dense or lanczos")
      ->check(CLI::IsMember({"auto", "dense", "lanczos"}));
  fit_cmd->add_option("--seed", fa.seed, "Seed");
  fit_cmd->add_option("--out", fa.out, "Directory for fit.json (stdout if omitted)");

  ExperimentArgs ea;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a replicate sweep from a config file");
  exp_cmd->add_option("--config", ea.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--seed", ea.seed, "Override master_seed");
  exp_cmd->add_option("--threads", ea.threads, "Override worker count")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--method", ea.method, "Override clustering method")->check(CLI::IsMember({"gmm", "kmeans"}));
  exp_cmd->add_option("--out", ea.out, "Override output directory");
  exp_cmd->add_flag("--quiet", ea.quiet, "No per-replicate progress");

  SummarizeArgs sa;
  auto* sum_cmd = app.add_subcommand("summarize", "Summarise a replicate CSV");
  sum_cmd->add_option("--csv", sa.csv, "Replicate CSV")->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("--K", sa.K, "Number of latent communities");
  sum_cmd->add_option("--config", sa.config, "Spec or experiment JSON to take K from")->check(CLI::ExistingFile);
  sum_cmd->add_option("--out", sa.out, "Directory for summary.json (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*sim_cmd) return simulate(sim);
    if (*fit_cmd) return run_fit(fa);
    if (*exp_cmd) return experiment(ea);
    if (*sum_cmd) return run_summarize(sa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ModelValidityError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
