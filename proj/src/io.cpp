#include "acsbm/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "acsbm/errors.hpp"

namespace acsbm {

namespace {

void require_keys(const Json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const Json& doc, const std::string& key, const std::string& where) {
  if (!doc.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": bad '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const Json& doc, const std::string& key, T fallback, const std::string& where) {
  return doc.contains(key) && !doc.at(key).is_null() ? get<T>(doc, key, where) : fallback;
}

Eigen::MatrixXd matrix_from(const Json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) throw ConfigError(what + " must be a non-empty nested array");
  const auto r = static_cast<Index>(rows.size());
  Index c = -1;
  Eigen::MatrixXd out;
  for (Index i = 0; i < r; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ConfigError(what + " must be a nested array");
    if (c < 0) {
      c = static_cast<Index>(row.size());
      out.resize(r, c);
    } else if (static_cast<Index>(row.size()) != c) {
      throw ConfigError(what + " has ragged rows");
    }
    for (Index j = 0; j < c; ++j) {
      const Json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw ConfigError(what + " entries must be numbers");
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

Json json_from(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

SpecDocument parse_spec(const Json& doc) {
  const std::string where = "model";
  require_keys(doc, {"K", "levels", "B", "beta", "link", "alpha_exponent", "pmf"}, where);
  const int K = get<int>(doc, "K", where);
  const auto levels = get<std::vector<int>>(doc, "levels", where);
  const Eigen::MatrixXd B = matrix_from(doc.at("B"), "B");
  const auto beta_values = get<std::vector<double>>(doc, "beta", where);
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(beta_values.data(), static_cast<Index>(beta_values.size()));
  const LinkFunction link = LinkFunction::parse(get_or<std::string>(doc, "link", "log", where));

  SpecDocument out;
  out.sparsity.exponent = get_or<double>(doc, "alpha_exponent", 0.0, where);
  if (out.sparsity.exponent > 0.0) throw ConfigError("alpha_exponent must be <= 0");

  std::optional<Eigen::VectorXd> pmf;
  if (doc.contains("pmf") && !(doc.at("pmf").is_string() && doc.at("pmf") == "uniform")) {
    const Json& p = doc.at("pmf");
    if (!p.is_array() || p.empty()) throw ConfigError("pmf must be \"uniform\" or an array");
    if (p.front().is_array()) {
      // K rows, one column per covariate configuration: row-major is theta-tilde order.
      const Eigen::MatrixXd grid = matrix_from(p, "pmf");
      Eigen::VectorXd flat(grid.size());
      for (Index k = 0; k < grid.rows(); ++k) flat.segment(k * grid.cols(), grid.cols()) = grid.row(k).transpose();
      pmf = flat;
    } else {
      const auto flat = get<std::vector<double>>(doc, "pmf", where);
      pmf = Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Index>(flat.size()));
    }
  }
  try {
    out.spec = ModelSpec::make(K, levels, B, beta, link, pmf);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return out;
}

Json to_json(const SpecDocument& doc) {
  const ModelSpec& s = doc.spec;
  Json out;
  out["K"] = s.K;
  out["levels"] = s.levels;
  out["B"] = json_from(s.B);
  out["beta"] = std::vector<double>(s.beta.data(), s.beta.data() + s.beta.size());
  out["link"] = std::string(s.link.name());
  out["alpha_exponent"] = doc.sparsity.exponent;
  out["pmf"] = std::vector<double>(s.attribute_pmf.data(), s.attribute_pmf.data() + s.attribute_pmf.size());
  return out;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SpecDocument load_spec(const std::filesystem::path& path) { return parse_spec(load_json(path)); }

ExperimentConfig parse_experiment(const Json& doc, const std::filesystem::path& base_dir) {
  const std::string where = "experiment";
  require_keys(doc,
               {"model", "n_values", "replicates", "method", "d", "master_seed", "threads", "record_timings",
                "clustering", "output", "description"},
               where);
  if (!doc.contains("model")) throw ConfigError("experiment: missing 'model'");
  const SpecDocument model = parse_spec(doc.at("model"));
  ExperimentConfig cfg;
  cfg.spec = model.spec;
  cfg.sched = model.sparsity;
  cfg.n_values = get<std::vector<long long>>(doc, "n_values", where);
  cfg.replicates = get_or<int>(doc, "replicates", 1, where);
  cfg.method = parse_cluster_method(get_or<std::string>(doc, "method", "gmm", where));
  if (doc.contains("d") && !doc.at("d").is_null()) cfg.d = get<int>(doc, "d", where);
  cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 0, where);
  cfg.threads = get_or<int>(doc, "threads", 1, where);
  cfg.record_timings = get_or<bool>(doc, "record_timings", false, where);
  if (doc.contains("clustering")) {
    const Json& c = doc.at("clustering");
    require_keys(c, {"restarts", "max_iterations", "tolerance", "ridge_factor"}, "clustering");
    const int restarts = get_or<int>(c, "restarts", cfg.clustering.gmm.restarts, "clustering");
    const int iterations = get_or<int>(c, "max_iterations", cfg.clustering.gmm.max_iterations, "clustering");
    cfg.clustering.gmm.restarts = cfg.clustering.kmeans.restarts = restarts;
    cfg.clustering.gmm.max_iterations = cfg.clustering.kmeans.max_iterations = iterations;
    cfg.clustering.gmm.tolerance = get_or<double>(c, "tolerance", cfg.clustering.gmm.tolerance, "clustering");
    cfg.clustering.gmm.ridge_factor = get_or<double>(c, "ridge_factor", cfg.clustering.gmm.ridge_factor, "clustering");
    if (restarts < 1 || iterations < 1) throw ConfigError("clustering: restarts and max_iterations must be positive");
  }
  if (doc.contains("output")) {
    const Json& o = doc.at("output");
    require_keys(o, {"dir", "csv", "summary"}, "output");
    cfg.output_dir = get_or<std::string>(o, "dir", cfg.output_dir, "output");
    cfg.csv_name = get_or<std::string>(o, "csv", cfg.csv_name, "output");
    cfg.summary_name = get_or<std::string>(o, "summary", cfg.summary_name, "output");
  }
  if (!base_dir.empty() && std::filesystem::path(cfg.output_dir).is_relative()) {
    cfg.output_dir = (base_dir / cfg.output_dir).lexically_normal().string();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(load_json(path), {});
}

void write_edges(std::ostream& out, const Network& net) {
  for (const auto& [u, v] : net.edges()) out << u << ' ' << v << '\n';
}

std::vector<Edge> read_edges(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long long u = 0, v = 0;
    std::string rest;
    if (!(ss >> u >> v) || (ss >> rest)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError("edge list line " + std::to_string(number) + ": expected two node ids");
    }
    if (u < 0 || v < 0 || u > std::numeric_limits<int>::max() || v > std::numeric_limits<int>::max()) {
      throw ConfigError("edge list line " + std::to_string(number) + ": node id out of range");
    }
    edges.emplace_back(static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v)));
  }
  return edges;
}

void write_attributes(std::ostream& out, const Network& net) {
  const NodeAttributes& a = net.attributes();
  out << "node\ttheta";
  for (int m = 1; m <= a.M(); ++m) out << "\tz" << m;
  out << '\n';
  for (Index i = 0; i < a.n(); ++i) {
    out << i << '\t';
    const int t = net.truth() ? (*net.truth())(i) : 0;
    if (t > 0) out << t; else out << "NA";
    for (int m = 0; m < a.M(); ++m) out << '\t' << a.Z(i, m);
    out << '\n';
  }
}

std::pair<NodeAttributes, Eigen::VectorXi> read_attributes(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("attribute file is empty");
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string h;
    while (ss >> h) header.push_back(h);
  }
  if (header.size() < 3 || header[0] != "node" || header[1] != "theta") {
    throw ConfigError("attribute header must be 'node theta z1 ... zM'");
  }
  const int M = static_cast<int>(header.size()) - 2;
  std::vector<std::pair<long long, std::vector<int>>> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(f);
    if (static_cast<int>(fields.size()) != M + 2) {
      throw ConfigError("attribute line " + std::to_string(number) + ": expected " + std::to_string(M + 2) + " fields");
    }
    std::vector<int> values(static_cast<std::size_t>(M + 1));
    long long node = 0;
    try {
      std::size_t used = 0;
      node = std::stoll(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("node");
      values[0] = fields[1] == "NA" ? 0 : std::stoi(fields[1], &used);
      if (fields[1] != "NA" && used != fields[1].size()) throw std::invalid_argument("theta");
      for (int m = 0; m < M; ++m) {
        values[static_cast<std::size_t>(m + 1)] = std::stoi(fields[static_cast<std::size_t>(m + 2)], &used);
        if (used != fields[static_cast<std::size_t>(m + 2)].size()) throw std::invalid_argument("z");
      }
    } catch (const std::exception&) {
      throw ConfigError("attribute line " + std::to_string(number) + ": malformed integer");
    }
    rows.emplace_back(node, std::move(values));
  }
  const auto n = static_cast<Index>(rows.size());
  NodeAttributes attrs;
  attrs.theta = Eigen::VectorXi::Zero(n);
  attrs.Z.resize(n, M);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const auto& [node, values] : rows) {
    if (node < 0 || node >= n || seen[static_cast<std::size_t>(node)]) {
      throw ConfigError("attribute rows must list nodes 0.." + std::to_string(n - 1) + " exactly once");
    }
    seen[static_cast<std::size_t>(node)] = true;
    if (values[0] < 0) throw ConfigError("theta must be positive or NA");
    attrs.theta(node) = values[0];
    for (int m = 0; m < M; ++m) {
      if (values[static_cast<std::size_t>(m + 1)] < 1) throw ConfigError("covariate levels are 1-based");
      attrs.Z(node, m) = values[static_cast<std::size_t>(m + 1)];
    }
  }
  Eigen::VectorXi known = attrs.theta;
  return {std::move(attrs), std::move(known)};
}

void save_network(const Network& net, const std::filesystem::path& edges, const std::filesystem::path& attributes) {
  std::ofstream e = open_out(edges);
  write_edges(e, net);
  std::ofstream a = open_out(attributes);
  write_attributes(a, net);
  if (!e || !a) throw ConfigError("failed writing network files");
}

Network load_network(const std::filesystem::path& edges, const std::filesystem::path& attributes) {
  std::ifstream a = open_in(attributes);
  auto [attrs, known] = read_attributes(a);
  std::ifstream e = open_in(edges);
  std::vector<Edge> list = read_edges(e);
  const Index n = attrs.n();
  std::optional<Eigen::VectorXi> truth;
  if ((known.array() > 0).any()) truth = known;
  try {
    return Network(n, list, std::move(attrs), std::move(truth));
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("network: ") + ex.what());
  }
}

Json fit_result_json(const FitResult& result, std::optional<double> misclassification) {
  Json out;
  out["theta_hat"] = std::vector<int>(result.theta_hat.data(), result.theta_hat.data() + result.theta_hat.size());
  Json sigma = Json::object();
  for (const auto& [z, relabel] : result.sigma_hat) sigma[format_configuration(z)] = relabel;
  out["sigma_hat"] = sigma;
  out["misclassification"] = misclassification ? finite_or_null(*misclassification) : Json(nullptr);
  out["B_tilde_hat"] = json_from(result.block_estimate.matrix);
  out["timings_ms"] = result.diagnostics.timings_ms;

  const FitDiagnostics& d = result.diagnostics;
  Json diag;
  diag["embedding_dimension"] = d.embedding_dimension;
  diag["embedding_eigenvalues"] =
      std::vector<double>(d.embedding_eigenvalues.data(), d.embedding_eigenvalues.data() + d.embedding_eigenvalues.size());
  diag["signature"] = {d.signature_p, d.signature_q};
  Json cost = Json::object(), gap = Json::object();
  for (const auto& [z, c] : d.matching_cost) cost[format_configuration(z)] = c;
  for (const auto& [z, g] : d.matching_gap) gap[format_configuration(z)] = finite_or_null(g);
  diag["matching_cost"] = cost;
  diag["matching_gap"] = gap;
  diag["lanczos"] = {{"iterations", d.lanczos.iterations},
                     {"restarts", d.lanczos.restarts},
                     {"max_residual", finite_or_null(d.lanczos.max_residual)},
                     {"converged", d.lanczos.converged}};
  diag["warnings"] = d.warnings;
  out["diagnostics"] = diag;
  return out;
}

Json summary_json(const ExperimentSummary& summary) {
  Json rows = Json::array();
  for (const auto& r : summary.rows) {
    rows.push_back({{"n", r.n},
                    {"count", r.count},
                    {"failures", r.failures},
                    {"median", finite_or_null(r.median)},
                    {"q1", finite_or_null(r.q1)},
                    {"q3", finite_or_null(r.q3)},
                    {"mean", finite_or_null(r.mean)}});
  }
  return {{"K", summary.K}, {"worst_case", summary.worst_case}, {"rows", rows}};
}

}  // namespace acsbm
