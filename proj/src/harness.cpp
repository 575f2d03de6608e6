#include "acsbm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "acsbm/assignment.hpp"
#include "acsbm/errors.hpp"
#include "acsbm/pipeline.hpp"
#include "acsbm/rng.hpp"
#include "acsbm/sampler.hpp"

namespace acsbm {

double misclassification(const Eigen::VectorXi& theta_hat, const Eigen::VectorXi& theta_true, int K) {
  if (theta_hat.size() != theta_true.size()) {
    throw DimensionError("misclassification: " + std::to_string(theta_hat.size()) + " estimates for " +
                         std::to_string(theta_true.size()) + " true labels");
  }
  if (K < 1) throw DomainError("misclassification: K must be positive");
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(K, K);
  double known = 0.0;
  for (Index i = 0; i < theta_true.size(); ++i) {
    const int t = theta_true(i);
    if (t == 0) continue;
    const int h = theta_hat(i);
    if (t < 1 || t > K || h < 1 || h > K) {
      throw DomainError("misclassification: label out of [1, " + std::to_string(K) + "] at node " +
                        std::to_string(i));
    }
    confusion(h - 1, t - 1) += 1.0;
    known += 1.0;
  }
  if (known == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const Assignment best = solve_assignment(-confusion);
  return 1.0 - (-best.cost) / known;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void ExperimentConfig::validate() const {
  try {
    spec.validate_structure();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (sched.exponent > 0.0) throw ConfigError("alpha_exponent must be <= 0");
  if (n_values.empty()) throw ConfigError("n_values must not be empty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw ConfigError("n_values must be positive");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw ConfigError("n_values must be strictly ascending");
  }
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (d && *d < 1) throw ConfigError("d must be positive");
}

std::uint64_t replicate_seed(std::uint64_t master, long long n, int replicate) {
  return derive_seed(master, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(replicate));
}

ReplicateRecord run_replicate(const ExperimentConfig& cfg, long long n, int replicate) {
  ReplicateRecord rec;
  rec.n = n;
  rec.replicate = replicate;
  rec.seed = replicate_seed(cfg.master_seed, n, replicate);
  try {
    const NodeAttributes attrs = sample_attributes(cfg.spec, n, derive_seed(rec.seed, 0));
    const Network net = sample_network(cfg.spec, attrs, cfg.sched, derive_seed(rec.seed, 1));
    rec.edges = net.edge_count();
    FitOptions opts;
    opts.dimension = cfg.d;
    opts.method = cfg.method;
    opts.clustering = cfg.clustering;
    const auto start = std::chrono::steady_clock::now();
    const FitResult result = fit(net, cfg.spec.K, derive_seed(rec.seed, 2), opts);
    const double elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (cfg.record_timings) {
      rec.fit_ms = elapsed;
      rec.stage_ms = result.diagnostics.timings_ms;
    }
    rec.misclassification = misclassification(result.theta_hat, attrs.theta, cfg.spec.K);
  } catch (const std::exception& e) {
    rec.error = e.what();
    if (rec.error.empty()) rec.error = "unknown failure";
  }
  return rec;
}

std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& cfg,
                                            const std::function<void(const ReplicateRecord&)>& progress) {
  cfg.validate();
  std::vector<std::pair<long long, int>> cells;
  for (long long n : cfg.n_values) {
    for (int r = 0; r < cfg.replicates; ++r) cells.emplace_back(n, r);
  }
  std::vector<ReplicateRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      records[i] = run_replicate(cfg, cells[i].first, cells[i].second);
      if (progress) {
        std::lock_guard lock(report);
        progress(records[i]);
      }
    }
  };
  const int workers = std::min<int>(cfg.threads, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  return records;
}

ExperimentSummary summarize(const std::vector<ReplicateRecord>& records, int K) {
  ExperimentSummary out;
  out.K = K;
  out.worst_case = 1.0 - 1.0 / static_cast<double>(K);
  std::map<long long, std::pair<std::vector<double>, int>> by_n;
  for (const auto& rec : records) {
    auto& [values, failures] = by_n[rec.n];
    if (rec.ok() && std::isfinite(rec.misclassification)) {
      values.push_back(rec.misclassification);
    } else {
      ++failures;
    }
  }
  for (const auto& [n, cell] : by_n) {
    const auto& [values, failures] = cell;
    SummaryRow row;
    row.n = n;
    row.count = static_cast<int>(values.size());
    row.failures = failures;
    row.median = quantile(values, 0.5);
    row.q1 = quantile(values, 0.25);
    row.q3 = quantile(values, 0.75);
    row.mean = values.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    out.rows.push_back(row);
  }
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '\n' || c == '\r') {
      out += ' ';
      continue;
    }
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <typename T>
T parse_field(const std::string& field, int line, const char* name) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ConfigError("line " + std::to_string(line) + ": bad " + name + " '" + field + "'");
  }
  return value;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ReplicateRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& rec : records) {
    if (!rec.ok()) continue;
    out << rec.n << ',' << rec.replicate << ',' << rec.seed << ',' << rec.edges << ','
        << format_double(rec.misclassification) << ',' << (rec.fit_ms ? format_double(*rec.fit_ms) : "NA") << '\n';
  }
}

void write_failures(std::ostream& out, const std::vector<ReplicateRecord>& records) {
  out << "n,replicate,seed,error\n";
  for (const auto& rec : records) {
    if (rec.ok()) continue;
    out << rec.n << ',' << rec.replicate << ',' << rec.seed << ',' << csv_quote(rec.error) << '\n';
  }
}

std::vector<ReplicateRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("unexpected CSV header '" + line + "'");
  std::vector<ReplicateRecord> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw ConfigError("line " + std::to_string(number) + ": expected 6 fields");
    ReplicateRecord rec;
    rec.n = parse_field<long long>(fields[0], number, "n");
    rec.replicate = parse_field<int>(fields[1], number, "replicate");
    rec.seed = parse_field<std::uint64_t>(fields[2], number, "seed");
    rec.edges = parse_field<std::size_t>(fields[3], number, "edges");
    rec.misclassification = parse_field<double>(fields[4], number, "misclassification");
    if (fields[5] != "NA") rec.fit_ms = parse_field<double>(fields[5], number, "fit_ms");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace acsbm
