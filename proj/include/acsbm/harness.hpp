#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acsbm/clustering.hpp"
#include "acsbm/model.hpp"

namespace acsbm {

/// Fraction of nodes whose estimated label disagrees with the truth under
/// the best relabelling of the estimate. Nodes with a true label of 0
/// (unknown) are skipped; returns NaN when none are known.
double misclassification(const Eigen::VectorXi& theta_hat, const Eigen::VectorXi& theta_true, int K);

/// Sample quantile with linear interpolation between order statistics
/// (h = (n - 1) p). NaN for an empty sample.
double quantile(std::vector<double> values, double p);

struct ExperimentConfig {
  ModelSpec spec;
  SparsitySchedule sched;
  std::vector<long long> n_values;
  int replicates = 1;
  ClusterMethod method = ClusterMethod::gmm;
  std::optional<int> d;
  std::uint64_t master_seed = 0;
  int threads = 1;
  ClusterOptions clustering;
  // Wall-clock times vary between runs; off by default so CSV output is
  // reproducible byte for byte.
  bool record_timings = false;
  std::string output_dir = ".";
  std::string csv_name = "replicates.csv";
  std::string summary_name = "summary.json";

  // Throws ConfigError.
  void validate() const;
};

struct ReplicateRecord {
  long long n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::size_t edges = 0;
  double misclassification = 0.0;
  std::optional<double> fit_ms;
  std::map<std::string, double> stage_ms;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

std::uint64_t replicate_seed(std::uint64_t master, long long n, int replicate);

/// Sample attributes and a network for one (n, replicate) cell, fit and
/// score. Never throws: failures are returned in `error`.
ReplicateRecord run_replicate(const ExperimentConfig& cfg, long long n, int replicate);

/// Every (n, replicate) cell on a pool of cfg.threads workers. Records come
/// back in (n, replicate) order whatever the schedule. `progress`, if set,
/// is called once per finished cell, serialised.
std::vector<ReplicateRecord> run_experiment(const ExperimentConfig& cfg,
                                            const std::function<void(const ReplicateRecord&)>& progress = {});

struct SummaryRow {
  long long n = 0;
  int count = 0;
  int failures = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
};

struct ExperimentSummary {
  int K = 1;
  double worst_case = 0.0;  // 1 - 1/K
  std::vector<SummaryRow> rows;  // ascending n
};

ExperimentSummary summarize(const std::vector<ReplicateRecord>& records, int K);

inline constexpr const char* kCsvHeader = "n,replicate,seed,edges,misclassification,fit_ms";

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

// Successful records only.
void write_csv(std::ostream& out, const std::vector<ReplicateRecord>& records);
// Failed records: n,replicate,seed,error.
void write_failures(std::ostream& out, const std::vector<ReplicateRecord>& records);
// Throws ConfigError on a malformed file.
std::vector<ReplicateRecord> read_csv(std::istream& in);

}  // namespace acsbm
