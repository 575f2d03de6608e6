#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "acsbm/harness.hpp"
#include "acsbm/model.hpp"
#include "acsbm/pipeline.hpp"
#include "acsbm/sampler.hpp"

namespace acsbm {

using Json = nlohmann::json;

/// A model specification as stored on disk: the parameters plus the
/// sparsity schedule, which is not part of ModelSpec itself.
struct SpecDocument {
  ModelSpec spec;
  SparsitySchedule sparsity;
};

// All parse_* and load_* functions throw ConfigError on bad input.
SpecDocument parse_spec(const Json& doc);
Json to_json(const SpecDocument& doc);
SpecDocument load_spec(const std::filesystem::path& path);

/// Relative output directories are resolved against `base_dir`.
ExperimentConfig parse_experiment(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

Json load_json(const std::filesystem::path& path);

// Edge list: one "u v" pair per line, 0-based, u < v. Lines starting with
// '#' are comments.
void write_edges(std::ostream& out, const Network& net);
std::vector<Edge> read_edges(std::istream& in);

// Attribute table: tab-separated, header "node theta z1 .. zM", 0-based
// node ids, 1-based labels. A theta of 0 or NA marks an unknown label.
void write_attributes(std::ostream& out, const Network& net);
/// Attributes plus the known-label vector (0 where unknown).
std::pair<NodeAttributes, Eigen::VectorXi> read_attributes(std::istream& in);

void save_network(const Network& net, const std::filesystem::path& edges, const std::filesystem::path& attributes);
Network load_network(const std::filesystem::path& edges, const std::filesystem::path& attributes);

Json fit_result_json(const FitResult& result, std::optional<double> misclassification);
Json summary_json(const ExperimentSummary& summary);

}  // namespace acsbm
