#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "acsbm/model.hpp"

namespace acsbm {

/// Per-node latent label theta (1..K) and covariate levels Z (n x M, each
/// entry 1..L_m).
struct NodeAttributes {
  Eigen::VectorXi theta;
  Eigen::MatrixXi Z;

  Index n() const { return Z.rows(); }
  int M() const { return static_cast<int>(Z.cols()); }
  std::vector<int> covariates(Index i) const;

  // Throws DomainError when a label or level falls outside the index ranges.
  void check(const SubcommunityIndex& idx) const;
  // Subcommunity of every node (1-based), from the true labels.
  Eigen::VectorXi subcommunities(const SubcommunityIndex& idx) const;
};

using Edge = std::pair<int, int>;

/// Undirected simple graph stored as sorted adjacency lists. Nodes are
/// 0-based. Immutable once built.
class Network {
 public:
  static constexpr Index kDenseLimit = 4096;

  Network() = default;
  // Rejects self-loops, duplicates and out-of-range endpoints.
  Network(Index n, const std::vector<Edge>& edges, NodeAttributes attributes,
          std::optional<Eigen::VectorXi> truth = std::nullopt);

  Index n() const noexcept { return static_cast<Index>(adjacency_.size()); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const std::vector<int>& neighbors(Index i) const { return adjacency_[static_cast<std::size_t>(i)]; }
  Index degree(Index i) const { return static_cast<Index>(neighbors(i).size()); }
  bool has_edge(int u, int v) const;

  const NodeAttributes& attributes() const noexcept { return attributes_; }
  const std::optional<Eigen::VectorXi>& truth() const noexcept { return truth_; }

  // Each edge once with u < v, in lexicographic order.
  std::vector<Edge> edges() const;
  Eigen::SparseMatrix<double> adjacency() const;
  // Throws DimensionError above kDenseLimit nodes.
  Eigen::MatrixXd dense_adjacency() const;

 private:
  std::vector<std::vector<int>> adjacency_;
  std::size_t edge_count_ = 0;
  NodeAttributes attributes_;
  std::optional<Eigen::VectorXi> truth_;
};

/// n i.i.d. draws of (theta, Z) from the spec's attribute pmf.
NodeAttributes sample_attributes(const ModelSpec& spec, Index n, std::uint64_t seed);

/// Independent Bernoulli edges with the subcommunity probability of each
/// pair. Pairs are visited block by block with geometric skips, so the cost
/// is O(#edges + (K Ltilde)^2). The true labels are kept as `truth`.
Network sample_network(const ModelSpec& spec, const NodeAttributes& attrs, const SparsitySchedule& sched,
                       std::uint64_t seed);

/// Edge density between groups: entry (a, b) is the number of ordered
/// node pairs (i != j) in groups (a, b) that are joined, over
/// max(1, number of such ordered pairs). `labels` are 1-based groups.
Eigen::MatrixXd empirical_block_density(const Network& net, const Eigen::VectorXi& labels, int groups);

}  // namespace acsbm
