#include "acsbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acsbm/errors.hpp"
#include "acsbm/rng.hpp"

namespace acsbm {

std::vector<int> NodeAttributes::covariates(Index i) const {
  std::vector<int> z(static_cast<std::size_t>(Z.cols()));
  for (Index m = 0; m < Z.cols(); ++m) z[static_cast<std::size_t>(m)] = Z(i, m);
  return z;
}

void NodeAttributes::check(const SubcommunityIndex& idx) const {
  if (theta.size() != Z.rows()) throw DimensionError("theta and Z disagree on the node count");
  if (Z.cols() != idx.M()) throw DimensionError("Z has the wrong number of covariates");
  for (Index i = 0; i < n(); ++i) idx.index(theta(i), covariates(i));
}

Eigen::VectorXi NodeAttributes::subcommunities(const SubcommunityIndex& idx) const {
  Eigen::VectorXi out(n());
  for (Index i = 0; i < n(); ++i) out(i) = idx.index(theta(i), covariates(i));
  return out;
}

Network::Network(Index n, const std::vector<Edge>& edges, NodeAttributes attributes,
                 std::optional<Eigen::VectorXi> truth)
    : adjacency_(static_cast<std::size_t>(n)), attributes_(std::move(attributes)), truth_(std::move(truth)) {
  if (attributes_.n() != n) {
    throw DimensionError("attributes describe " + std::to_string(attributes_.n()) + " nodes, network has " +
                         std::to_string(n));
  }
  if (truth_ && truth_->size() != n) throw DimensionError("truth labels have the wrong length");
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw DomainError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") has an endpoint out of range");
    }
    if (u == v) throw DomainError("self-loop at node " + std::to_string(u));
    adjacency_[static_cast<std::size_t>(u)].push_back(v);
    adjacency_[static_cast<std::size_t>(v)].push_back(u);
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < adjacency_.size(); ++i) {
    auto& list = adjacency_[i];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
      throw DomainError("duplicate edge at node " + std::to_string(i));
    }
    total += list.size();
  }
  edge_count_ = total / 2;
}

bool Network::has_edge(int u, int v) const {
  const auto& list = neighbors(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    for (int v : adjacency_[u]) {
      if (static_cast<int>(u) < v) out.emplace_back(static_cast<int>(u), v);
    }
  }
  return out;
}

Eigen::SparseMatrix<double> Network::adjacency() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edge_count_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    for (int v : adjacency_[u]) triplets.emplace_back(static_cast<int>(u), v, 1.0);
  }
  Eigen::SparseMatrix<double> a(n(), n());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::MatrixXd Network::dense_adjacency() const {
  if (n() > kDenseLimit) {
    throw DimensionError("dense adjacency is only materialised up to " + std::to_string(kDenseLimit) + " nodes");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n(), n());
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    for (int v : adjacency_[u]) a(static_cast<Index>(u), v) = 1.0;
  }
  return a;
}

NodeAttributes sample_attributes(const ModelSpec& spec, Index n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_attributes: n must be positive");
  spec.validate_structure();
  const SubcommunityIndex idx = spec.index();
  std::vector<double> cdf(static_cast<std::size_t>(idx.size()));
  double acc = 0.0;
  for (int r = 0; r < idx.size(); ++r) {
    acc += spec.attribute_pmf(r);
    cdf[static_cast<std::size_t>(r)] = acc;
  }
  // Never draw past the last cell with positive mass.
  int last = idx.size() - 1;
  while (last > 0 && spec.attribute_pmf(last) <= 0.0) --last;

  CounterRng rng(seed);
  NodeAttributes attrs;
  attrs.theta.resize(n);
  attrs.Z.resize(n, spec.M());
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int r = static_cast<int>(it - cdf.begin());
    r = std::min(r, last);
    const auto [k, z] = idx.unindex(r + 1);
    attrs.theta(i) = k;
    for (int m = 0; m < spec.M(); ++m) attrs.Z(i, m) = z[static_cast<std::size_t>(m)];
  }
  return attrs;
}

namespace {

// Visits positions 0..total-1, each kept independently with probability p.
template <typename Visit>
void bernoulli_positions(long long total, double p, CounterRng& rng, Visit&& visit) {
  if (total <= 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (long long pos = 0; pos < total; ++pos) visit(pos);
    return;
  }
  const double log_q = std::log1p(-p);
  long long pos = -1;
  for (;;) {
    const double skip = std::floor(std::log(rng.uniform_positive()) / log_q);
    if (skip >= static_cast<double>(total - pos)) return;
    pos += 1 + static_cast<long long>(skip);
    if (pos >= total) return;
    visit(pos);
  }
}

}  // namespace

Network sample_network(const ModelSpec& spec, const NodeAttributes& attrs, const SparsitySchedule& sched,
                       std::uint64_t seed) {
  const SubcommunityIndex idx = spec.index();
  attrs.check(idx);
  const Index n = attrs.n();
  const Eigen::MatrixXd tilde_b = build_tilde_B(spec, n, sched);
  const Eigen::VectorXi sub = attrs.subcommunities(idx);

  std::vector<std::vector<int>> groups(static_cast<std::size_t>(idx.size()));
  for (Index i = 0; i < n; ++i) groups[static_cast<std::size_t>(sub(i) - 1)].push_back(static_cast<int>(i));

  CounterRng root(seed);
  std::vector<Edge> edges;
  const auto g_count = static_cast<int>(groups.size());
  for (int a = 0; a < g_count; ++a) {
    const auto& ga = groups[static_cast<std::size_t>(a)];
    for (int b = a; b < g_count; ++b) {
      const auto& gb = groups[static_cast<std::size_t>(b)];
      const double p = tilde_b(a, b);
      CounterRng rng = root.split(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(g_count) +
                                  static_cast<std::uint64_t>(b));
      if (a == b) {
        // Pair (i, j), i < j, at row-major position j(j-1)/2 + i.
        const long long size = static_cast<long long>(ga.size());
        long long row = 1, row_start = 0;
        bernoulli_positions(size * (size - 1) / 2, p, rng, [&](long long pos) {
          while (pos >= row_start + row) {
            row_start += row;
            ++row;
          }
          const int u = ga[static_cast<std::size_t>(pos - row_start)];
          const int v = ga[static_cast<std::size_t>(row)];
          edges.emplace_back(std::min(u, v), std::max(u, v));
        });
      } else {
        const long long width = static_cast<long long>(gb.size());
        bernoulli_positions(static_cast<long long>(ga.size()) * width, p, rng, [&](long long pos) {
          const int u = ga[static_cast<std::size_t>(pos / width)];
          const int v = gb[static_cast<std::size_t>(pos % width)];
          edges.emplace_back(std::min(u, v), std::max(u, v));
        });
      }
    }
  }
  return Network(n, edges, attrs, attrs.theta);
}

Eigen::MatrixXd empirical_block_density(const Network& net, const Eigen::VectorXi& labels, int groups) {
  if (labels.size() != net.n()) throw DimensionError("empirical_block_density: one label per node required");
  if (groups < 1) throw DomainError("empirical_block_density: need at least one group");
  Eigen::VectorXd sizes = Eigen::VectorXd::Zero(groups);
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) < 1 || labels(i) > groups) {
      throw DomainError("group label " + std::to_string(labels(i)) + " at node " + std::to_string(i) +
                        " outside [1, " + std::to_string(groups) + "]");
    }
    sizes(labels(i) - 1) += 1.0;
  }
  Eigen::MatrixXd joined = Eigen::MatrixXd::Zero(groups, groups);
  for (Index u = 0; u < net.n(); ++u) {
    const int a = labels(u) - 1;
    for (int v : net.neighbors(u)) joined(a, labels(v) - 1) += 1.0;  // each ordered pair once
  }
  Eigen::MatrixXd pairs = sizes * sizes.transpose();
  pairs.diagonal() -= sizes;
  return joined.cwiseQuotient(pairs.cwiseMax(1.0));
}

}  // namespace acsbm
