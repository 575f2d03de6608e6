#include "acsbm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "acsbm/assignment.hpp"
#include "acsbm/errors.hpp"
#include "acsbm/rng.hpp"

namespace acsbm {

BlockEstimate estimate_block_matrix(const Network& net, const PerCovariateLabels& labels,
                                    const SubcommunityIndex& idx) {
  const Eigen::VectorXi theta_z = labels.per_node(net.n());
  const NodeAttributes& attrs = net.attributes();
  Eigen::VectorXi sub(net.n());
  for (Index i = 0; i < net.n(); ++i) {
    if (theta_z(i) == 0) throw DomainError("node " + std::to_string(i) + " has no per-covariate label");
    sub(i) = idx.index(theta_z(i), attrs.covariates(i));
  }
  return BlockEstimate{empirical_block_density(net, sub, idx.size()), idx};
}

CanonicalPositions estimated_positions(const BlockEstimate& est) { return canonical_positions(est.matrix); }

Matching match_to_reference(const CanonicalPositions& pos, const SubcommunityIndex& idx, const std::vector<int>& z) {
  const int K = idx.K();
  if (pos.X.rows() != idx.size()) {
    throw DimensionError("positions have " + std::to_string(pos.X.rows()) + " rows, expected " +
                         std::to_string(idx.size()));
  }
  if (!pos.X.allFinite()) throw DomainError("match_to_reference: non-finite latent positions");
  const std::vector<int> reference(static_cast<std::size_t>(idx.M()), 1);
  Eigen::MatrixXd cost(K, K);
  for (int a = 0; a < K; ++a) {
    const Index row_z = idx.index(a + 1, z) - 1;
    for (int k = 0; k < K; ++k) {
      const Index row_ref = idx.index(k + 1, reference) - 1;
      cost(a, k) = (pos.X.row(row_z) - pos.X.row(row_ref)).squaredNorm();
    }
  }
  const Assignment best = solve_assignment(cost);
  Matching out;
  out.cost = best.cost;
  out.sigma.resize(static_cast<std::size_t>(K));
  out.relabel.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const int a = best.permutation[static_cast<std::size_t>(k)];
    out.sigma[static_cast<std::size_t>(k)] = a + 1;
    out.relabel[static_cast<std::size_t>(a)] = k + 1;
  }

  out.gap = std::numeric_limits<double>::quiet_NaN();
  if (K >= 2 && K <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(K));
    std::iota(perm.begin(), perm.end(), 0);
    double first = std::numeric_limits<double>::infinity();
    double second = first;
    do {
      double total = 0.0;
      for (int k = 0; k < K; ++k) total += cost(perm[static_cast<std::size_t>(k)], k);
      if (total < first) {
        second = first;
        first = total;
      } else if (total < second) {
        second = total;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.gap = second - first;
  }
  return out;
}

namespace {

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>& sink) : sink_(sink) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, start);
      } else {
        auto value = fn();
        record(stage, start);
        return value;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    sink_[stage] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }

  std::map<std::string, double>& sink_;
};

}  // namespace

FitResult fit(const Network& net, int K, std::uint64_t seed, const FitOptions& opts) {
  if (K < 1) throw StageError("setup", "K must be positive");
  const NodeAttributes& attrs = net.attributes();
  if (net.n() < 1 || attrs.M() < 1) throw StageError("setup", "network needs nodes and at least one covariate");
  if ((attrs.Z.array() < 1).any()) throw StageError("setup", "covariate levels must be >= 1");

  FitResult result;
  FitDiagnostics& diag = result.diagnostics;
  StageClock clock(diag.timings_ms);

  std::vector<int> levels(static_cast<std::size_t>(attrs.M()));
  for (int m = 0; m < attrs.M(); ++m) levels[static_cast<std::size_t>(m)] = attrs.Z.col(m).maxCoeff();
  const SubcommunityIndex idx = clock.run("setup", [&] { return SubcommunityIndex(K, levels); });
  const CovariatePartition partition = partition_by_covariates(attrs);

  PerCovariateLabels labels;
  if (K == 1) {
    for (const auto& [z, nodes] : partition) {
      labels.blocks[z] = {nodes, Eigen::VectorXi::Ones(static_cast<Index>(nodes.size()))};
    }
  } else {
    Index smallest = net.n();
    for (const auto& [z, nodes] : partition) smallest = std::min<Index>(smallest, static_cast<Index>(nodes.size()));
    int d = opts.dimension.value_or(idx.size());
    if (d > smallest - 1) {
      diag.warnings.push_back("embedding dimension " + std::to_string(d) + " capped at smallest block size - 1 = " +
                              std::to_string(smallest - 1));
      d = static_cast<int>(smallest - 1);
    }
    d = std::min<int>(d, static_cast<int>(net.n()));
    if (d < 1) {
      throw StageError("embed", "a covariate configuration has too few nodes for a " + std::to_string(K) +
                                    "-community fit");
    }
    diag.embedding_dimension = d;
    const auto embedding = clock.run("embed", [&] {
      return truncated_embedding(net.adjacency(), d, opts.solver, opts.lanczos, &diag.lanczos);
    });
    if (!diag.lanczos.converged) {
      diag.warnings.push_back("Lanczos stopped at residual " + std::to_string(diag.lanczos.max_residual));
    }
    diag.embedding_eigenvalues = embedding.values;
    labels = clock.run("cluster", [&] {
      return cluster_by_covariate(embedding.X, partition, K, opts.method, derive_seed(seed, 1), opts.clustering);
    });
  }

  result.block_estimate = clock.run("estimate", [&] { return estimate_block_matrix(net, labels, idx); });
  const CanonicalPositions positions = clock.run("positions", [&] { return estimated_positions(result.block_estimate); });
  diag.signature_p = positions.p;
  diag.signature_q = positions.q;

  clock.run("match", [&] {
    for (const auto& [z, nodes] : partition) {
      const Matching m = match_to_reference(positions, idx, z);
      result.sigma_hat[z] = m.relabel;
      diag.matching_cost[z] = m.cost;
      diag.matching_gap[z] = m.gap;
    }
  });

  clock.run("compose", [&] {
    result.theta_hat.resize(net.n());
    for (const auto& [z, block] : labels.blocks) {
      const auto& relabel = result.sigma_hat.at(z);
      for (std::size_t j = 0; j < block.nodes.size(); ++j) {
        result.theta_hat(block.nodes[j]) = relabel[static_cast<std::size_t>(block.labels(static_cast<Index>(j)) - 1)];
      }
    }
  });
  return result;
}

CoefficientEstimate recover_coefficients(const BlockEstimate& est, LinkFunction link) {
  const SubcommunityIndex& idx = est.index;
  const int G = idx.size();
  if (est.matrix.rows() != G || est.matrix.cols() != G) {
    throw DimensionError("block estimate does not match its subcommunity index");
  }
  const int K = idx.K();
  const int M = idx.M();
  const int pair_params = K * (K + 1) / 2;
  const int params = pair_params + M;
  auto pair_column = [K](int k1, int k2) {
    if (k1 > k2) std::swap(k1, k2);
    // Row-major upper triangle, 0-based.
    return k1 * K - k1 * (k1 - 1) / 2 + (k2 - k1);
  };

  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (int r = 1; r <= G; ++r) {
    const auto [k1, z1] = idx.unindex(r);
    for (int s = r; s <= G; ++s) {
      const double v = est.matrix(r - 1, s - 1);
      if (!std::isfinite(v)) continue;
      if (link.kind() != LinkKind::identity && (v <= 0.0 || v >= 1.0)) continue;
      const auto [k2, z2] = idx.unindex(s);
      std::vector<double> row(static_cast<std::size_t>(params), 0.0);
      row[static_cast<std::size_t>(pair_column(k1 - 1, k2 - 1))] = 1.0;
      for (int m = 0; m < M; ++m) {
        if (z1[static_cast<std::size_t>(m)] == z2[static_cast<std::size_t>(m)]) {
          row[static_cast<std::size_t>(pair_params + m)] = 1.0;
        }
      }
      rows.push_back(std::move(row));
      rhs.push_back(link.forward(v));
    }
  }
  const Index eqs = static_cast<Index>(rows.size());
  Eigen::MatrixXd design(eqs, params);
  Eigen::VectorXd y(eqs);
  for (Index i = 0; i < eqs; ++i) {
    for (int j = 0; j < params; ++j) design(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    y(i) = rhs[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (eqs < params || qr.rank() < params) {
    throw IdentifiabilityError("coefficient system has rank " + std::to_string(eqs ? qr.rank() : 0) + " for " +
                               std::to_string(params) + " parameters");
  }
  const Eigen::VectorXd solution = qr.solve(y);

  CoefficientEstimate out;
  out.B.resize(K, K);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) out.B(k1, k2) = solution(pair_column(k1, k2));
  }
  out.beta = solution.tail(M);
  out.residual_norm = (design * solution - y).norm();
  out.equations = static_cast<int>(eqs);
  return out;
}

}  // namespace acsbm
