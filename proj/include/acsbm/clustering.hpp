#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "acsbm/sampler.hpp"

namespace acsbm {

/// Node indices (0-based, ascending) sharing each full covariate vector z.
/// Keys are ordered lexicographically, i.e. in subcommunity-index order.
using CovariatePartition = std::map<std::vector<int>, std::vector<Index>>;

CovariatePartition partition_by_covariates(const NodeAttributes& attrs);

enum class ClusterMethod { gmm, kmeans };

ClusterMethod parse_cluster_method(std::string_view name);
std::string_view to_string(ClusterMethod method);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KMeansResult {
  Eigen::VectorXi labels;  // 1..K
  Eigen::MatrixXd centers; // K x d
  double within_ss = 0.0;
};

/// Lloyd's algorithm from k-means++ seeds; the best of `restarts` runs by
/// within-cluster sum of squares. Rows of `points` are observations.
KMeansResult kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed, const KMeansOptions& opts = {});

struct GmmOptions {
  int restarts = 10;
  int max_iterations = 300;
  double tolerance = 1e-6;  // relative change in log-likelihood
  double ridge_factor = 1e-6;  // ridge = factor * trace(sample covariance) / d
};

struct GmmResult {
  Eigen::VectorXi labels;  // hard assignment by maximum responsibility, 1..K
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;   // K x d
  std::vector<Eigen::MatrixXd> covariances;
  double log_likelihood = 0.0;
  std::vector<double> trace;  // log-likelihood after each E-step of the chosen run
  int iterations = 0;
  bool converged = false;
};

/// Full-covariance Gaussian mixture fitted by EM, initialised from a single
/// k-means++ / Lloyd run per restart. Keeps the restart with the highest
/// final log-likelihood.
GmmResult gmm_em(const Eigen::MatrixXd& points, int K, std::uint64_t seed, const GmmOptions& opts = {});

struct ClusterOptions {
  KMeansOptions kmeans;
  GmmOptions gmm;
};

/// theta_hat_z for every covariate block: `labels(j)` (1..K) belongs to
/// node `nodes[j]`.
struct PerCovariateLabels {
  struct Block {
    std::vector<Index> nodes;
    Eigen::VectorXi labels;
  };
  std::map<std::vector<int>, Block> blocks;

  // One label per node of an n-node network; nodes in no block get 0.
  Eigen::VectorXi per_node(Index n) const;
};

PerCovariateLabels cluster_by_covariate(const Eigen::MatrixXd& embedding, const CovariatePartition& partition,
                                        int K, ClusterMethod method, std::uint64_t seed,
                                        const ClusterOptions& opts = {});

std::string format_configuration(const std::vector<int>& z);

}  // namespace acsbm
