#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acsbm/clustering.hpp"
#include "acsbm/lanczos.hpp"
#include "acsbm/model.hpp"
#include "acsbm/sampler.hpp"

namespace acsbm {

/// Estimated subcommunity edge-probability matrix together with the index
/// map that gives its rows meaning.
struct BlockEstimate {
  Eigen::MatrixXd matrix;
  SubcommunityIndex index;
};

/// Block densities after relabelling node i as subcommunity
/// theta_tilde(theta_hat_{z_i}(i), z_i).
BlockEstimate estimate_block_matrix(const Network& net, const PerCovariateLabels& labels,
                                    const SubcommunityIndex& idx);

CanonicalPositions estimated_positions(const BlockEstimate& est);

/// Reconciliation of one covariate configuration with the reference
/// configuration (1, ..., 1).
struct Matching {
  // relabel[a - 1] is the reference label given to z-label a; this is the
  // map applied to theta_hat_z when composing the final labels.
  std::vector<int> relabel;
  // Column-indexed solution of min_sigma sum_k ||X(sigma(k), z) - X(k, 1)||^2:
  // sigma[k - 1] is the z-label matched to reference label k.
  std::vector<int> sigma;
  double cost = 0.0;
  // Second-best minus best objective over all permutations (K <= 8), else NaN.
  double gap = 0.0;
};

Matching match_to_reference(const CanonicalPositions& pos, const SubcommunityIndex& idx, const std::vector<int>& z);

struct FitOptions {
  std::optional<int> dimension;  // defaults to K * Ltilde
  ClusterMethod method = ClusterMethod::gmm;
  ClusterOptions clustering;
  EigenSolverChoice solver = EigenSolverChoice::automatic;
  LanczosOptions lanczos;
};

struct FitDiagnostics {
  std::map<std::string, double> timings_ms;
  Eigen::VectorXd embedding_eigenvalues;
  int embedding_dimension = 0;
  int signature_p = 0;
  int signature_q = 0;
  std::map<std::vector<int>, double> matching_cost;
  std::map<std::vector<int>, double> matching_gap;
  LanczosInfo lanczos;
  std::vector<std::string> warnings;
};

struct FitResult {
  Eigen::VectorXi theta_hat;                      // 1..K
  std::map<std::vector<int>, std::vector<int>> sigma_hat;  // z -> relabel map (1-based images)
  BlockEstimate block_estimate;
  FitDiagnostics diagnostics;
};

/// Spectral recovery of the latent communities: embed, cluster within
/// each covariate configuration, estimate the subcommunity matrix,
/// reconcile every configuration against (1, ..., 1) and compose labels.
/// Covariate level counts are taken as the column maxima of Z.
FitResult fit(const Network& net, int K, std::uint64_t seed, const FitOptions& opts = {});

struct CoefficientEstimate {
  Eigen::MatrixXd B;
  Eigen::VectorXd beta;
  double residual_norm = 0.0;
  int equations = 0;
};

/// Ordinary least squares on the link scale: g(est) ~ B (+) beta_1 I (+) ... over
/// the K(K+1)/2 + M free parameters, one equation per unordered
/// subcommunity pair. Entries at 0 or 1 are dropped for non-identity links.
CoefficientEstimate recover_coefficients(const BlockEstimate& est, LinkFunction link);

}  // namespace acsbm
