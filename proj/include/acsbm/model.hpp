#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "acsbm/linalg.hpp"
#include "acsbm/link.hpp"

namespace acsbm {

/// Bijection between (community k, covariate configuration z) and the
/// subcommunity index r. All three are 1-based:
///   r = Ltilde (k - 1) + sum_{m<M} [prod_{m'>m} L_m'] (z_m - 1) + z_M.
class SubcommunityIndex {
 public:
  SubcommunityIndex() = default;
  SubcommunityIndex(int K, std::vector<int> levels);

  int K() const noexcept { return K_; }
  int M() const noexcept { return static_cast<int>(levels_.size()); }
  const std::vector<int>& levels() const noexcept { return levels_; }
  int configurations() const noexcept { return l_tilde_; }  // Ltilde
  int size() const noexcept { return K_ * l_tilde_; }       // K * Ltilde

  int index(int k, const std::vector<int>& z) const;
  std::pair<int, std::vector<int>> unindex(int r) const;

  // 0-based position of configuration z among all configurations, in the
  // same lexicographic order the index map uses.
  int configuration_index(const std::vector<int>& z) const;
  std::vector<int> configuration(int c) const;
  std::vector<std::vector<int>> all_configurations() const;

 private:
  void check_configuration(const std::vector<int>& z) const;

  int K_ = 1;
  std::vector<int> levels_;
  std::vector<int> strides_;
  int l_tilde_ = 1;
};

/// Sparsity scale alpha_n = n^exponent with exponent <= 0.
struct SparsitySchedule {
  double exponent = 0.0;

  double alpha(long long n) const;
  static SparsitySchedule dense() { return {}; }
};

/// Full parameterisation of an additive-covariate SBM. B is on the link
/// scale; `attribute_pmf` is indexed by subcommunity (r - 1).
struct ModelSpec {
  int K = 1;
  std::vector<int> levels;
  Eigen::MatrixXd B;
  Eigen::VectorXd beta;
  LinkFunction link;
  Eigen::VectorXd attribute_pmf;

  int M() const noexcept { return static_cast<int>(levels.size()); }
  SubcommunityIndex index() const { return SubcommunityIndex(K, levels); }

  // Checks shapes, symmetry of B, levels >= 2 and that the pmf is a
  // distribution. Probability ranges depend on n and are checked by
  // build_tilde_B and validate_spec.
  void validate_structure() const;

  static ModelSpec make(int K, std::vector<int> levels, Eigen::MatrixXd B, Eigen::VectorXd beta,
                        LinkFunction link, std::optional<Eigen::VectorXd> pmf = std::nullopt);
};

Eigen::VectorXd uniform_pmf(int K, const std::vector<int>& levels);

/// Link-scale subcommunity matrix B (+) beta_1 I_{L_1} (+) ... (+) beta_M I_{L_M},
/// with the log-link sparsity shift log(alpha_n) folded into B.
Eigen::MatrixXd link_scale_matrix(const ModelSpec& spec, long long n, const SparsitySchedule& sched);

/// Subcommunity edge-probability matrix. Throws ModelValidityError naming
/// the first subcommunity pair whose probability leaves [0, 1].
Eigen::MatrixXd build_tilde_B(const ModelSpec& spec, long long n, const SparsitySchedule& sched);

/// Latent positions X with X I_pq X^T = tilde_B; eigenvalues with
/// |lambda| <= 1e-10 max|lambda| are dropped. Row r - 1 belongs to
/// subcommunity r.
struct CanonicalPositions {
  Eigen::MatrixXd X;
  int p = 0;
  int q = 0;
  Eigen::VectorXd eigenvalues;  // retained, descending

  int dimension() const noexcept { return p + q; }
  Eigen::MatrixXd gram() const { return X * signature_matrix(p, q) * X.transpose(); }
};

CanonicalPositions canonical_positions(const Eigen::MatrixXd& tilde_B);

std::string describe_subcommunity(const SubcommunityIndex& idx, int r);

struct ValidationReport {
  std::vector<std::string> range_violations;
  std::vector<std::string> support_gaps;  // subcommunities with zero pmf mass
  std::vector<std::string> structural_errors;
  std::optional<int> exp_B_rank;          // log link only
  bool exp_B_full_rank = true;

  bool ok() const { return range_violations.empty() && structural_errors.empty(); }
  std::vector<std::string> warnings() const;
};

ValidationReport validate_spec(const ModelSpec& spec, long long n, const SparsitySchedule& sched);

}  // namespace acsbm
