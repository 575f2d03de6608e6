#include "acsbm/model.hpp"

#include <cmath>
#include <sstream>

#include "acsbm/errors.hpp"

namespace acsbm {

SubcommunityIndex::SubcommunityIndex(int K, std::vector<int> levels) : K_(K), levels_(std::move(levels)) {
  if (K_ < 1) throw DomainError("SubcommunityIndex: K must be positive");
  if (levels_.empty()) throw DomainError("SubcommunityIndex: at least one covariate is required");
  strides_.assign(levels_.size(), 1);
  l_tilde_ = 1;
  for (std::size_t m = levels_.size(); m-- > 0;) {
    if (levels_[m] < 1) throw DomainError("SubcommunityIndex: covariate levels must be >= 1");
    strides_[m] = l_tilde_;
    l_tilde_ *= levels_[m];
  }
}

void SubcommunityIndex::check_configuration(const std::vector<int>& z) const {
  if (z.size() != levels_.size()) {
    throw DomainError("covariate vector has " + std::to_string(z.size()) + " entries, expected " +
                      std::to_string(levels_.size()));
  }
  for (std::size_t m = 0; m < z.size(); ++m) {
    if (z[m] < 1 || z[m] > levels_[m]) {
      throw DomainError("covariate " + std::to_string(m + 1) + " level " + std::to_string(z[m]) +
                        " outside [1, " + std::to_string(levels_[m]) + "]");
    }
  }
}

int SubcommunityIndex::configuration_index(const std::vector<int>& z) const {
  check_configuration(z);
  int c = 0;
  for (std::size_t m = 0; m < z.size(); ++m) c += strides_[m] * (z[m] - 1);
  return c;
}

std::vector<int> SubcommunityIndex::configuration(int c) const {
  if (c < 0 || c >= l_tilde_) throw DomainError("configuration index out of range");
  std::vector<int> z(levels_.size());
  for (std::size_t m = 0; m < levels_.size(); ++m) {
    z[m] = c / strides_[m] + 1;
    c %= strides_[m];
  }
  return z;
}

std::vector<std::vector<int>> SubcommunityIndex::all_configurations() const {
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(l_tilde_));
  for (int c = 0; c < l_tilde_; ++c) out.push_back(configuration(c));
  return out;
}

int SubcommunityIndex::index(int k, const std::vector<int>& z) const {
  if (k < 1 || k > K_) {
    throw DomainError("community label " + std::to_string(k) + " outside [1, " + std::to_string(K_) + "]");
  }
  return l_tilde_ * (k - 1) + configuration_index(z) + 1;
}

std::pair<int, std::vector<int>> SubcommunityIndex::unindex(int r) const {
  if (r < 1 || r > size()) {
    throw DomainError("subcommunity " + std::to_string(r) + " outside [1, " + std::to_string(size()) + "]");
  }
  return {(r - 1) / l_tilde_ + 1, configuration((r - 1) % l_tilde_)};
}

double SparsitySchedule::alpha(long long n) const {
  if (exponent > 0.0) throw DomainError("sparsity exponent must be <= 0");
  if (n < 1) throw DomainError("node count must be positive");
  return std::pow(static_cast<double>(n), exponent);
}

Eigen::VectorXd uniform_pmf(int K, const std::vector<int>& levels) {
  const int cells = SubcommunityIndex(K, levels).size();
  return Eigen::VectorXd::Constant(cells, 1.0 / cells);
}

void ModelSpec::validate_structure() const {
  if (K < 1) throw ConfigError("K must be positive");
  if (levels.empty()) throw ConfigError("at least one covariate is required");
  for (int l : levels) {
    if (l < 2) throw ConfigError("every covariate needs at least 2 levels");
  }
  if (B.rows() != K || B.cols() != K) {
    throw DimensionError("B must be " + std::to_string(K) + "x" + std::to_string(K));
  }
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff())) {
    throw ConfigError("B must be symmetric");
  }
  if (!B.allFinite() || !beta.allFinite()) throw ConfigError("B and beta must be finite");
  if (beta.size() != M()) {
    throw DimensionError("beta has " + std::to_string(beta.size()) + " entries, expected " + std::to_string(M()));
  }
  const int cells = index().size();
  if (attribute_pmf.size() != cells) {
    throw DimensionError("attribute pmf has " + std::to_string(attribute_pmf.size()) +
                         " entries, expected K*Ltilde = " + std::to_string(cells));
  }
  if (!attribute_pmf.allFinite() || (attribute_pmf.array() < 0.0).any()) {
    throw ConfigError("attribute pmf entries must be nonnegative");
  }
  if (std::abs(attribute_pmf.sum() - 1.0) > 1e-12) {
    throw ConfigError("attribute pmf must sum to 1");
  }
}

ModelSpec ModelSpec::make(int K, std::vector<int> levels, Eigen::MatrixXd B, Eigen::VectorXd beta,
                          LinkFunction link, std::optional<Eigen::VectorXd> pmf) {
  ModelSpec spec;
  spec.K = K;
  spec.levels = std::move(levels);
  spec.B = std::move(B);
  spec.beta = std::move(beta);
  spec.link = link;
  if (K >= 1 && !spec.levels.empty()) {
    bool positive = true;
    for (int l : spec.levels) positive = positive && l >= 1;
    if (positive) spec.attribute_pmf = pmf ? *pmf : uniform_pmf(K, spec.levels);
  }
  spec.validate_structure();
  return spec;
}

Eigen::MatrixXd link_scale_matrix(const ModelSpec& spec, long long n, const SparsitySchedule& sched) {
  Eigen::MatrixXd scale = spec.B;
  if (spec.link.kind() == LinkKind::log) scale.array() += std::log(sched.alpha(n));
  for (int m = 0; m < spec.M(); ++m) {
    const Eigen::MatrixXd homophily =
        spec.beta(m) * Eigen::MatrixXd::Identity(spec.levels[static_cast<std::size_t>(m)],
                                                 spec.levels[static_cast<std::size_t>(m)]);
    scale = boxplus(scale, homophily);
  }
  return scale;
}

std::string describe_subcommunity(const SubcommunityIndex& idx, int r) {
  const auto [k, z] = idx.unindex(r);
  std::ostringstream os;
  os << "(k=" << k << ", z=(";
  for (std::size_t m = 0; m < z.size(); ++m) os << (m ? "," : "") << z[m];
  os << "))";
  return os.str();
}

namespace {

Eigen::MatrixXd probabilities(const ModelSpec& spec, long long n, const SparsitySchedule& sched) {
  const Eigen::MatrixXd scale = link_scale_matrix(spec, n, sched);
  const LinkFunction link = spec.link;
  Eigen::MatrixXd p = scale.unaryExpr([link](double x) { return link.inverse(x); });
  if (link.kind() != LinkKind::log) p *= sched.alpha(n);
  return p;
}

std::vector<std::string> range_violations(const ModelSpec& spec, const Eigen::MatrixXd& p) {
  std::vector<std::string> out;
  const SubcommunityIndex idx = spec.index();
  for (Index j = 0; j < p.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = p(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "probability " << v << " for subcommunity pair "
           << describe_subcommunity(idx, static_cast<int>(i) + 1) << "-"
           << describe_subcommunity(idx, static_cast<int>(j) + 1) << " outside [0, 1]";
        out.push_back(os.str());
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd build_tilde_B(const ModelSpec& spec, long long n, const SparsitySchedule& sched) {
  spec.validate_structure();
  Eigen::MatrixXd p = probabilities(spec, n, sched);
  const auto bad = range_violations(spec, p);
  if (!bad.empty()) throw ModelValidityError(bad.front());
  return p;
}

CanonicalPositions canonical_positions(const Eigen::MatrixXd& tilde_B) {
  const auto eig = sym_eig(tilde_B);
  CanonicalPositions out;
  const double top = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-10 * top;
  std::vector<Index> kept;
  for (Index j = 0; j < eig.values.size(); ++j) {
    const double v = eig.values(j);
    if (v > tol) {
      ++out.p;
      kept.push_back(j);
    } else if (v < -tol) {
      ++out.q;
      kept.push_back(j);
    }
  }
  // Already in descending signed order: positives first, then negatives.
  out.X.resize(tilde_B.rows(), static_cast<Index>(kept.size()));
  out.eigenvalues.resize(static_cast<Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const double v = eig.values(kept[c]);
    out.eigenvalues(static_cast<Index>(c)) = v;
    out.X.col(static_cast<Index>(c)) = eig.vectors.col(kept[c]) * std::sqrt(std::abs(v));
  }
  return out;
}

std::vector<std::string> ValidationReport::warnings() const {
  std::vector<std::string> out;
  if (exp_B_rank && !exp_B_full_rank) {
    out.push_back("exp(B) has rank " + std::to_string(*exp_B_rank) +
                  "; latent communities may not be separable after reconciliation");
  }
  for (const auto& gap : support_gaps) out.push_back("attribute pmf assigns zero mass to " + gap);
  return out;
}

ValidationReport validate_spec(const ModelSpec& spec, long long n, const SparsitySchedule& sched) {
  ValidationReport report;
  try {
    spec.validate_structure();
    if (n < 1) throw DomainError("node count must be positive");
    if (sched.exponent > 0.0) throw DomainError("sparsity exponent must be <= 0");
  } catch (const std::exception& e) {
    report.structural_errors.emplace_back(e.what());
    return report;
  }
  report.range_violations = range_violations(spec, probabilities(spec, n, sched));
  if (spec.link.kind() == LinkKind::log) {
    const Eigen::MatrixXd expB = spec.B.array().exp().matrix();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(expB);
    report.exp_B_rank = static_cast<int>(lu.rank());
    report.exp_B_full_rank = lu.rank() == spec.K;
  }
  const SubcommunityIndex idx = spec.index();
  for (int r = 1; r <= idx.size(); ++r) {
    if (spec.attribute_pmf(r - 1) <= 0.0) report.support_gaps.push_back(describe_subcommunity(idx, r));
  }
  return report;
}

}  // namespace acsbm
