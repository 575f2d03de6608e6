#include "acsbm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "acsbm/errors.hpp"
#include "acsbm/rng.hpp"

namespace acsbm {

CovariatePartition partition_by_covariates(const NodeAttributes& attrs) {
  CovariatePartition out;
  for (Index i = 0; i < attrs.n(); ++i) out[attrs.covariates(i)].push_back(i);
  return out;
}

ClusterMethod parse_cluster_method(std::string_view name) {
  if (name == "gmm") return ClusterMethod::gmm;
  if (name == "kmeans") return ClusterMethod::kmeans;
  throw ConfigError("unknown clustering method '" + std::string(name) + "' (expected gmm or kmeans)");
}

std::string_view to_string(ClusterMethod method) {
  return method == ClusterMethod::gmm ? "gmm" : "kmeans";
}

std::string format_configuration(const std::vector<int>& z) {
  std::ostringstream os;
  for (std::size_t m = 0; m < z.size(); ++m) os << (m ? "," : "") << z[m];
  return os.str();
}

namespace {

void check_cluster_input(const Eigen::MatrixXd& points, int K, const char* who) {
  if (K < 1) throw DomainError(std::string(who) + ": K must be positive");
  if (points.rows() < K) {
    throw DomainError(std::string(who) + ": " + std::to_string(points.rows()) + " points cannot form " +
                      std::to_string(K) + " clusters");
  }
  if (!points.allFinite()) throw DomainError(std::string(who) + ": non-finite coordinates");
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& points, int K, CounterRng& rng) {
  const Index n = points.rows();
  Eigen::MatrixXd centers(K, points.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < K; ++c) {
    const double total = d2.sum();
    Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Index i = n; i-- > 0;) {
          if (d2(i) > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a centre: choose an unused one.
      std::vector<Index> unused;
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
      }
      pick = unused[static_cast<std::size_t>(rng.below(unused.size()))];
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, int K, CounterRng& rng, int max_iterations) {
  const Index n = points.rows();
  KMeansResult res;
  res.centers = plus_plus_seeds(points, K, rng);
  Eigen::VectorXi assign = Eigen::VectorXi::Constant(n, -1);
  Eigen::VectorXd best_d2(n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < K; ++c) {
        const double d = (points.row(i) - res.centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      best_d2(i) = bd;
      if (assign(i) != best) {
        assign(i) = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    for (Index i = 0; i < n; ++i) {
      sums.row(assign(i)) += points.row(i);
      counts(assign(i)) += 1.0;
    }
    for (int c = 0; c < K; ++c) {
      if (counts(c) > 0.0) {
        res.centers.row(c) = sums.row(c) / counts(c);
        continue;
      }
      // Empty cluster: move it onto the point worst served by its centre.
      Index far = 0;
      best_d2.maxCoeff(&far);
      res.centers.row(c) = points.row(far);
      best_d2(far) = 0.0;
      assign(far) = c;
    }
  }
  res.within_ss = 0.0;
  for (Index i = 0; i < n; ++i) res.within_ss += (points.row(i) - res.centers.row(assign(i))).squaredNorm();
  res.labels = assign.array() + 1;
  return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int K, std::uint64_t seed, const KMeansOptions& opts) {
  check_cluster_input(points, K, "kmeans");
  const CounterRng root(seed);
  KMeansResult best;
  best.within_ss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(r));
    KMeansResult run = lloyd(points, K, rng, opts.max_iterations);
    if (run.within_ss < best.within_ss) best = std::move(run);
  }
  return best;
}

namespace {

struct GmmState {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  std::vector<Eigen::MatrixXd> covariances;
};

void m_step(const Eigen::MatrixXd& points, const Eigen::MatrixXd& resp, double ridge, GmmState& state) {
  const Index n = points.rows();
  const Index d = points.cols();
  const Index K = resp.cols();
  const Eigen::VectorXd mass = resp.colwise().sum().transpose();
  state.weights = mass / static_cast<double>(n);
  if (state.means.rows() != K) state.means = Eigen::MatrixXd::Zero(K, d);
  state.covariances.resize(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    auto& cov = state.covariances[static_cast<std::size_t>(k)];
    if (mass(k) <= 1e-10) {
      cov = ridge * Eigen::MatrixXd::Identity(d, d);
      continue;
    }
    state.means.row(k) = (resp.col(k).transpose() * points) / mass(k);
    const Eigen::MatrixXd centred = points.rowwise() - state.means.row(k);
    cov = (centred.transpose() * resp.col(k).asDiagonal() * centred) / mass(k);
    cov = (cov + cov.transpose()) / 2.0;
    cov.diagonal().array() += ridge;
  }
}

// Fills log(weight_k * N(x_i | k)) and returns the total log-likelihood.
double e_step(const Eigen::MatrixXd& points, const GmmState& state, Eigen::MatrixXd& log_resp) {
  const Index n = points.rows();
  const Index d = points.cols();
  const Index K = state.means.rows();
  constexpr double kLog2Pi = 1.8378770664093453;
  log_resp.resize(n, K);
  for (Index k = 0; k < K; ++k) {
    const auto& cov = state.covariances[static_cast<std::size_t>(k)];
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("gmm_em: covariance is not positive definite");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::MatrixXd centred = (points.rowwise() - state.means.row(k)).transpose();
    const Eigen::MatrixXd solved = llt.matrixL().solve(centred);
    const Eigen::VectorXd maha = solved.colwise().squaredNorm().transpose();
    const double log_w = state.weights(k) > 0.0 ? std::log(state.weights(k)) : -std::numeric_limits<double>::infinity();
    log_resp.col(k) = (-0.5 * (maha.array() + log_det + static_cast<double>(d) * kLog2Pi) + log_w).matrix();
  }
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double top = log_resp.row(i).maxCoeff();
    const double lse = top + std::log((log_resp.row(i).array() - top).exp().sum());
    log_resp.row(i).array() -= lse;
    total += lse;
  }
  return total;
}

}  // namespace

GmmResult gmm_em(const Eigen::MatrixXd& points, int K, std::uint64_t seed, const GmmOptions& opts) {
  check_cluster_input(points, K, "gmm_em");
  const Index n = points.rows();
  const Index d = points.cols();
  const Eigen::RowVectorXd centre = points.colwise().mean();
  const double spread = (points.rowwise() - centre).squaredNorm() / static_cast<double>(n);
  double ridge = opts.ridge_factor * spread / static_cast<double>(std::max<Index>(d, 1));
  if (!(ridge > 0.0)) ridge = opts.ridge_factor;

  const CounterRng root(seed);
  GmmResult best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(r));
    const KMeansResult init = lloyd(points, K, rng, opts.max_iterations);
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, K);
    for (Index i = 0; i < n; ++i) resp(i, init.labels(i) - 1) = 1.0;
    GmmState state;
    state.means = init.centers;
    m_step(points, resp, ridge, state);

    GmmResult run;
    Eigen::MatrixXd log_resp;
    double previous = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      const double ll = e_step(points, state, log_resp);
      run.trace.push_back(ll);
      run.iterations = iter + 1;
      if (std::isfinite(previous) && std::abs(ll - previous) <= opts.tolerance * std::abs(previous)) {
        run.converged = true;
        break;
      }
      previous = ll;
      resp = log_resp.array().exp();
      m_step(points, resp, ridge, state);
    }
    run.log_likelihood = run.trace.back();
    run.labels.resize(n);
    for (Index i = 0; i < n; ++i) {
      Index arg = 0;
      log_resp.row(i).maxCoeff(&arg);
      run.labels(i) = static_cast<int>(arg) + 1;
    }
    run.weights = state.weights;
    run.means = state.means;
    run.covariances = state.covariances;
    if (run.log_likelihood > best.log_likelihood) best = std::move(run);
  }
  return best;
}

Eigen::VectorXi PerCovariateLabels::per_node(Index n) const {
  Eigen::VectorXi out = Eigen::VectorXi::Zero(n);
  for (const auto& [z, block] : blocks) {
    for (std::size_t j = 0; j < block.nodes.size(); ++j) {
      if (block.nodes[j] < 0 || block.nodes[j] >= n) throw DomainError("labelled node outside the network");
      out(block.nodes[j]) = block.labels(static_cast<Index>(j));
    }
  }
  return out;
}

PerCovariateLabels cluster_by_covariate(const Eigen::MatrixXd& embedding, const CovariatePartition& partition,
                                        int K, ClusterMethod method, std::uint64_t seed,
                                        const ClusterOptions& opts) {
  PerCovariateLabels out;
  std::uint64_t ordinal = 0;
  for (const auto& [z, nodes] : partition) {
    const std::uint64_t block_seed = derive_seed(seed, ordinal++);
    if (static_cast<int>(nodes.size()) < K) {
      throw DomainError("covariate configuration (" + format_configuration(z) + ") has " +
                        std::to_string(nodes.size()) + " nodes, fewer than K = " + std::to_string(K));
    }
    auto& block = out.blocks[z];
    block.nodes = nodes;
    if (K == 1) {
      block.labels = Eigen::VectorXi::Ones(static_cast<Index>(nodes.size()));
      continue;
    }
    Eigen::MatrixXd rows(static_cast<Index>(nodes.size()), embedding.cols());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (nodes[j] < 0 || nodes[j] >= embedding.rows()) throw DomainError("partition references a missing node");
      rows.row(static_cast<Index>(j)) = embedding.row(nodes[j]);
    }
    block.labels = method == ClusterMethod::gmm ? gmm_em(rows, K, block_seed, opts.gmm).labels
                                                 : kmeans(rows, K, block_seed, opts.kmeans).labels;
  }
  return out;
}

}  // namespace acsbm
