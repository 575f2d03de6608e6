// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "acsbm/assignment.hpp"
#include "acsbm/harness.hpp"
#include "acsbm/linalg.hpp"
#include "acsbm/pipeline.hpp"
#include "oracles.hpp"

using namespace acsbm;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

ModelSpec dense_spec(LinkKind kind) {
  MatrixXd B;
  VectorXd beta(2);
  if (kind == LinkKind::identity) {
    B = 0.2 * MatrixXd::Ones(3, 3) - 0.1 * MatrixXd::Identity(3, 3);
    beta << 0.05, -0.05;
  } else {
    B = -MatrixXd::Ones(3, 3) - 0.5 * MatrixXd::Identity(3, 3);
    beta << -0.7, 0.1;
  }
  return ModelSpec::make(3, {2, 2}, B, beta, LinkFunction(kind));
}

ModelSpec sparse_regular_spec() {
  VectorXd beta(2);
  beta << 1.0, -0.5;
  return ModelSpec::make(2, {2, 2}, 1.5 * MatrixXd::Ones(2, 2) - MatrixXd::Identity(2, 2), beta,
                         LinkFunction(LinkKind::log));
}

std::map<long long, double> medians(const ExperimentConfig& cfg, std::string& failures) {
  const auto records = run_experiment(cfg);
  std::map<long long, double> out;
  for (const auto& row : summarize(records, cfg.spec.K).rows) {
    out[row.n] = row.median;
    if (row.failures > 0) failures += " n=" + std::to_string(row.n) + " failures=" + std::to_string(row.failures);
  }
  return out;
}

ExperimentConfig experiment(const ModelSpec& spec, SparsitySchedule sched, std::vector<long long> n_values) {
  ExperimentConfig cfg;
  cfg.spec = spec;
  cfg.sched = sched;
  cfg.n_values = std::move(n_values);
  cfg.replicates = 20;
  cfg.method = ClusterMethod::gmm;
  cfg.master_seed = kSeed;
  cfg.threads = workers();
  return cfg;
}

// Dense runs at n = 500 and 2000 per link, shared by criteria 1 and 2.
std::map<LinkKind, std::map<long long, double>> dense_medians;
std::map<LinkKind, std::string> dense_failures;

void run_dense() {
  for (auto kind : {LinkKind::identity, LinkKind::log, LinkKind::logit, LinkKind::probit}) {
    dense_medians[kind] = medians(experiment(dense_spec(kind), {}, {500, 2000}), dense_failures[kind]);
  }
}

Outcome dense_recovery() {
  const double med = dense_medians.at(LinkKind::log).at(2000);
  return {med <= 0.01, "log link n=2000 median=" + fmt(med) + " (<= 0.01)" + dense_failures.at(LinkKind::log)};
}

Outcome dense_trend() {
  bool ok = true;
  std::string detail;
  const double worst = 1.0 - 1.0 / 3.0;
  for (auto kind : {LinkKind::identity, LinkKind::log, LinkKind::logit, LinkKind::probit}) {
    const double small = dense_medians.at(kind).at(500);
    const double large = dense_medians.at(kind).at(2000);
    const bool here = large < small && small < worst;
    ok = ok && here;
    detail += std::string(LinkFunction(kind).name()) + ": " + fmt(large) + " < " + fmt(small) + " < " + fmt(worst) +
              (here ? "" : " [no]") + dense_failures.at(kind) + "; ";
  }
  return {ok, detail};
}

Outcome sparse_trend() {
  std::string failures;
  const auto med = medians(experiment(sparse_regular_spec(), {-0.8}, {1000, 4000, 16000}), failures);
  const double a = med.at(1000), b = med.at(4000), c = med.at(16000);
  return {a > b && b > c && c <= 0.05,
          "medians n=1000,4000,16000: " + fmt(a) + ", " + fmt(b) + ", " + fmt(c) + " (strictly decreasing, last <= 0.05)" +
              failures};
}

ModelSpec any_random_spec(CounterRng& rng, int trial) {
  return oracle::random_spec(rng, static_cast<LinkKind>(trial % 4));
}

Outcome representation() {
  CounterRng rng(kSeed ^ 4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelSpec spec = any_random_spec(rng, trial);
    const double exponent = trial % 2 ? -0.25 : 0.0;
    const long long n = 1000;
    const MatrixXd t = build_tilde_B(spec, n, SparsitySchedule{exponent});
    const SubcommunityIndex idx = spec.index();
    for (const auto& z1 : oracle::configurations(spec.levels))
      for (const auto& z2 : oracle::configurations(spec.levels))
        for (int k1 = 1; k1 <= spec.K; ++k1)
          for (int k2 = 1; k2 <= spec.K; ++k2) {
            const double want = oracle::pair_probability(spec, n, exponent, k1, z1, k2, z2);
            worst = std::max(worst, std::abs(t(idx.index(k1, z1) - 1, idx.index(k2, z2) - 1) - want));
          }
  }
  return {worst <= 1e-12, "max |lookup - pairwise definition| = " + fmt(worst) + " over 100 specs (<= 1e-12)"};
}

Outcome gram_identity() {
  CounterRng rng(kSeed ^ 5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd t = build_tilde_B(any_random_spec(rng, trial), 500, SparsitySchedule::dense());
    const auto pos = canonical_positions(t);
    const MatrixXd rebuilt = pos.X * signature_matrix(pos.p, pos.q) * pos.X.transpose();
    worst = std::max(worst, (rebuilt - t).norm());
  }
  return {worst <= 1e-10, "max Frobenius error = " + fmt(worst) + " over 100 specs (<= 1e-10)"};
}

Outcome matching_oracle() {
  CounterRng rng(kSeed ^ 6);
  int identity_failures = 0, composition_failures = 0, configurations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelSpec spec = oracle::random_full_rank_log_spec(rng);
    const SubcommunityIndex idx = spec.index();
    const auto pos = canonical_positions(build_tilde_B(spec, 1000, SparsitySchedule::dense()));
    std::vector<int> identity(static_cast<std::size_t>(spec.K));
    std::iota(identity.begin(), identity.end(), 1);

    std::map<std::vector<int>, std::vector<int>> tau;
    for (const auto& z : idx.all_configurations()) tau[z] = oracle::random_permutation(rng, spec.K);
    CanonicalPositions shuffled = pos;
    for (const auto& [z, t] : tau)
      for (int k = 1; k <= spec.K; ++k)
        shuffled.X.row(idx.index(t[static_cast<std::size_t>(k - 1)], z) - 1) = pos.X.row(idx.index(k, z) - 1);
    const auto& tau_ref = tau.at(std::vector<int>(static_cast<std::size_t>(idx.M()), 1));

    for (const auto& z : idx.all_configurations()) {
      ++configurations;
      if (match_to_reference(pos, idx, z).relabel != identity) ++identity_failures;
      // Community k carries label tau_z(k) in configuration z; composing must
      // give every node the reference configuration's label tau_ref(k).
      const Matching m = match_to_reference(shuffled, idx, z);
      for (int k = 1; k <= spec.K; ++k) {
        const int label = tau.at(z)[static_cast<std::size_t>(k - 1)];
        if (m.relabel[static_cast<std::size_t>(label - 1)] != tau_ref[static_cast<std::size_t>(k - 1)]) {
          ++composition_failures;
          break;
        }
      }
    }
  }
  return {identity_failures == 0 && composition_failures == 0,
          std::to_string(configurations) + " configurations over 100 specs: non-identity matches=" +
              std::to_string(identity_failures) + ", composition mismatches=" + std::to_string(composition_failures)};
}

MatrixXd random_orthogonal(CounterRng& rng, int n) {
  MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  return Eigen::HouseholderQR<MatrixXd>(g).householderQ();
}

Outcome matrix_identities() {
  CounterRng rng(kSeed ^ 7);
  std::map<std::string, double> worst;
  auto note = [&](const std::string& name, double err) { worst[name] = std::max(worst[name], err); };
  int strict_failures = 0, inequality_failures = 0;

  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const MatrixXd a = oracle::random_symmetric(rng, n, -1, 1);
    const MatrixXd b = oracle::random_symmetric(rng, n, -1, 1);
    const MatrixXd abs_a = matrix_abs(a);

    // |A| is the PSD square root of A^T A.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(abs_a);
    note("psd square root", std::max((abs_a * abs_a - a.transpose() * a).norm(), std::max(0.0, -es.eigenvalues().minCoeff())));
    // From an SVD A = U S V^T of symmetric A, |A| = U S U^T.
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    note("svd form", (abs_a - svd.matrixU() * svd.singularValues().asDiagonal() * svd.matrixU().transpose()).norm());
    // A = X D X^T with orthogonal columns and D = diag(+-1) gives |A| = X X^T.
    const auto pos = canonical_positions(a);
    note("gram form", (abs_a - pos.X * pos.X.transpose()).norm());
    // Orthogonal conjugation commutes with |.|.
    const MatrixXd u = random_orthogonal(rng, n);
    note("orthogonal conjugation", (matrix_abs(MatrixXd(u * a * u.transpose())) - u * abs_a * u.transpose()).norm());
    // |c 11^T + d I| = c' 11^T + d' I.
    const double c = oracle::uniform(rng, -2, 2), d = oracle::uniform(rng, -2, 2);
    const MatrixXd ones = MatrixXd::Ones(n, n), eye = MatrixXd::Identity(n, n);
    const double c2 = (std::abs(c * n + d) - std::abs(d)) / n;
    note("constant plus identity", (matrix_abs(MatrixXd(c * ones + d * eye)) - (c2 * ones + std::abs(d) * eye)).norm());
    // Entrywise positive c 11^T + d I has entrywise positive |.|.
    const double dp = oracle::uniform(rng, -1, 1);
    const double cp = std::abs(dp) + oracle::uniform(rng, 0.01, 1);
    const MatrixXd pos_abs = matrix_abs(MatrixXd(cp * ones + dp * eye));
    note("positive entries stay positive", pos_abs.minCoeff() > 0.0 ? 0.0 : 1.0);
    // Perturbation bound.
    note("perturbation bound",
         std::max(0.0, (matrix_abs(a) - matrix_abs(b)).norm() - std::sqrt(2.0) * (a - b).norm()));
    // Entrywise exp of a boxplus is a Kronecker product.
    const int m = 2 + static_cast<int>(rng.below(3));
    const MatrixXd s = oracle::random_symmetric(rng, m, -1, 1);
    note("exp of boxplus", (MatrixXd(boxplus(a, s).array().exp()) - kron(MatrixXd(a.array().exp()), MatrixXd(s.array().exp())))
                               .cwiseAbs()
                               .maxCoeff());
    // Kronecker products of symmetric matrices are symmetric, and |.| factorises.
    const MatrixXd ks = kron(a, s);
    note("symmetric Kronecker", (ks - ks.transpose()).norm());
    note("abs of Kronecker", (matrix_abs(ks) - kron(abs_a, matrix_abs(s))).norm());
    // sum_i x_i x_sigma(i) <= sum_i x_i^2.
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.normal();
    const auto perm = oracle::random_permutation(rng, n);
    double cross = 0.0;
    for (int i = 0; i < n; ++i) cross += x(i) * x(perm[static_cast<std::size_t>(i)] - 1);
    if (cross > x.squaredNorm() + 1e-12) ++inequality_failures;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(6));
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    const MatrixXd psd = g * g.transpose() + 1e-3 * MatrixXd::Identity(n, n);
    std::vector<int> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), 0);
    if (solve_assignment(-psd).permutation != identity) ++strict_failures;
  }

  bool ok = strict_failures == 0 && inequality_failures == 0;
  std::string detail;
  for (const auto& [name, err] : worst) {
    ok = ok && err <= 1e-9;
    detail += name + "=" + fmt(err) + "; ";
  }
  detail += "permuted products violations=" + std::to_string(inequality_failures) +
            "; PSD assignment non-identity=" + std::to_string(strict_failures) + "/200";
  return {ok, detail};
}

Outcome estimator_consistency() {
  const ModelSpec spec = dense_spec(LinkKind::log);
  const SubcommunityIndex idx = spec.index();
  std::map<long long, double> med;
  for (long long n : {1000LL, 4000LL}) {
    const MatrixXd truth = build_tilde_B(spec, n, SparsitySchedule::dense());
    std::vector<double> errors;
    for (int r = 0; r < 20; ++r) {
      const std::uint64_t seed = replicate_seed(kSeed, n, r);
      const auto attrs = sample_attributes(spec, n, derive_seed(seed, 0));
      const Network net = sample_network(spec, attrs, SparsitySchedule::dense(), derive_seed(seed, 1));
      PerCovariateLabels labels;
      for (const auto& [z, nodes] : partition_by_covariates(attrs)) {
        auto& block = labels.blocks[z];
        block.nodes = nodes;
        block.labels.resize(static_cast<Index>(nodes.size()));
        for (std::size_t j = 0; j < nodes.size(); ++j) block.labels(static_cast<Index>(j)) = attrs.theta(nodes[j]);
      }
      errors.push_back((estimate_block_matrix(net, labels, idx).matrix - truth).norm());
    }
    med[n] = quantile(errors, 0.5);
  }
  return {med[4000] < med[1000], "median Frobenius error n=1000: " + fmt(med[1000]) + ", n=4000: " + fmt(med[4000])};
}

Outcome brute_force_equivalence() {
  CounterRng rng(kSeed ^ 9);
  int assignment_bad = 0, misclass_bad = 0;
  for (int K = 1; K <= 6; ++K) {
    for (int trial = 0; trial < 1000; ++trial) {
      MatrixXd c(K, K);
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) c(i, j) = trial % 4 == 0 ? static_cast<double>(rng.below(3)) : rng.normal();
      const double brute = oracle::brute_assignment(c);
      if (std::abs(solve_assignment(c).cost - brute) > 1e-10 * std::max(1.0, std::abs(brute))) ++assignment_bad;

      const int n = 5 + static_cast<int>(rng.below(40));
      VectorXi hat(n), truth(n);
      for (int i = 0; i < n; ++i) {
        truth(i) = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
        hat(i) = rng.uniform() < 0.6 ? truth(i) : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
        if (trial % 2) hat(i) = K + 1 - hat(i);
      }
      if (std::abs(misclassification(hat, truth, K) - oracle::brute_misclassification(hat, truth, K)) > 1e-12) {
        ++misclass_bad;
      }
    }
  }
  return {assignment_bad == 0 && misclass_bad == 0,
          "K=1..6 x 1000: assignment mismatches=" + std::to_string(assignment_bad) +
              ", misclassification mismatches=" + std::to_string(misclass_bad)};
}

Outcome determinism() {
  ExperimentConfig cfg = experiment(dense_spec(LinkKind::log), {}, {150, 300, 600});
  cfg.replicates = 4;
  std::vector<std::string> outputs;
  for (int threads : {1, 1, 4, 4}) {
    cfg.threads = threads;
    std::ostringstream out;
    write_csv(out, run_experiment(cfg));
    outputs.push_back(out.str());
  }
  const bool same = std::all_of(outputs.begin(), outputs.end(), [&](const std::string& s) { return s == outputs[0]; });
  return {same, "4 runs (threads 1,1,4,4), " + std::to_string(outputs[0].size()) + " bytes each, identical=" +
                    (same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dense-regime recovery", dense_recovery},
      {"trend across four links", dense_trend},
      {"sparse-regime trend", sparse_trend},
      {"representation equivalence", representation},
      {"indefinite gram identity", gram_identity},
      {"matching oracle", matching_oracle},
      {"matrix identity suite", matrix_identities},
      {"estimator consistency direction", estimator_consistency},
      {"brute-force equivalence", brute_force_equivalence},
      {"determinism", determinism},
  };

  const auto start = std::chrono::steady_clock::now();
  run_dense();
  std::printf("dense runs finished in %.1f s\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu (%s): %s  %s  [%.1f s]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
