#include <doctest.h>

#include <cmath>
#include <sstream>

#include "acsbm/errors.hpp"
#include "acsbm/harness.hpp"
#include "oracles.hpp"

using namespace acsbm;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  MatrixXd B = -MatrixXd::Ones(3, 3) - 0.5 * MatrixXd::Identity(3, 3);
  VectorXd beta(2);
  beta << -0.7, 0.1;
  cfg.spec = ModelSpec::make(3, {2, 2}, B, beta, LinkFunction(LinkKind::log));
  cfg.n_values = {150, 300};
  cfg.replicates = 3;
  cfg.master_seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("misclassification examples") {
  const VectorXi t = (VectorXi(6) << 1, 1, 2, 2, 3, 3).finished();
  CHECK(misclassification(t, t, 3) == 0.0);
  const VectorXi cycled = (VectorXi(6) << 2, 2, 3, 3, 1, 1).finished();
  CHECK(misclassification(cycled, t, 3) == 0.0);
  const VectorXi one_off = (VectorXi(6) << 2, 1, 3, 3, 1, 1).finished();
  CHECK(misclassification(one_off, t, 3) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(misclassification(t.head(5), t, 3), DimensionError);
  CHECK_THROWS_AS(misclassification(t, t, 2), DomainError);
  VectorXi partial = t;
  partial(1) = 0;
  CHECK(misclassification(one_off, partial, 3) == doctest::Approx(0.0));
}

TEST_CASE("misclassification equals the exhaustive relabelling minimum") {
  CounterRng rng(81);
  for (int K = 1; K <= 6; ++K) {
    for (int trial = 0; trial < 150; ++trial) {
      VectorXi hat(30), truth(30);
      for (int i = 0; i < 30; ++i) {
        hat(i) = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
        truth(i) = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
      }
      CHECK(misclassification(hat, truth, K) == doctest::Approx(oracle::brute_misclassification(hat, truth, K)));
    }
  }
}

TEST_CASE("quantiles use linear interpolation") {
  CHECK(quantile({0.3}, 0.5) == 0.3);
  CHECK(quantile({0.3}, 0.25) == 0.3);
  CHECK(quantile({0.0, 0.5}, 0.5) == 0.25);
  CHECK(std::isnan(quantile({}, 0.5)));
  CounterRng rng(82);
  std::vector<double> v(100);
  for (double& x : v) x = rng.uniform();
  for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) CHECK(quantile(v, p) == doctest::Approx(oracle::quantile(v, p)));
}

TEST_CASE("summary per n") {
  std::vector<ReplicateRecord> recs;
  for (int r = 0; r < 4; ++r) {
    ReplicateRecord rec;
    rec.n = 100;
    rec.replicate = r;
    rec.misclassification = 0.1 * r;
    recs.push_back(rec);
  }
  ReplicateRecord failed;
  failed.n = 100;
  failed.replicate = 4;
  failed.error = "cluster: boom";
  recs.push_back(failed);
  ReplicateRecord single;
  single.n = 50;
  single.misclassification = 0.2;
  recs.push_back(single);

  const auto s = summarize(recs, 2);
  CHECK(s.worst_case == 0.5);
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].n == 50);
  CHECK(s.rows[0].median == 0.2);
  CHECK(s.rows[0].q1 == 0.2);
  CHECK(s.rows[0].q3 == 0.2);
  CHECK(s.rows[1].count == 4);
  CHECK(s.rows[1].failures == 1);
  CHECK(s.rows[1].median == doctest::Approx(0.15));
  CHECK(s.rows[1].q1 == doctest::Approx(0.075));
  CHECK(s.rows[1].q3 == doctest::Approx(0.225));
  CHECK(s.rows[1].mean == doctest::Approx(0.15));
}

TEST_CASE("csv round trip") {
  std::vector<ReplicateRecord> recs(2);
  recs[0].n = 500;
  recs[0].seed = 18446744073709551615ULL;
  recs[0].edges = 1234;
  recs[0].misclassification = 0.1 + 0.2;
  recs[0].fit_ms = 12.5;
  recs[1].n = 1000;
  recs[1].replicate = 1;
  recs[1].misclassification = 1.0 / 3.0;
  std::stringstream ss;
  write_csv(ss, recs);
  const auto back = read_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].seed == recs[0].seed);
  CHECK(back[0].misclassification == recs[0].misclassification);
  CHECK(back[0].fit_ms == 12.5);
  CHECK_FALSE(back[1].fit_ms.has_value());
  CHECK(back[1].misclassification == recs[1].misclassification);

  std::stringstream bad("n,replicate\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad), ConfigError);
  std::stringstream garbage(std::string(kCsvHeader) + "\n1,2,3,4,x,NA\n");
  CHECK_THROWS_AS(read_csv(garbage), ConfigError);
}

TEST_CASE("failures are written with quoted messages") {
  std::vector<ReplicateRecord> recs(1);
  recs[0].error = "embed: bad, \"really\"";
  std::stringstream ss;
  write_failures(ss, recs);
  CHECK(ss.str().find("\"embed: bad, \"\"really\"\"\"") != std::string::npos);
  std::stringstream csv;
  write_csv(csv, recs);
  CHECK(csv.str() == std::string(kCsvHeader) + "\n");
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.n_values = {300, 150};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.sched.exponent = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("experiment output is independent of the thread count") {
  auto cfg = small_config();
  std::stringstream a, b;
  cfg.threads = 1;
  const auto r1 = run_experiment(cfg);
  write_csv(a, r1);
  cfg.threads = 3;
  int calls = 0;
  const auto r2 = run_experiment(cfg, [&](const ReplicateRecord&) { ++calls; });
  write_csv(b, r2);
  CHECK(a.str() == b.str());
  CHECK(calls == 6);
  REQUIRE(r1.size() == 6);
  CHECK(r1[0].n == 150);
  CHECK(r1[5].n == 300);
  CHECK(r1[5].replicate == 2);
  for (const auto& r : r1) {
    CHECK(r.ok());
    CHECK(r.misclassification >= 0.0);
    CHECK(r.misclassification <= 1.0);
    CHECK_FALSE(r.fit_ms.has_value());
  }
  cfg.record_timings = true;
  CHECK(run_replicate(cfg, 150, 0).fit_ms.has_value());
}

TEST_CASE("replicate failures are recorded, not thrown") {
  auto cfg = small_config();
  // Probabilities above one at every n.
  cfg.spec.B.setConstant(0.5);
  const auto rec = run_replicate(cfg, 100, 0);
  CHECK_FALSE(rec.ok());
  const auto all = run_experiment(cfg);
  CHECK(summarize(all, 3).rows[0].failures == 3);
}
