#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "acsbm/errors.hpp"
#include "acsbm/io.hpp"

using namespace acsbm;
using Eigen::MatrixXd;
using Eigen::VectorXi;

namespace {

const char* kSpec = R"({
  "K": 3, "levels": [2, 2],
  "B": [[-1.5, -1, -1], [-1, -1.5, -1], [-1, -1, -1.5]],
  "beta": [-0.7, 0.1], "link": "log", "alpha_exponent": 0, "pmf": "uniform"
})";

}  // namespace

TEST_CASE("spec documents parse and round trip") {
  const SpecDocument doc = parse_spec(Json::parse(kSpec));
  CHECK(doc.spec.K == 3);
  CHECK(doc.spec.levels == std::vector<int>{2, 2});
  CHECK(doc.spec.B(0, 0) == -1.5);
  CHECK(doc.spec.beta(0) == -0.7);
  CHECK(doc.spec.link.kind() == LinkKind::log);
  CHECK(doc.sparsity.exponent == 0.0);
  CHECK(doc.spec.attribute_pmf.size() == 12);

  const SpecDocument back = parse_spec(to_json(doc));
  CHECK(back.spec.B == doc.spec.B);
  CHECK(back.spec.beta == doc.spec.beta);
  CHECK(back.spec.attribute_pmf == doc.spec.attribute_pmf);
}

TEST_CASE("pmf may be nested by community") {
  Json j = Json::parse(kSpec);
  j["K"] = 1;
  j["B"] = {{-1.0}};
  j["pmf"] = {{0.1, 0.2, 0.3, 0.4}};
  const auto doc = parse_spec(j);
  CHECK(doc.spec.attribute_pmf(3) == 0.4);
  j["pmf"] = {0.4, 0.3, 0.2, 0.1};
  CHECK(parse_spec(j).spec.attribute_pmf(0) == 0.4);
}

TEST_CASE("bad spec documents are config errors") {
  auto with = [](const char* key, Json value) {
    Json j = Json::parse(kSpec);
    j[key] = std::move(value);
    return j;
  };
  CHECK_THROWS_AS(parse_spec(with("link", "cloglog")), ConfigError);
  CHECK_THROWS_AS(parse_spec(with("B", {{1, 2}, {3}})), ConfigError);
  CHECK_THROWS_AS(parse_spec(with("levels", {2, 1})), ConfigError);
  CHECK_THROWS_AS(parse_spec(with("beta", {1.0})), ConfigError);
  CHECK_THROWS_AS(parse_spec(with("alpha_exponent", 0.5)), ConfigError);
  CHECK_THROWS_AS(parse_spec(with("pmf", {0.5, 0.5})), ConfigError);
  CHECK_THROWS_AS(parse_spec(with("colour", "red")), ConfigError);
  Json missing = Json::parse(kSpec);
  missing.erase("K");
  CHECK_THROWS_AS(parse_spec(missing), ConfigError);
}

TEST_CASE("experiment configs") {
  Json j;
  j["model"] = Json::parse(kSpec);
  j["n_values"] = {100, 200};
  j["replicates"] = 4;
  j["method"] = "kmeans";
  j["d"] = 5;
  j["master_seed"] = 18446744073709551615ULL;
  j["output"] = {{"dir", "out"}};
  j["clustering"] = {{"restarts", 3}};
  const auto cfg = parse_experiment(j, "/tmp/base");
  CHECK(cfg.n_values == std::vector<long long>{100, 200});
  CHECK(cfg.replicates == 4);
  CHECK(cfg.method == ClusterMethod::kmeans);
  CHECK(cfg.d == 5);
  CHECK(cfg.master_seed == 18446744073709551615ULL);
  CHECK(cfg.output_dir == "/tmp/base/out");
  CHECK(cfg.clustering.gmm.restarts == 3);
  CHECK(cfg.clustering.kmeans.restarts == 3);
  CHECK_FALSE(cfg.record_timings);

  j["n_values"] = {200, 100};
  CHECK_THROWS_AS(parse_experiment(j), ConfigError);
  j["n_values"] = {100};
  j["method"] = "spectral";
  CHECK_THROWS_AS(parse_experiment(j), ConfigError);
  j.erase("method");
  j["typo"] = 1;
  CHECK_THROWS_AS(parse_experiment(j), ConfigError);
}

TEST_CASE("network files round trip") {
  const SpecDocument doc = parse_spec(Json::parse(kSpec));
  const auto attrs = sample_attributes(doc.spec, 90, 1);
  const Network net = sample_network(doc.spec, attrs, doc.sparsity, 2);
  const auto dir = std::filesystem::temp_directory_path() / "acsbm_io_test";
  std::filesystem::create_directories(dir);
  save_network(net, dir / "edges.txt", dir / "attributes.tsv");
  const Network back = load_network(dir / "edges.txt", dir / "attributes.tsv");
  CHECK(back.edges() == net.edges());
  CHECK(back.attributes().Z == net.attributes().Z);
  REQUIRE(back.truth().has_value());
  CHECK(*back.truth() == attrs.theta);
  std::filesystem::remove_all(dir);
}

TEST_CASE("attribute tables with unknown labels") {
  std::stringstream in("node\ttheta\tz1\n1\tNA\t2\n0\t2\t1\n");
  const auto [attrs, known] = read_attributes(in);
  CHECK(attrs.n() == 2);
  CHECK(known(0) == 2);
  CHECK(known(1) == 0);
  CHECK(attrs.Z(1, 0) == 2);

  std::stringstream dup("node theta z1\n0 1 1\n0 1 1\n");
  CHECK_THROWS_AS(read_attributes(dup), ConfigError);
  std::stringstream header("id theta z1\n");
  CHECK_THROWS_AS(read_attributes(header), ConfigError);
  std::stringstream zero("node theta z1\n0 1 0\n");
  CHECK_THROWS_AS(read_attributes(zero), ConfigError);
  std::stringstream text("node theta z1\n0 one 1\n");
  CHECK_THROWS_AS(read_attributes(text), ConfigError);
}

TEST_CASE("edge lists") {
  std::stringstream in("# comment\n0 1\n\n3 2\n");
  const auto edges = read_edges(in);
  CHECK(edges == std::vector<Edge>{{0, 1}, {2, 3}});
  std::stringstream bad("0 1 2\n");
  CHECK_THROWS_AS(read_edges(bad), ConfigError);
  std::stringstream neg("-1 2\n");
  CHECK_THROWS_AS(read_edges(neg), ConfigError);
}

TEST_CASE("fit result json") {
  const SpecDocument doc = parse_spec(Json::parse(kSpec));
  const auto attrs = sample_attributes(doc.spec, 300, 4);
  const Network net = sample_network(doc.spec, attrs, doc.sparsity, 5);
  const FitResult r = fit(net, 3, 6);
  const Json j = fit_result_json(r, 0.25);
  CHECK(j["theta_hat"].size() == 300);
  CHECK(j["sigma_hat"].contains("1,2"));
  CHECK(j["sigma_hat"]["1,1"] == std::vector<int>{1, 2, 3});
  CHECK(j["misclassification"] == 0.25);
  CHECK(j["B_tilde_hat"].size() == 12);
  CHECK(j["timings_ms"].contains("embed"));
  CHECK(j["diagnostics"]["signature"].size() == 2);
  CHECK(fit_result_json(r, std::nullopt)["misclassification"].is_null());
}

TEST_CASE("summary json") {
  ExperimentSummary s;
  s.K = 2;
  s.worst_case = 0.5;
  s.rows.push_back({100, 0, 2, std::nan(""), std::nan(""), std::nan(""), std::nan("")});
  const Json j = summary_json(s);
  CHECK(j["worst_case"] == 0.5);
  CHECK(j["rows"][0]["median"].is_null());
  CHECK(j["rows"][0]["failures"] == 2);
}

TEST_CASE("shipped experiment configs load and validate") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(ACSBM_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const ExperimentConfig cfg = load_experiment(entry.path());
    CHECK(validate_spec(cfg.spec, cfg.n_values.front(), cfg.sched).ok());
    CHECK(validate_spec(cfg.spec, cfg.n_values.back(), cfg.sched).ok());
    ++seen;
  }
  CHECK(seen >= 6);
}
