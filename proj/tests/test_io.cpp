#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stochord/io.hpp"
#include "stochord/rng.hpp"
#include "support/oracles.hpp"

using namespace stochord;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("stochord_io_" + name);
}

}  // namespace

TEST_CASE("CSV reader handles headers, comments and errors") {
  std::istringstream in("# comment\nx,y\n1,2\n# another\n2.5,-1e-3\n");
  const auto pairs = read_xy_csv(in, "test.csv");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<double, double>{1.0, 2.0});
  CHECK(pairs[1].second == Catch::Approx(-1e-3));

  std::istringstream bad("x,y\na,b\n");
  try {
    read_xy_csv(bad, "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("bad.csv:2") != std::string::npos);
  }

  std::istringstream empty("x,y\n");
  CHECK_THROWS_AS(read_xy_csv(empty, "empty.csv"), ParseError);
}

TEST_CASE("model files round-trip exactly") {
  RandomStream stream(81001);
  const auto pairs = test::random_dataset(stream, 70, 6);
  for (auto order : {OrderConstraint::Icv, OrderConstraint::Icx, OrderConstraint::Fsd,
                     OrderConstraint::Ecdf}) {
    const FittedModel m = fit(group(pairs), GridSpec::observed(), order);
    const auto path = temp_file("model.json");
    write_model_file(path.string(), m);
    const FittedModel back = read_model_file(path.string());
    REQUIRE(back.order == m.order);
    REQUIRE(back.grid_mode == m.grid_mode);
    REQUIRE(back.design_points == m.design_points);
    REQUIRE(back.grid == m.grid);
    REQUIRE(back.cdfs.size() == m.cdfs.size());
    for (std::size_t i = 0; i < m.cdfs.size(); ++i) {
      REQUIRE(back.cdfs[i].points() == m.cdfs[i].points());
      REQUIRE(back.cdfs[i].cum() == m.cdfs[i].cum());
    }
    std::filesystem::remove(path);
  }
}

TEST_CASE("permuting CSV rows leaves the fitted model unchanged") {
  RandomStream stream(81002);
  auto pairs = test::random_dataset(stream, 50, 5);
  const FittedModel a = fit_icv(group(pairs), GridSpec::observed());
  for (int rep = 0; rep < 5; ++rep) {
    const auto idx = sample_without_replacement(pairs.size(), pairs.size(), stream);
    std::vector<std::pair<double, double>> shuffled;
    for (std::size_t i : idx) shuffled.push_back(pairs[i]);
    const FittedModel b = fit_icv(group(shuffled), GridSpec::observed());
    REQUIRE(a.design_points == b.design_points);
    for (std::size_t i = 0; i < a.cdfs.size(); ++i) REQUIRE(a.cdfs[i].cum() == b.cdfs[i].cum());
  }
}

TEST_CASE("experiment config parsing and validation") {
  const auto j = nlohmann::json::parse(R"({
    "setting": "gamma",
    "design": {"type": "ksample", "levels": [1, 4], "per_group_n": 30},
    "replications": 10,
    "seed": 3
  })");
  const ExperimentConfig cfg = experiment_config_from_json(j);
  CHECK(cfg.setting.kind == SettingKind::GammaXY);
  CHECK(cfg.design == DesignKind::KSample);
  CHECK(cfg.method == OrderConstraint::Icv);
  CHECK(cfg.competitor == OrderConstraint::Ecdf);
  CHECK(cfg.replications == 10);
  CHECK(cfg.seed == 3);

  auto bad = j;
  bad["design"]["levels"] = nlohmann::json::array({4, 1});
  CHECK_THROWS_AS(experiment_config_from_json(bad), ParseError);
  bad = j;
  bad["gamma_levels"] = nlohmann::json::array({0.5, 1.5});
  CHECK_THROWS_AS(experiment_config_from_json(bad), ParseError);
  bad = j;
  bad.erase("setting");
  CHECK_THROWS_AS(experiment_config_from_json(bad), ParseError);

  const auto cont = nlohmann::json::parse(R"({
    "setting": "student",
    "design": {"type": "continuous", "n": 100},
    "ensemble": {"n_subsamples": 10, "fraction": 0.5}
  })");
  const ExperimentConfig ccfg = experiment_config_from_json(cont);
  CHECK(ccfg.method == OrderConstraint::Icx);
  CHECK(ccfg.competitor == OrderConstraint::Fsd);
  REQUIRE(ccfg.ensemble.has_value());
  CHECK(ccfg.ensemble->n_subsamples == 10);
}

TEST_CASE("report serialization has one row per estimator, x and metric") {
  ExperimentConfig cfg;
  cfg.setting = SimSetting::gamma();
  cfg.design = DesignKind::KSample;
  cfg.levels = {1.0, 4.0};
  cfg.per_group_n = 10;
  cfg.replications = 3;
  cfg.threads = 1;
  const MetricsReport report = run_ksample(cfg);
  const nlohmann::json j = report_to_json(report);
  CHECK(j["rows"].size() == report.estimators.size() * report.eval_x.size() *
                                report.metrics.size());
  const std::string csv = report_to_csv(report);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + j["rows"].size());
  CHECK(csv.rfind("setting,design,estimator,x,metric", 0) == 0);
  const std::string table = improvement_table(report, cfg.levels.size());
  CHECK(table.find("l1") != std::string::npos);
  CHECK(table.find("dq_0.5") != std::string::npos);
}
