#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stochord/harness.hpp"

using namespace stochord;

namespace {

ExperimentConfig small_continuous() {
  ExperimentConfig cfg;
  cfg.setting = SimSetting::gamma();
  cfg.design = DesignKind::Continuous;
  cfg.n = 60;
  cfg.replications = 8;
  cfg.eval_x = {1.5, 2.5, 3.5};
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("single replication with a fixed seed is deterministic") {
  ExperimentConfig cfg;
  cfg.setting = SimSetting::gamma();
  cfg.design = DesignKind::KSample;
  cfg.levels = {1.0, 4.0};
  cfg.per_group_n = 15;
  cfg.replications = 1;
  cfg.seed = 9;
  const MetricsReport a = run_ksample(cfg);
  const MetricsReport b = run_ksample(cfg);
  REQUIRE(a.estimators == b.estimators);
  for (std::size_t v = 0; v < a.estimators.size(); ++v)
    for (std::size_t xi = 0; xi < a.eval_x.size(); ++xi)
      for (std::size_t mi = 0; mi < a.metrics.size(); ++mi)
        REQUIRE(a.mean[v][xi][mi] == b.mean[v][xi][mi]);
}

TEST_CASE("reports are identical across thread counts") {
  ExperimentConfig cfg = small_continuous();
  cfg.threads = 1;
  const MetricsReport serial = run_continuous(cfg);
  cfg.threads = 4;
  const MetricsReport parallel = run_continuous(cfg);
  for (std::size_t v = 0; v < serial.estimators.size(); ++v)
    for (std::size_t xi = 0; xi < serial.eval_x.size(); ++xi)
      for (std::size_t mi = 0; mi < serial.metrics.size(); ++mi) {
        REQUIRE(serial.raw[v][xi][mi] == parallel.raw[v][xi][mi]);
        REQUIRE(serial.mean[v][xi][mi] == parallel.mean[v][xi][mi]);
      }
}

TEST_CASE("an estimator compared against itself improves by exactly zero") {
  ExperimentConfig cfg = small_continuous();
  cfg.method = OrderConstraint::Icv;
  cfg.competitor = OrderConstraint::Icv;
  cfg.replications = 4;
  const MetricsReport report = run_continuous(cfg);
  const std::size_t v = 0;  // method row, baseline = competitor row
  for (std::size_t xi = 0; xi < report.eval_x.size(); ++xi)
    for (std::size_t mi = 0; mi < report.metrics.size(); ++mi) {
      if (!(report.mean[1][xi][mi] > 0.0)) continue;
      REQUIRE(report.rel[v][xi][mi] == 0.0);
    }
}

TEST_CASE("subagged variants appear when an ensemble is configured") {
  ExperimentConfig cfg = small_continuous();
  cfg.replications = 3;
  cfg.ensemble = EnsembleSpec{5, 0.5};
  const MetricsReport report = run_continuous(cfg);
  REQUIRE(report.estimators ==
          std::vector<std::string>({"icv", "fsd", "icv_sbg", "fsd_sbg"}));
  // Subagged method improvement is measured against the subagged competitor.
  CHECK(report.baseline[2] == 3);
  for (std::size_t xi = 0; xi < report.eval_x.size(); ++xi)
    for (std::size_t mi = 0; mi < report.metrics.size(); ++mi)
      CHECK(std::isfinite(report.mean[2][xi][mi]));
}

TEST_CASE("K-sample config validation") {
  ExperimentConfig cfg;
  cfg.design = DesignKind::KSample;
  cfg.levels = {};
  CHECK_THROWS_AS(run_ksample(cfg), std::invalid_argument);
  cfg.levels = {1.0, 4.0};
  cfg.per_group_n = 0;
  CHECK_THROWS_AS(run_ksample(cfg), std::invalid_argument);
  cfg.per_group_n = 5;
  cfg.replications = 0;
  CHECK_THROWS_AS(run_ksample(cfg), std::invalid_argument);
  cfg.replications = 1;
  cfg.gamma_levels = {0.5, 1.2};
  CHECK_THROWS_AS(run_ksample(cfg), std::invalid_argument);

  ExperimentConfig cont = small_continuous();
  CHECK_THROWS_AS(run_ksample(cont), std::invalid_argument);
}

TEST_CASE("rate trend on equal sample sizes has ratio near one") {
  RateTrendResult r = run_rate_trend(SimSetting::gamma(), OrderConstraint::Icv, {80, 80}, 60,
                                     17, {1.0, 2.0, 3.0, 4.0});
  CHECK(r.rows.size() == 2);
  // Same distribution of sup errors for both entries; means differ only by
  // Monte Carlo noise.
  const double se = std::hypot(r.rows[0].se, r.rows[1].se);
  CHECK(std::abs(r.rows[1].mean_sup_error - r.rows[0].mean_sup_error) <= 4.0 * se);
  CHECK(r.ratio == Catch::Approx(1.0).margin(0.25));
}

TEST_CASE("rate trend decays with more data") {
  const RateTrendResult r =
      run_rate_trend(SimSetting::gamma(), OrderConstraint::Icv, {60, 480}, 40, 23);
  REQUIRE(r.rows[0].mean_sup_error > 0.0);
  CHECK(r.ratio < 0.9);
}
