#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stochord/monotone.hpp"
#include "stochord/rng.hpp"
#include "support/oracles.hpp"

using namespace stochord;

namespace {

WeightedSeries random_series(RandomStream& stream, std::size_t max_d) {
  const std::size_t d = 1 + stream.next_below(max_d);
  std::vector<double> v(d), w(d);
  for (std::size_t i = 0; i < d; ++i) {
    v[i] = 10.0 * stream.next_double() - 5.0;
    w[i] = 0.1 + 4.0 * stream.next_double();
  }
  return WeightedSeries(std::move(v), std::move(w));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("monotone_fit matches hand-computed projections") {
  CHECK(monotone_fit(WeightedSeries({1, 3, 2}, {1, 1, 1}), Direction::Increasing) ==
        std::vector<double>{1.0, 2.5, 2.5});
  CHECK(monotone_fit(WeightedSeries({3, 1, 2}, {1, 1, 1}), Direction::Decreasing) ==
        std::vector<double>{3.0, 1.5, 1.5});
  CHECK(monotone_fit(WeightedSeries({1, 0}, {3, 1}), Direction::Increasing) ==
        std::vector<double>{0.75, 0.75});
}

TEST_CASE("monotone inputs pass through unchanged") {
  const std::vector<double> incr{-1.0, 0.5, 0.5, 2.0};
  CHECK(monotone_fit(WeightedSeries(incr, {1, 2, 3, 4}), Direction::Increasing) == incr);
  const std::vector<double> decr{4.0, 4.0, 1.0, -2.0};
  CHECK(monotone_fit(WeightedSeries(decr, {2, 1, 1, 5}), Direction::Decreasing) == decr);
}

TEST_CASE("monotone_fit rejects invalid input") {
  CHECK_THROWS_AS(monotone_fit(WeightedSeries({}, {}), Direction::Increasing), std::domain_error);
  CHECK_THROWS_AS(monotone_fit(WeightedSeries({1.0}, {0.0}), Direction::Increasing),
                  std::domain_error);
  CHECK_THROWS_AS(monotone_fit(WeightedSeries({1.0}, {-1.0}), Direction::Decreasing),
                  std::domain_error);
  CHECK_THROWS_AS(
      monotone_fit(WeightedSeries({std::nan("")}, {1.0}), Direction::Increasing),
      std::domain_error);
  CHECK_THROWS_AS(monotone_fit(WeightedSeries({1.0, 2.0}, {1.0}), Direction::Increasing),
                  std::domain_error);
}

TEST_CASE("minmax_fit matches hand-computed values") {
  CHECK(max_abs_diff(minmax_fit(WeightedSeries({3, 1, 2}, {1, 1, 1}), Direction::Decreasing),
                     {3.0, 1.5, 1.5}) < 1e-14);
  CHECK(minmax_fit(WeightedSeries({7.0}, {2.0}), Direction::Increasing) ==
        std::vector<double>{7.0});
  CHECK(max_abs_diff(minmax_fit(WeightedSeries({5, 5, 5}, {1, 2, 3}), Direction::Decreasing),
                     {5.0, 5.0, 5.0}) < 1e-14);
}

TEST_CASE("monotone_fit agrees with the exhaustive cone projection") {
  RandomStream stream(20240001);
  for (int rep = 0; rep < 1000; ++rep) {
    const WeightedSeries s = random_series(stream, 8);
    const Direction dir = stream.next_below(2) == 0 ? Direction::Increasing : Direction::Decreasing;
    const std::vector<double> fit = monotone_fit(s, dir);
    const std::vector<double> oracle = test::brute_force_monotone_fit(s, dir);
    REQUIRE(max_abs_diff(fit, oracle) <= 1e-10);
  }
}

TEST_CASE("minmax representation is equivalent to the projection") {
  RandomStream stream(20240002);
  for (int rep = 0; rep < 1000; ++rep) {
    const WeightedSeries s = random_series(stream, 8);
    const Direction dir = stream.next_below(2) == 0 ? Direction::Increasing : Direction::Decreasing;
    REQUIRE(max_abs_diff(monotone_fit(s, dir), minmax_fit(s, dir)) <= 1e-10);
  }
}

TEST_CASE("weighted mean preservation, idempotence, duality") {
  RandomStream stream(20240003);
  for (int rep = 0; rep < 300; ++rep) {
    const WeightedSeries s = random_series(stream, 12);
    const std::vector<double> fit = monotone_fit(s, Direction::Increasing);

    double in_mean = 0.0, out_mean = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) {
      in_mean += s.weights[i] * s.values[i];
      out_mean += s.weights[i] * fit[i];
    }
    CHECK(std::abs(in_mean - out_mean) <= 1e-10 * std::max(1.0, std::abs(in_mean)));

    CHECK(monotone_fit(WeightedSeries(fit, s.weights), Direction::Increasing) == fit);

    WeightedSeries negated = s;
    for (double& v : negated.values) v = -v;
    std::vector<double> dual = monotone_fit(negated, Direction::Increasing);
    for (double& v : dual) v = -v;
    CHECK(max_abs_diff(monotone_fit(s, Direction::Decreasing), dual) <= 1e-12);
  }
}

TEST_CASE("splitting an element into equal-value parts preserves the fit") {
  RandomStream stream(20240004);
  for (int rep = 0; rep < 200; ++rep) {
    const WeightedSeries s = random_series(stream, 6);
    const std::size_t at = stream.next_below(s.values.size());
    WeightedSeries split;
    std::vector<std::size_t> origin;  // index into s for every split position
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i == at) {
        split.values.push_back(s.values[i]);
        split.weights.push_back(0.25 * s.weights[i]);
        split.values.push_back(s.values[i]);
        split.weights.push_back(0.75 * s.weights[i]);
        origin.push_back(i);
      } else {
        split.values.push_back(s.values[i]);
        split.weights.push_back(s.weights[i]);
      }
      origin.push_back(i);
    }
    const std::vector<double> base = monotone_fit(s, Direction::Increasing);
    const std::vector<double> refit = monotone_fit(split, Direction::Increasing);
    for (std::size_t i = 0; i < refit.size(); ++i)
      REQUIRE(std::abs(refit[i] - base[origin[i]]) <= 1e-10);
  }
}
