#ifndef STOCHORD_SAMPLE_HPP
#define STOCHORD_SAMPLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stochord {

// Covariate-sorted observations grouped by distinct covariate value. Groups
// keep their responses sorted with prefix sums so integrated-ECDF and
// indicator means are O(log group size) per query.
struct GroupedSample {
  std::vector<double> design_points;          // x_1 < ... < x_d
  std::vector<std::vector<double>> groups;    // sorted responses per design point
  std::vector<std::vector<double>> prefix;    // prefix[i][c] = sum of first c responses
  std::vector<double> weights;                // group sizes
  std::vector<double> distinct_responses;     // y_1 < ... < y_m over all groups
  std::size_t n = 0;

  std::size_t size() const { return n; }
  std::size_t num_groups() const { return design_points.size(); }

  std::size_t count_le(std::size_t i, double y) const {
    const auto& g = groups[i];
    return static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), y) - g.begin());
  }

  // h_i(y): group mean of (y - Y)_+.
  double mean_shortfall(std::size_t i, double y) const {
    const std::size_t c = count_le(i, y);
    return (y * static_cast<double>(c) - prefix[i][c]) / weights[i];
  }

  // Group mean of (Y - y)_+.
  double mean_excess(std::size_t i, double y) const {
    const std::size_t c = count_le(i, y);
    const double tail_sum = prefix[i].back() - prefix[i][c];
    return (tail_sum - y * static_cast<double>(groups[i].size() - c)) / weights[i];
  }

  // Group mean of the indicator 1{Y <= y}.
  double frac_le(std::size_t i, double y) const {
    return static_cast<double>(count_le(i, y)) / weights[i];
  }

  // Sample with negated covariates and responses; group order reverses.
  GroupedSample reflected() const {
    GroupedSample r;
    r.n = n;
    const std::size_t d = num_groups();
    r.design_points.resize(d);
    r.weights.resize(d);
    r.groups.resize(d);
    r.prefix.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t src = d - 1 - i;
      r.design_points[i] = -design_points[src];
      r.weights[i] = weights[src];
      std::vector<double> g(groups[src].rbegin(), groups[src].rend());
      for (double& y : g) y = -y;
      r.prefix[i].assign(g.size() + 1, 0.0);
      for (std::size_t c = 0; c < g.size(); ++c) r.prefix[i][c + 1] = r.prefix[i][c] + g[c];
      r.groups[i] = std::move(g);
    }
    r.distinct_responses.assign(distinct_responses.rbegin(), distinct_responses.rend());
    for (double& y : r.distinct_responses) y = -y;
    return r;
  }
};

// Groups (x, y) pairs by exact covariate equality (callers wanting binning
// must pre-round), sorted by covariate.
inline GroupedSample group(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw std::domain_error("group: empty input");
  std::vector<std::pair<double, double>> sorted = pairs;
  for (const auto& [x, y] : sorted)
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::domain_error("group: non-finite value");
  std::sort(sorted.begin(), sorted.end());

  GroupedSample s;
  s.n = sorted.size();
  std::size_t lo = 0;
  while (lo < sorted.size()) {
    std::size_t hi = lo;
    while (hi < sorted.size() && sorted[hi].first == sorted[lo].first) ++hi;
    s.design_points.push_back(sorted[lo].first);
    std::vector<double> g;
    g.reserve(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) g.push_back(sorted[j].second);
    s.weights.push_back(static_cast<double>(g.size()));
    std::vector<double> p(g.size() + 1, 0.0);
    for (std::size_t c = 0; c < g.size(); ++c) p[c + 1] = p[c] + g[c];
    s.prefix.push_back(std::move(p));
    s.groups.push_back(std::move(g));
    lo = hi;
  }

  std::vector<double> ys;
  ys.reserve(s.n);
  for (const auto& g : s.groups) ys.insert(ys.end(), g.begin(), g.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  s.distinct_responses = std::move(ys);
  return s;
}

// Evaluation grid for the two-stage estimators. Explicit grids must span
// exactly [y_1, y_m]; the integer lattice requires integer-valued responses.
struct GridSpec {
  enum class Mode { ObservedValues, IntegerLattice, Explicit };

  Mode mode = Mode::ObservedValues;
  std::vector<double> points;  // Explicit only

  static GridSpec observed() { return {}; }
  static GridSpec integer_lattice() {
    GridSpec g;
    g.mode = Mode::IntegerLattice;
    return g;
  }
  static GridSpec explicit_grid(std::vector<double> pts) {
    GridSpec g;
    g.mode = Mode::Explicit;
    g.points = std::move(pts);
    return g;
  }
};

inline std::vector<double> materialize_grid(const GridSpec& spec, const GroupedSample& sample) {
  const double y_min = sample.distinct_responses.front();
  const double y_max = sample.distinct_responses.back();
  switch (spec.mode) {
    case GridSpec::Mode::ObservedValues:
      return sample.distinct_responses;
    case GridSpec::Mode::IntegerLattice: {
      for (double y : sample.distinct_responses)
        if (std::abs(y - std::nearbyint(y)) > 1e-9)
          throw std::domain_error("GridSpec: integer lattice requires integer-valued responses");
      const long long lo = std::llround(y_min);
      const long long hi = std::llround(y_max);
      std::vector<double> grid;
      grid.reserve(static_cast<std::size_t>(hi - lo) + 1);
      for (long long t = lo; t <= hi; ++t) grid.push_back(static_cast<double>(t));
      return grid;
    }
    case GridSpec::Mode::Explicit: {
      const auto& g = spec.points;
      if (g.empty()) throw std::domain_error("GridSpec: explicit grid is empty");
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!std::isfinite(g[j])) throw std::domain_error("GridSpec: non-finite grid point");
        if (j > 0 && !(g[j - 1] < g[j]))
          throw std::domain_error("GridSpec: explicit grid must be strictly increasing");
      }
      if (g.front() != y_min || g.back() != y_max)
        throw std::domain_error("GridSpec: explicit grid must span exactly [y_1, y_m]");
      return g;
    }
  }
  throw std::logic_error("GridSpec: unknown mode");
}

}  // namespace stochord

#endif  // STOCHORD_SAMPLE_HPP
