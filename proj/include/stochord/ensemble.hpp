#ifndef STOCHORD_ENSEMBLE_HPP
#define STOCHORD_ENSEMBLE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stochord/estimators.hpp"
#include "stochord/rng.hpp"
#include "stochord/sample.hpp"

namespace stochord {

// Subsample aggregation: fit the estimator on random subsamples (drawn
// without replacement) or on disjoint blocks of a random partition, then
// average the estimated CDFs pointwise.
struct EnsembleConfig {
  enum class Mode { Subsample, Partition };

  std::size_t n_subsamples = 50;
  std::size_t subsample_size = 0;
  Mode mode = Mode::Subsample;
  std::uint64_t seed = 0;
};

namespace detail {

// Index sets for each run; Fisher-Yates on {0..n-1}, one independent stream
// per subsample so results do not depend on evaluation order.
inline std::vector<std::vector<std::size_t>> subsample_indices(std::size_t n,
                                                               const EnsembleConfig& cfg) {
  if (cfg.n_subsamples == 0) throw std::invalid_argument("EnsembleConfig: n_subsamples must be positive");
  if (cfg.subsample_size < 2) throw std::invalid_argument("EnsembleConfig: subsample_size must be at least 2");
  if (cfg.subsample_size > n) throw std::invalid_argument("EnsembleConfig: subsample_size exceeds sample size");

  std::vector<std::vector<std::size_t>> runs(cfg.n_subsamples);
  const RandomStream root(cfg.seed);
  if (cfg.mode == EnsembleConfig::Mode::Subsample) {
    for (std::size_t r = 0; r < cfg.n_subsamples; ++r) {
      RandomStream stream = root.substream(r);
      runs[r] = sample_without_replacement(n, cfg.subsample_size, stream);
    }
  } else {
    if (cfg.n_subsamples * cfg.subsample_size > n)
      throw std::invalid_argument("EnsembleConfig: partition blocks exceed sample size");
    RandomStream stream = root.substream(0);
    const std::vector<std::size_t> perm = sample_without_replacement(n, n, stream);
    for (std::size_t r = 0; r < cfg.n_subsamples; ++r)
      runs[r].assign(perm.begin() + r * cfg.subsample_size,
                     perm.begin() + (r + 1) * cfg.subsample_size);
  }
  return runs;
}

// Grid spec applied to one subsample: observed/integer grids derive from the
// subsample's own responses; an explicit grid is clipped to the subsample's
// response range so the endpoint rule holds per fit.
inline GridSpec subsample_grid(const GridSpec& spec, const GroupedSample& sub) {
  if (spec.mode != GridSpec::Mode::Explicit) return spec;
  const double lo = sub.distinct_responses.front();
  const double hi = sub.distinct_responses.back();
  std::vector<double> pts;
  pts.push_back(lo);
  for (double t : spec.points)
    if (t > lo && t < hi) pts.push_back(t);
  if (hi > lo) pts.push_back(hi);
  return GridSpec::explicit_grid(std::move(pts));
}

}  // namespace detail

inline FittedModel ensemble_fit(const std::vector<std::pair<double, double>>& pairs,
                                const GridSpec& spec, OrderConstraint order,
                                const EnsembleConfig& cfg) {
  const auto runs = detail::subsample_indices(pairs.size(), cfg);

  std::vector<FittedModel> models;
  models.reserve(runs.size());
  for (const auto& idx : runs) {
    std::vector<std::pair<double, double>> sub;
    sub.reserve(idx.size());
    for (std::size_t i : idx) sub.push_back(pairs[i]);
    const GroupedSample grouped = group(sub);
    models.push_back(fit(grouped, detail::subsample_grid(spec, grouped), order));
  }

  // Average the run CDFs on the union of all jump points, at the union of all
  // design points; each run extrapolates with its own clamping rule.
  std::vector<double> xs, ts;
  for (const auto& m : models) {
    xs.insert(xs.end(), m.design_points.begin(), m.design_points.end());
    ts.insert(ts.end(), m.grid.begin(), m.grid.end());
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  const double inv = 1.0 / static_cast<double>(models.size());
  std::vector<std::vector<double>> acc(xs.size(), std::vector<double>(ts.size(), 0.0));
  std::vector<std::vector<double>> evaluated;  // per-run cache, one row per design point
  for (const auto& m : models) {
    evaluated.assign(m.cdfs.size(), {});
    const auto eval = [&](std::size_t i) -> const std::vector<double>& {
      if (evaluated[i].empty()) evaluated[i] = m.cdfs[i].values_at_sorted(ts);
      return evaluated[i];
    };
    for (std::size_t q = 0; q < xs.size(); ++q) {
      const auto nb = detail::locate(m.design_points, xs[q]);
      if (nb.lo == nb.hi) {
        const std::vector<double>& row = eval(nb.lo);
        for (std::size_t j = 0; j < ts.size(); ++j) acc[q][j] += row[j];
      } else {
        const std::vector<double>& a = eval(nb.lo);
        const std::vector<double>& b = eval(nb.hi);
        const double mu = 1.0 - nb.lambda;
        for (std::size_t j = 0; j < ts.size(); ++j)
          acc[q][j] += nb.lambda * a[j] + mu * b[j];
      }
    }
  }

  FittedModel out;
  out.order = order;
  out.grid_mode = spec.mode;
  out.design_points = xs;
  out.grid = ts;
  out.cdfs.reserve(xs.size());
  for (std::size_t q = 0; q < xs.size(); ++q) {
    std::vector<double> cum(ts.size());
    for (std::size_t j = 0; j < ts.size(); ++j) cum[j] = std::min(1.0, acc[q][j] * inv);
    cum.back() = 1.0;
    out.cdfs.emplace_back(ts, std::move(cum));
  }
  return out;
}

}  // namespace stochord

#endif  // STOCHORD_ENSEMBLE_HPP
