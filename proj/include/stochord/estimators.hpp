#ifndef STOCHORD_ESTIMATORS_HPP
#define STOCHORD_ESTIMATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochord/monotone.hpp"
#include "stochord/sample.hpp"
#include "stochord/step_cdf.hpp"

namespace stochord {

enum class OrderConstraint { Icv, Icx, Fsd, Ecdf };

inline std::string order_name(OrderConstraint o) {
  switch (o) {
    case OrderConstraint::Icv: return "icv";
    case OrderConstraint::Icx: return "icx";
    case OrderConstraint::Fsd: return "fsd";
    case OrderConstraint::Ecdf: return "ecdf";
  }
  return "?";
}

inline OrderConstraint order_from_name(const std::string& name) {
  if (name == "icv") return OrderConstraint::Icv;
  if (name == "icx") return OrderConstraint::Icx;
  if (name == "fsd") return OrderConstraint::Fsd;
  if (name == "ecdf") return OrderConstraint::Ecdf;
  throw std::invalid_argument("unknown order constraint: " + name);
}

// Conditional-CDF estimates at the design points. Prediction between design
// points interpolates the neighboring CDFs pointwise and clamps outside
// [x_1, x_d].
struct FittedModel {
  OrderConstraint order = OrderConstraint::Icv;
  GridSpec::Mode grid_mode = GridSpec::Mode::ObservedValues;
  std::vector<double> design_points;
  std::vector<double> grid;
  std::vector<StepCdf> cdfs;  // one per design point
};

// M-tilde matrix [group][grid point]: for every grid point the weighted
// antitonic regression across groups of the group means of (t - Y)_+. Row i
// is the integrated-CDF estimate for design point x_i evaluated on the grid.
inline std::vector<std::vector<double>> antitonic_integrated_cdf(
    const GroupedSample& sample, const std::vector<double>& grid) {
  const std::size_t d = sample.num_groups();
  const std::size_t k = grid.size();
  std::vector<std::vector<double>> mtilde(d, std::vector<double>(k));
  std::vector<double> h(d);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < d; ++i) h[i] = sample.mean_shortfall(i, grid[j]);
    const std::vector<double> fit = detail::pava(h, sample.weights, Direction::Decreasing);
    for (std::size_t i = 0; i < d; ++i) mtilde[i][j] = fit[i];
  }
  return mtilde;
}

namespace detail {

// Second stage: isotonic regression of the chord slopes of one M-tilde row
// with grid spacings as weights; the fitted slopes are the CDF values at
// t_1..t_{k-1}, and F(t_k) = 1 since the grid ends at y_m.
inline std::vector<double> slope_stage(const std::vector<double>& mrow,
                                       const std::vector<double>& grid) {
  const std::size_t k = grid.size();
  std::vector<double> raw(k - 1), dt(k - 1);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    dt[j] = grid[j + 1] - grid[j];
    raw[j] = (mrow[j + 1] - mrow[j]) / dt[j];
  }
  std::vector<double> fitted = pava(raw, dt, Direction::Increasing);
  std::vector<double> cum(k);
  for (std::size_t j = 0; j + 1 < k; ++j) cum[j] = std::clamp(fitted[j], 0.0, 1.0);
  cum[k - 1] = 1.0;
  return cum;
}

inline FittedModel all_dirac_model(const GroupedSample& sample, OrderConstraint tag,
                                   GridSpec::Mode mode, double at) {
  FittedModel m;
  m.order = tag;
  m.grid_mode = mode;
  m.design_points = sample.design_points;
  m.grid = {at};
  m.cdfs.assign(sample.num_groups(), StepCdf::dirac(at));
  return m;
}

inline FittedModel fit_icv_on_grid(const GroupedSample& sample, const std::vector<double>& grid,
                                   GridSpec::Mode mode) {
  FittedModel m;
  m.order = OrderConstraint::Icv;
  m.grid_mode = mode;
  m.design_points = sample.design_points;
  m.grid = grid;
  if (grid.size() == 1) return all_dirac_model(sample, OrderConstraint::Icv, mode, grid[0]);
  const auto mtilde = antitonic_integrated_cdf(sample, grid);
  m.cdfs.reserve(sample.num_groups());
  for (std::size_t i = 0; i < sample.num_groups(); ++i)
    m.cdfs.emplace_back(grid, slope_stage(mtilde[i], grid));
  return m;
}

}  // namespace detail

// Estimator under the increasing concave order: antitonic regression of the
// integrated ECDFs across design points, then the slope stage per point.
inline FittedModel fit_icv(const GroupedSample& sample, const GridSpec& spec) {
  return detail::fit_icv_on_grid(sample, materialize_grid(spec, sample), spec.mode);
}

// Estimator under the increasing convex order, by reflection: run the icv
// pipeline on (-X, -Y) with the negated grid and map each CDF G back through
// F(y) = 1 - G((-y)^-). Jump bookkeeping is exact because masses sit on the
// negated grid points.
inline FittedModel fit_icx(const GroupedSample& sample, const GridSpec& spec) {
  const std::vector<double> grid = materialize_grid(spec, sample);
  FittedModel m;
  m.order = OrderConstraint::Icx;
  m.grid_mode = spec.mode;
  m.design_points = sample.design_points;
  m.grid = grid;
  const std::size_t k = grid.size();
  if (k == 1) return detail::all_dirac_model(sample, OrderConstraint::Icx, spec.mode, grid[0]);

  std::vector<double> reflected_grid(k);
  for (std::size_t j = 0; j < k; ++j) reflected_grid[j] = -grid[k - 1 - j];
  const FittedModel reflected =
      detail::fit_icv_on_grid(sample.reflected(), reflected_grid, spec.mode);

  const std::size_t d = sample.num_groups();
  m.cdfs.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::vector<double>& g = reflected.cdfs[d - 1 - i].cum();
    std::vector<double> cum(k);
    for (std::size_t l = 0; l + 1 < k; ++l) cum[l] = 1.0 - g[k - 2 - l];
    cum[k - 1] = 1.0;
    m.cdfs.emplace_back(grid, std::move(cum));
  }
  return m;
}

// First-order-stochastic-dominance estimator: per grid point, antitonic
// regression across design points of the group means of 1{Y <= t}.
inline FittedModel fit_fsd(const GroupedSample& sample, const GridSpec& spec) {
  const std::vector<double> grid = materialize_grid(spec, sample);
  FittedModel m;
  m.order = OrderConstraint::Fsd;
  m.grid_mode = spec.mode;
  m.design_points = sample.design_points;
  m.grid = grid;
  const std::size_t d = sample.num_groups();
  const std::size_t k = grid.size();
  if (k == 1) return detail::all_dirac_model(sample, OrderConstraint::Fsd, spec.mode, grid[0]);

  std::vector<std::vector<double>> f(d, std::vector<double>(k));
  std::vector<double> h(d);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < d; ++i) h[i] = sample.frac_le(i, grid[j]);
    const std::vector<double> fit = detail::pava(h, sample.weights, Direction::Decreasing);
    for (std::size_t i = 0; i < d; ++i) f[i][j] = fit[i];
  }
  m.cdfs.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> cum = std::move(f[i]);
    // Monotone in y by the min-max representation; the guard only absorbs
    // floating-point noise between the per-grid-point regressions.
    for (std::size_t j = 0; j < k; ++j) {
      cum[j] = std::clamp(cum[j], 0.0, 1.0);
      if (j > 0) cum[j] = std::max(cum[j], cum[j - 1]);
    }
    cum[k - 1] = 1.0;
    m.cdfs.emplace_back(grid, std::move(cum));
  }
  return m;
}

// Stratified empirical CDFs evaluated on the shared grid.
inline FittedModel fit_ecdf(const GroupedSample& sample, const GridSpec& spec) {
  const std::vector<double> grid = materialize_grid(spec, sample);
  FittedModel m;
  m.order = OrderConstraint::Ecdf;
  m.grid_mode = spec.mode;
  m.design_points = sample.design_points;
  m.grid = grid;
  for (std::size_t i = 0; i < sample.num_groups(); ++i) {
    std::vector<double> cum(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) cum[j] = sample.frac_le(i, grid[j]);
    cum.back() = 1.0;
    m.cdfs.emplace_back(grid, std::move(cum));
  }
  return m;
}

inline FittedModel fit(const GroupedSample& sample, const GridSpec& spec, OrderConstraint order) {
  switch (order) {
    case OrderConstraint::Icv: return fit_icv(sample, spec);
    case OrderConstraint::Icx: return fit_icx(sample, spec);
    case OrderConstraint::Fsd: return fit_fsd(sample, spec);
    case OrderConstraint::Ecdf: return fit_ecdf(sample, spec);
  }
  throw std::logic_error("fit: unknown order");
}

// Two-sample special case written out in closed form: the antitonic stage is
// an indicator-weighted mixture of the two integrated ECDFs with mixing
// weight alpha = n_1 / n. Must agree with fit_icv.
inline FittedModel two_sample_closed_form(const GroupedSample& sample, const GridSpec& spec) {
  if (sample.num_groups() != 2)
    throw std::invalid_argument("two_sample_closed_form: requires exactly 2 design points");
  const std::vector<double> grid = materialize_grid(spec, sample);
  FittedModel m;
  m.order = OrderConstraint::Icv;
  m.grid_mode = spec.mode;
  m.design_points = sample.design_points;
  m.grid = grid;
  const std::size_t k = grid.size();
  if (k == 1) return detail::all_dirac_model(sample, OrderConstraint::Icv, spec.mode, grid[0]);

  const double alpha = sample.weights[0] / static_cast<double>(sample.n);
  std::vector<std::vector<double>> mtilde(2, std::vector<double>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const double m1 = sample.mean_shortfall(0, grid[j]);
    const double m2 = sample.mean_shortfall(1, grid[j]);
    if (m1 >= m2) {
      mtilde[0][j] = m1;
      mtilde[1][j] = m2;
    } else {
      const double pooled = alpha * m1 + (1.0 - alpha) * m2;
      mtilde[0][j] = pooled;
      mtilde[1][j] = pooled;
    }
  }
  for (std::size_t i = 0; i < 2; ++i)
    m.cdfs.emplace_back(grid, detail::slope_stage(mtilde[i], grid));
  return m;
}

namespace detail {

struct Neighbors {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double lambda = 1.0;  // weight of the lower neighbor
};

inline Neighbors locate(const std::vector<double>& design_points, double x) {
  Neighbors nb;
  if (x <= design_points.front()) return nb;
  if (x >= design_points.back()) {
    nb.lo = nb.hi = design_points.size() - 1;
    return nb;
  }
  const auto it = std::upper_bound(design_points.begin(), design_points.end(), x);
  nb.hi = static_cast<std::size_t>(it - design_points.begin());
  nb.lo = nb.hi - 1;
  if (design_points[nb.lo] == x) {
    nb.hi = nb.lo;
    return nb;
  }
  nb.lambda = (design_points[nb.hi] - x) / (design_points[nb.hi] - design_points[nb.lo]);
  return nb;
}

}  // namespace detail

// Conditional CDF at covariate x as a step function: the design-point CDF
// when x matches, otherwise the pointwise convex combination of the two
// neighbors (clamped at the boundary).
inline StepCdf interpolated_cdf(const FittedModel& model, double x) {
  if (!std::isfinite(x)) throw std::domain_error("interpolated_cdf: non-finite x");
  const auto nb = detail::locate(model.design_points, x);
  if (nb.lo == nb.hi) return model.cdfs[nb.lo];
  const StepCdf& a = model.cdfs[nb.lo];
  const StepCdf& b = model.cdfs[nb.hi];
  std::vector<double> pts;
  pts.reserve(a.points().size() + b.points().size());
  std::merge(a.points().begin(), a.points().end(), b.points().begin(), b.points().end(),
             std::back_inserter(pts));
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::vector<double> fa = a.values_at_sorted(pts);
  const std::vector<double> fb = b.values_at_sorted(pts);
  std::vector<double> cum(pts.size());
  const double mu = 1.0 - nb.lambda;
  for (std::size_t j = 0; j < pts.size(); ++j)
    cum[j] = std::min(1.0, nb.lambda * fa[j] + mu * fb[j]);
  cum.back() = 1.0;
  return StepCdf(std::move(pts), std::move(cum));
}

inline double predict_cdf(const FittedModel& model, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw std::domain_error("predict_cdf: non-finite input");
  const auto nb = detail::locate(model.design_points, x);
  if (nb.lo == nb.hi) return model.cdfs[nb.lo](y);
  return nb.lambda * model.cdfs[nb.lo](y) + (1.0 - nb.lambda) * model.cdfs[nb.hi](y);
}

inline double predict_quantile(const FittedModel& model, double x, double gamma) {
  if (!std::isfinite(x)) throw std::domain_error("predict_quantile: non-finite x");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::domain_error("predict_quantile: gamma must be in (0,1)");
  const auto nb = detail::locate(model.design_points, x);
  if (nb.lo == nb.hi) return model.cdfs[nb.lo].quantile(gamma);
  return interpolated_cdf(model, x).quantile(gamma);
}

// Checks the stochastic-order invariant across design points on the model
// grid: integrated CDFs nonincreasing (icv), upper integrals nondecreasing
// (icx), or pointwise CDF ordering (fsd). Integrals are exact partial sums of
// the step functions. Ecdf models carry no constraint.
inline bool satisfies_order_invariant(const FittedModel& model, double tol) {
  if (model.order == OrderConstraint::Ecdf) return true;
  const std::size_t d = model.cdfs.size();
  if (d < 2) return true;
  const std::vector<double>& t = model.grid;
  const std::size_t k = t.size();
  std::vector<std::vector<double>> f(d);
  for (std::size_t i = 0; i < d; ++i) f[i] = model.cdfs[i].values_at_sorted(t);

  if (model.order == OrderConstraint::Fsd) {
    for (std::size_t i = 0; i + 1 < d; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (f[i][j] < f[i + 1][j] - tol) return false;
    return true;
  }

  // Integrated CDF at grid points (icv) or upper integrals (icx).
  std::vector<std::vector<double>> integral(d, std::vector<double>(k, 0.0));
  if (model.order == OrderConstraint::Icv) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 1; j < k; ++j)
        integral[i][j] = integral[i][j - 1] + f[i][j - 1] * (t[j] - t[j - 1]);
    for (std::size_t i = 0; i + 1 < d; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (integral[i][j] < integral[i + 1][j] - tol) return false;
    return true;
  }

  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = k; j-- > 1;)
      integral[i][j - 1] = integral[i][j] + (1.0 - f[i][j - 1]) * (t[j] - t[j - 1]);
  for (std::size_t i = 0; i + 1 < d; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (integral[i][j] > integral[i + 1][j] + tol) return false;
  return true;
}

}  // namespace stochord

#endif  // STOCHORD_ESTIMATORS_HPP
