#ifndef STOCHORD_METRICS_HPP
#define STOCHORD_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stochord/distributions.hpp"
#include "stochord/step_cdf.hpp"

namespace stochord {

namespace detail {

// Adaptive Simpson on a smooth integrand.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 42);
}

}  // namespace detail

// Exact L1 distance between two step CDFs (both piecewise constant, so the
// integral is a finite sum over the merged breakpoints).
inline double l1_between(const StepCdf& a, const StepCdf& b) {
  std::vector<double> pts;
  pts.reserve(a.points().size() + b.points().size());
  std::merge(a.points().begin(), a.points().end(), b.points().begin(), b.points().end(),
             std::back_inserter(pts));
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::vector<double> fa = a.values_at_sorted(pts);
  const std::vector<double> fb = b.values_at_sorted(pts);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j)
    acc += std::abs(fa[j] - fb[j]) * (pts[j + 1] - pts[j]);
  return acc;
}

// Integral of |est - cdf| over [lo, hi] extended to the estimator's support,
// assuming est = 0 left of its first jump and 1 from its last jump on, and
// cdf nondecreasing. Each constant piece of est crosses the true CDF at most
// once; the crossing is bracketed by bisection and the smooth parts are
// integrated by adaptive Simpson with absolute tolerance tol.
inline double l1_vs_cdf(const StepCdf& est, const std::function<double(double)>& cdf, double lo,
                        double hi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("l1_vs_cdf: tol must be positive");
  lo = std::min(lo, est.points().front());
  hi = std::max(hi, est.points().back());

  std::vector<double> brk;
  brk.reserve(est.points().size() + 2);
  brk.push_back(lo);
  for (double t : est.points())
    if (t > lo && t < hi) brk.push_back(t);
  brk.push_back(hi);
  const std::vector<double> level = est.values_at_sorted(brk);
  const std::size_t nseg = brk.size() - 1;
  const double seg_tol = tol / static_cast<double>(std::max<std::size_t>(nseg, 1));

  double acc = 0.0;
  double f_left = cdf(brk[0]);
  for (std::size_t j = 0; j < nseg; ++j) {
    const double a = brk[j], b = brk[j + 1];
    const double c = level[j];
    const double fa = f_left, fb = cdf(b);
    f_left = fb;
    if (b <= a) continue;
    if (fb <= c) {
      acc += c * (b - a) - detail::integrate(cdf, a, b, seg_tol);
    } else if (fa >= c) {
      acc += detail::integrate(cdf, a, b, seg_tol) - c * (b - a);
    } else {
      double cl = a, ch = b;
      for (int it = 0; it < 80 && ch - cl > 1e-13 * std::max(1.0, std::abs(ch)); ++it) {
        const double mid = 0.5 * (cl + ch);
        if (cdf(mid) >= c) ch = mid;
        else cl = mid;
      }
      const double cross = 0.5 * (cl + ch);
      acc += c * (cross - a) - detail::integrate(cdf, a, cross, 0.5 * seg_tol);
      acc += detail::integrate(cdf, cross, b, 0.5 * seg_tol) - c * (b - cross);
    }
  }
  return acc;
}

// L1 distance between an estimated CDF and the true conditional CDF of a
// simulation setting at covariate x. Discrete settings are summed exactly;
// continuous ones integrate over the 1e-8 .. 1-1e-8 quantile range (the
// omitted tail mass is below 2e-8 times the integration range).
inline double l1_distance(const StepCdf& est, const SimSetting& setting, double x,
                          double tol = 1e-6) {
  if (is_discrete(setting)) {
    std::vector<double> pts(SimSetting::trials + 1);
    std::vector<double> cum(SimSetting::trials + 1);
    double acc = 0.0;
    for (int k = 0; k <= SimSetting::trials; ++k) {
      pts[k] = k;
      acc += betabin_pmf(setting, x, k);
      cum[k] = std::min(acc, 1.0);
    }
    cum.back() = 1.0;
    return l1_between(est, StepCdf(std::move(pts), std::move(cum)));
  }
  const double lo = true_quantile(setting, x, 1e-8);
  const double hi = true_quantile(setting, x, 1.0 - 1e-8);
  return l1_vs_cdf(est, [&](double y) { return true_cdf(setting, x, y); }, lo, hi, tol);
}

// |est^{-1}(gamma) - F^{-1}(gamma)| against the true conditional quantile.
inline double quantile_abs_error(const StepCdf& est, const SimSetting& setting, double x,
                                 double gamma) {
  return std::abs(est.quantile(gamma) - true_quantile(setting, x, gamma));
}

}  // namespace stochord

#endif  // STOCHORD_METRICS_HPP
