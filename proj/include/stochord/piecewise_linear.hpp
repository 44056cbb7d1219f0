#ifndef STOCHORD_PIECEWISE_LINEAR_HPP
#define STOCHORD_PIECEWISE_LINEAR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stochord/monotone.hpp"

namespace stochord {

// Continuous piecewise-linear function given by its knot values, with a
// constant (or linear) extension to the left of the first knot and a linear
// extension of configurable slope to the right of the last one.
struct PiecewiseLinearFn {
  std::vector<double> knots;   // strictly increasing, at least 2
  std::vector<double> values;  // f(knots[i])
  bool left_constant = true;   // f(y) = values.front() for y < knots.front()
  double right_slope = 0.0;    // slope for y > knots.back()

  PiecewiseLinearFn(std::vector<double> t, std::vector<double> v)
      : knots(std::move(t)), values(std::move(v)) {
    validate();
    const std::size_t k = knots.size();
    right_slope = (values[k - 1] - values[k - 2]) / (knots[k - 1] - knots[k - 2]);
  }

  PiecewiseLinearFn(std::vector<double> t, std::vector<double> v, bool left_const,
                    double right_ext_slope)
      : knots(std::move(t)), values(std::move(v)), left_constant(left_const),
        right_slope(right_ext_slope) {
    validate();
  }

  void validate() const {
    if (knots.size() < 2) throw std::domain_error("PiecewiseLinearFn: need at least 2 knots");
    if (knots.size() != values.size())
      throw std::domain_error("PiecewiseLinearFn: knots/values length mismatch");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i]) || !std::isfinite(values[i]))
        throw std::domain_error("PiecewiseLinearFn: non-finite entry");
      if (i > 0 && !(knots[i - 1] < knots[i]))
        throw std::domain_error("PiecewiseLinearFn: knots must be strictly increasing");
    }
  }

  double operator()(double y) const {
    if (y <= knots.front()) {
      if (left_constant || y == knots.front()) return values.front();
      const double s = (values[1] - values[0]) / (knots[1] - knots[0]);
      return values.front() + s * (y - knots.front());
    }
    if (y >= knots.back()) return values.back() + right_slope * (y - knots.back());
    const auto it = std::upper_bound(knots.begin(), knots.end(), y);
    const std::size_t j = static_cast<std::size_t>(it - knots.begin()) - 1;
    const double lambda = (y - knots[j]) / (knots[j + 1] - knots[j]);
    return values[j] + lambda * (values[j + 1] - values[j]);
  }

  std::vector<double> chord_slopes() const {
    std::vector<double> s(knots.size() - 1);
    for (std::size_t j = 0; j + 1 < knots.size(); ++j)
      s[j] = (values[j + 1] - values[j]) / (knots[j + 1] - knots[j]);
    return s;
  }
};

struct SlopeFit {
  std::vector<double> slopes;   // right-hand slopes of the convex minorant, nondecreasing
  std::vector<double> weights;  // knot spacings used as regression weights
};

// Right-hand slopes of the greatest convex minorant at knots t_1..t_{k-1}:
// the isotonic regression of the raw chord slopes with the knot spacings as
// weights.
inline SlopeFit gcm_slopes(const PiecewiseLinearFn& f) {
  f.validate();
  SlopeFit out;
  out.slopes = f.chord_slopes();
  out.weights.resize(out.slopes.size());
  for (std::size_t j = 0; j + 1 < f.knots.size(); ++j)
    out.weights[j] = f.knots[j + 1] - f.knots[j];
  out.slopes = monotone_fit(WeightedSeries(out.slopes, out.weights), Direction::Increasing);
  return out;
}

// Values of the greatest convex minorant at the knots of f, obtained by
// integrating the fitted slopes from (t_1, f(t_1)). The minorant touches f at
// every boundary between slope blocks, so no separate anchoring is needed.
inline std::vector<double> gcm_knot_values(const PiecewiseLinearFn& f) {
  const SlopeFit fit = gcm_slopes(f);
  std::vector<double> g(f.knots.size());
  g[0] = f.values[0];
  for (std::size_t j = 0; j + 1 < f.knots.size(); ++j)
    g[j + 1] = g[j] + fit.slopes[j] * (f.knots[j + 1] - f.knots[j]);
  return g;
}

// Greatest convex minorant of f evaluated at y (clamped linear extension
// outside [t_1, t_k] matching f's own extensions).
inline double gcm_evaluate(const PiecewiseLinearFn& f, double y) {
  PiecewiseLinearFn g(f.knots, gcm_knot_values(f), f.left_constant, f.right_slope);
  return g(y);
}

struct MarshallGap {
  double gap_f = 0.0;    // sup |f - h| over the union of knots
  double gap_gcm = 0.0;  // sup |GCM(f) - h| over the union of knots
};

// Sup-norm distances of f and of its greatest convex minorant to a convex
// comparison function h, evaluated on the union of knot sets restricted to
// the overlap of the two domains. All three functions are piecewise linear
// with knots in that union, so the suprema are exact.
inline MarshallGap marshall_gap(const PiecewiseLinearFn& f, const PiecewiseLinearFn& h) {
  f.validate();
  h.validate();
  {
    // Convexity check allows slack at the level of slope rounding noise.
    const std::vector<double> hs = h.chord_slopes();
    double scale = 1.0;
    for (double s : hs) scale = std::max(scale, std::abs(s));
    for (std::size_t j = 1; j < hs.size(); ++j)
      if (hs[j] < hs[j - 1] - 1e-10 * scale)
        throw std::domain_error("marshall_gap: h is not convex");
  }

  const double lo = std::max(f.knots.front(), h.knots.front());
  const double hi = std::min(f.knots.back(), h.knots.back());
  if (!(lo <= hi)) throw std::domain_error("marshall_gap: disjoint knot ranges");

  std::vector<double> pts;
  pts.reserve(f.knots.size() + h.knots.size() + 2);
  pts.push_back(lo);
  pts.push_back(hi);
  for (double t : f.knots)
    if (t > lo && t < hi) pts.push_back(t);
  for (double t : h.knots)
    if (t > lo && t < hi) pts.push_back(t);
  std::sort(pts.begin(), pts.end());

  PiecewiseLinearFn g(f.knots, gcm_knot_values(f), f.left_constant, f.right_slope);
  MarshallGap gap;
  for (double t : pts) {
    const double ht = h(t);
    gap.gap_f = std::max(gap.gap_f, std::abs(f(t) - ht));
    gap.gap_gcm = std::max(gap.gap_gcm, std::abs(g(t) - ht));
  }
  return gap;
}

}  // namespace stochord

#endif  // STOCHORD_PIECEWISE_LINEAR_HPP
