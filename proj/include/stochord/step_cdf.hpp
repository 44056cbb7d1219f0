#ifndef STOCHORD_STEP_CDF_HPP
#define STOCHORD_STEP_CDF_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stochord {

// Right-continuous step distribution function: F(y) includes the jump at y,
// F is 0 strictly left of the first jump point and exactly 1 from the last
// cumulative value on. Zero-mass points are permitted (cum is nondecreasing,
// not strictly increasing), which keeps estimators on a shared grid.
class StepCdf {
 public:
  StepCdf(std::vector<double> jump_points, std::vector<double> cum_probs)
      : points_(std::move(jump_points)), cum_(std::move(cum_probs)) {
    validate();
  }

  static StepCdf dirac(double c) { return StepCdf({c}, {1.0}); }

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& cum() const { return cum_; }

  double operator()(double y) const {
    const auto it = std::upper_bound(points_.begin(), points_.end(), y);
    if (it == points_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - points_.begin()) - 1];
  }

  // Generalized inverse inf{y : F(y) >= gamma}, gamma in (0,1).
  double quantile(double gamma) const {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw std::domain_error("StepCdf::quantile: gamma must be in (0,1)");
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), gamma);
    return points_[static_cast<std::size_t>(it - cum_.begin())];
  }

  std::vector<double> masses() const {
    std::vector<double> m(cum_.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < cum_.size(); ++i) {
      m[i] = cum_[i] - prev;
      prev = cum_[i];
    }
    return m;
  }

  // F evaluated at a sorted query grid in one forward pass.
  std::vector<double> values_at_sorted(const std::vector<double>& sorted_queries) const {
    std::vector<double> out(sorted_queries.size());
    std::size_t j = 0;
    double current = 0.0;
    for (std::size_t q = 0; q < sorted_queries.size(); ++q) {
      while (j < points_.size() && points_[j] <= sorted_queries[q]) current = cum_[j++];
      out[q] = current;
    }
    return out;
  }

 private:
  void validate() const {
    if (points_.empty() || points_.size() != cum_.size())
      throw std::domain_error("StepCdf: empty or mismatched jump/cumulative arrays");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i]) || !std::isfinite(cum_[i]))
        throw std::domain_error("StepCdf: non-finite entry");
      if (i > 0 && !(points_[i - 1] < points_[i]))
        throw std::domain_error("StepCdf: jump points must be strictly increasing");
      if (cum_[i] < 0.0 || cum_[i] > 1.0 || (i > 0 && cum_[i] < cum_[i - 1]))
        throw std::domain_error("StepCdf: cumulative probabilities must be nondecreasing in [0,1]");
    }
    if (cum_.back() != 1.0) throw std::domain_error("StepCdf: final cumulative value must be 1");
  }

  std::vector<double> points_;
  std::vector<double> cum_;
};

}  // namespace stochord

#endif  // STOCHORD_STEP_CDF_HPP
