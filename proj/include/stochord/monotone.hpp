#ifndef STOCHORD_MONOTONE_HPP
#define STOCHORD_MONOTONE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stochord {

enum class Direction { Increasing, Decreasing };

// One value and one strictly positive weight per position.
struct WeightedSeries {
  std::vector<double> values;
  std::vector<double> weights;

  WeightedSeries() = default;
  WeightedSeries(std::vector<double> v, std::vector<double> w)
      : values(std::move(v)), weights(std::move(w)) {}

  void validate() const {
    if (values.empty()) throw std::domain_error("WeightedSeries: empty input");
    if (values.size() != weights.size())
      throw std::domain_error("WeightedSeries: values/weights length mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) throw std::domain_error("WeightedSeries: non-finite value");
      if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
        throw std::domain_error("WeightedSeries: weights must be strictly positive");
    }
  }
};

namespace detail {

// Pool-adjacent-violators on an already validated series. Blocks are merged on
// strict violations only, so monotone inputs (ties included) are returned
// unchanged and the block means of the result are ordered in the requested
// direction without any epsilon.
inline std::vector<double> pava(const std::vector<double>& values,
                                const std::vector<double>& weights, Direction dir) {
  const std::size_t d = values.size();
  std::vector<std::size_t> block_end(d);  // inclusive end index per block
  std::vector<double> block_weight(d), block_mean(d);
  std::size_t top = 0;  // number of blocks on the stack

  const auto violates = [dir](double previous, double next) {
    return dir == Direction::Increasing ? next < previous : next > previous;
  };

  for (std::size_t i = 0; i < d; ++i) {
    block_end[top] = i;
    block_weight[top] = weights[i];
    block_mean[top] = values[i];
    ++top;
    while (top > 1 && violates(block_mean[top - 2], block_mean[top - 1])) {
      const double w = block_weight[top - 2] + block_weight[top - 1];
      block_mean[top - 2] =
          (block_mean[top - 2] * block_weight[top - 2] + block_mean[top - 1] * block_weight[top - 1]) / w;
      block_weight[top - 2] = w;
      block_end[top - 2] = block_end[top - 1];
      --top;
    }
  }

  std::vector<double> fit(d);
  std::size_t lo = 0;
  for (std::size_t b = 0; b < top; ++b) {
    for (std::size_t i = lo; i <= block_end[b]; ++i) fit[i] = block_mean[b];
    lo = block_end[b] + 1;
  }
  return fit;
}

}  // namespace detail

// Weighted least-squares projection onto the monotone cone (nondecreasing for
// Increasing, nonincreasing for Decreasing), computed by PAVA in O(d).
inline std::vector<double> monotone_fit(const WeightedSeries& series, Direction dir) {
  series.validate();
  return detail::pava(series.values, series.weights, dir);
}

// Reference oracle evaluating the min-max representation of the antitonic
// regression directly: for Decreasing, fit_i = min_{k <= i} max_{j >= k} of
// the weighted mean of values k..j. Increasing is obtained by negation
// symmetry. O(d^2); intended for small inputs and cross-checks.
inline std::vector<double> minmax_fit(const WeightedSeries& series, Direction dir) {
  series.validate();
  if (dir == Direction::Increasing) {
    WeightedSeries negated = series;
    for (double& v : negated.values) v = -v;
    std::vector<double> fit = minmax_fit(negated, Direction::Decreasing);
    for (double& v : fit) v = -v;
    return fit;
  }

  const std::size_t d = series.values.size();
  std::vector<double> cumw(d + 1, 0.0), cumwv(d + 1, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    cumw[i + 1] = cumw[i] + series.weights[i];
    cumwv[i + 1] = cumwv[i] + series.weights[i] * series.values[i];
  }
  const auto wmean = [&](std::size_t k, std::size_t j) {
    return (cumwv[j + 1] - cumwv[k]) / (cumw[j + 1] - cumw[k]);
  };

  // max over j >= k of the mean starting at k, then a running min over k <= i.
  std::vector<double> max_from(d);
  for (std::size_t k = 0; k < d; ++k) {
    double m = wmean(k, k);
    for (std::size_t j = k + 1; j < d; ++j) m = std::max(m, wmean(k, j));
    max_from[k] = m;
  }
  std::vector<double> fit(d);
  double running_min = max_from[0];
  fit[0] = running_min;
  for (std::size_t i = 1; i < d; ++i) {
    running_min = std::min(running_min, max_from[i]);
    fit[i] = running_min;
  }
  return fit;
}

}  // namespace stochord

#endif  // STOCHORD_MONOTONE_HPP
