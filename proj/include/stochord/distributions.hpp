#ifndef STOCHORD_DISTRIBUTIONS_HPP
#define STOCHORD_DISTRIBUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "stochord/estimators.hpp"
#include "stochord/rng.hpp"

namespace stochord {

// Ground-truth conditional distributions for the simulation studies, each
// parameterized by a covariate x in [1, 4]:
//   StudentLocScale:  Y = sqrt(x) + s(x) * eps, eps ~ Student(df = 10),
//                     s(x) = 1 + (x - 2) / sqrt(1 + (x - 2)^2)   (icx in x)
//   GammaXY:          Y ~ Gamma(shape = x, rate = x^{9/10})       (icv in x)
//   BetaBinomial:     Y ~ BetaBin(trials = 50, a = x^3, b = 1 + x^3) (icv in x)
enum class SettingKind { StudentLocScale, GammaXY, BetaBinomial };

struct SimSetting {
  SettingKind kind = SettingKind::GammaXY;

  static SimSetting student() { return {SettingKind::StudentLocScale}; }
  static SimSetting gamma() { return {SettingKind::GammaXY}; }
  static SimSetting beta_binomial() { return {SettingKind::BetaBinomial}; }

  static constexpr double student_df = 10.0;
  static constexpr int trials = 50;

  std::string name() const {
    switch (kind) {
      case SettingKind::StudentLocScale: return "student";
      case SettingKind::GammaXY: return "gamma";
      case SettingKind::BetaBinomial: return "betabin";
    }
    return "?";
  }

  static SimSetting from_name(const std::string& name) {
    if (name == "student") return student();
    if (name == "gamma") return gamma();
    if (name == "betabin" || name == "beta_binomial") return beta_binomial();
    throw std::invalid_argument("unknown simulation setting: " + name);
  }
};

inline bool is_discrete(const SimSetting& s) { return s.kind == SettingKind::BetaBinomial; }

// The order in which the setting's conditional laws are increasing.
inline OrderConstraint natural_order(const SimSetting& s) {
  return s.kind == SettingKind::StudentLocScale ? OrderConstraint::Icx : OrderConstraint::Icv;
}

namespace detail {

inline void check_covariate(double x) {
  if (!(x >= 1.0 && x <= 4.0))
    throw std::domain_error("SimSetting: covariate must lie in [1, 4]");
}

inline double student_location(double x) { return std::sqrt(x); }
inline double student_scale(double x) {
  return 1.0 + (x - 2.0) / std::sqrt(1.0 + (x - 2.0) * (x - 2.0));
}
inline double gamma_shape(double x) { return x; }
inline double gamma_rate(double x) { return std::pow(x, 0.9); }
inline double betabin_a(double x) { return x * x * x; }
inline double betabin_b(double x) { return 1.0 + x * x * x; }

inline double betabin_log_pmf(double a, double b, int k) {
  const int n = SimSetting::trials;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         std::lgamma(k + a) + std::lgamma(n - k + b) - std::lgamma(n + a + b) +
         std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

}  // namespace detail

inline double true_cdf(const SimSetting& s, double x, double y) {
  detail::check_covariate(x);
  if (!std::isfinite(y)) return y > 0 ? 1.0 : 0.0;
  switch (s.kind) {
    case SettingKind::StudentLocScale: {
      const boost::math::students_t_distribution<double> t(SimSetting::student_df);
      return boost::math::cdf(t, (y - detail::student_location(x)) / detail::student_scale(x));
    }
    case SettingKind::GammaXY: {
      if (y <= 0.0) return 0.0;
      return boost::math::gamma_p(detail::gamma_shape(x), detail::gamma_rate(x) * y);
    }
    case SettingKind::BetaBinomial: {
      if (y < 0.0) return 0.0;
      if (y >= SimSetting::trials) return 1.0;
      const double a = detail::betabin_a(x), b = detail::betabin_b(x);
      const int kmax = static_cast<int>(std::floor(y));
      double acc = 0.0;
      for (int k = 0; k <= kmax; ++k) acc += std::exp(detail::betabin_log_pmf(a, b, k));
      return std::min(acc, 1.0);
    }
  }
  throw std::logic_error("true_cdf: unknown setting");
}

inline double betabin_pmf(const SimSetting& s, double x, int k) {
  detail::check_covariate(x);
  if (s.kind != SettingKind::BetaBinomial)
    throw std::invalid_argument("betabin_pmf: not a beta-binomial setting");
  if (k < 0 || k > SimSetting::trials) return 0.0;
  return std::exp(detail::betabin_log_pmf(detail::betabin_a(x), detail::betabin_b(x), k));
}

// Generalized inverse of the true CDF: bracketed bisection for the continuous
// settings, a scan over the support for the discrete one.
inline double true_quantile(const SimSetting& s, double x, double gamma) {
  detail::check_covariate(x);
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::domain_error("true_quantile: gamma must be in (0,1)");
  if (s.kind == SettingKind::BetaBinomial) {
    const double a = detail::betabin_a(x), b = detail::betabin_b(x);
    double acc = 0.0;
    for (int k = 0; k <= SimSetting::trials; ++k) {
      acc += std::exp(detail::betabin_log_pmf(a, b, k));
      if (acc >= gamma) return static_cast<double>(k);
    }
    return static_cast<double>(SimSetting::trials);
  }

  double lo, hi;
  if (s.kind == SettingKind::GammaXY) {
    lo = 0.0;
    hi = 1.0;
    while (true_cdf(s, x, hi) < gamma) hi *= 2.0;
  } else {
    lo = detail::student_location(x) - 1.0;
    hi = detail::student_location(x) + 1.0;
    const double scale = detail::student_scale(x);
    double step = scale;
    while (true_cdf(s, x, lo) > gamma) { lo -= step; step *= 2.0; }
    step = scale;
    while (true_cdf(s, x, hi) < gamma) { hi += step; step *= 2.0; }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (true_cdf(s, x, mid) >= gamma) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline double true_mean(const SimSetting& s, double x) {
  detail::check_covariate(x);
  switch (s.kind) {
    case SettingKind::StudentLocScale:
      return detail::student_location(x);  // df > 1, eps symmetric
    case SettingKind::GammaXY:
      return detail::gamma_shape(x) / detail::gamma_rate(x);
    case SettingKind::BetaBinomial: {
      const double a = detail::betabin_a(x), b = detail::betabin_b(x);
      return SimSetting::trials * a / (a + b);
    }
  }
  throw std::logic_error("true_mean: unknown setting");
}

// M_x(y) = E[(y - Y)_+ | X = x], the integrated conditional CDF.
inline double true_integrated_cdf(const SimSetting& s, double x, double y) {
  detail::check_covariate(x);
  switch (s.kind) {
    case SettingKind::GammaXY: {
      if (y <= 0.0) return 0.0;
      const double k = detail::gamma_shape(x), r = detail::gamma_rate(x);
      // integral of t f(t) over (0, y] equals (k/r) * P(k+1, r y)
      return y * boost::math::gamma_p(k, r * y) - (k / r) * boost::math::gamma_p(k + 1.0, r * y);
    }
    case SettingKind::StudentLocScale: {
      const boost::math::students_t_distribution<double> t(SimSetting::student_df);
      const double loc = detail::student_location(x), sc = detail::student_scale(x);
      const double z = (y - loc) / sc;
      const double nu = SimSetting::student_df;
      // integral of u f_nu(u) over (-inf, z] = -f_nu(z) (nu + z^2) / (nu - 1)
      const double partial = -boost::math::pdf(t, z) * (nu + z * z) / (nu - 1.0);
      return (y - loc) * boost::math::cdf(t, z) - sc * partial;
    }
    case SettingKind::BetaBinomial: {
      if (y <= 0.0) return 0.0;
      const double a = detail::betabin_a(x), b = detail::betabin_b(x);
      double acc = 0.0;
      const int kmax = std::min(SimSetting::trials, static_cast<int>(std::ceil(y)) - 1);
      for (int k = 0; k <= kmax; ++k)
        acc += (y - k) * std::exp(detail::betabin_log_pmf(a, b, k));
      return acc;
    }
  }
  throw std::logic_error("true_integrated_cdf: unknown setting");
}

// E[(Y - y)_+ | X = x] = M_x(y) + E[Y | X = x] - y.
inline double true_upper_integral(const SimSetting& s, double x, double y) {
  return true_integrated_cdf(s, x, y) + true_mean(s, x) - y;
}

namespace detail {

inline double sample_normal(RandomStream& stream) {
  const double u1 = stream.next_positive_double();
  const double u2 = stream.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// Marsaglia-Tsang rejection sampler, valid for shape >= 1 (covariates in
// [1, 4] keep every shape used here at or above 1).
inline double sample_gamma(double shape, double rate, RandomStream& stream) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double z = sample_normal(stream);
    const double t = 1.0 + c * z;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = stream.next_positive_double();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v / rate;
  }
}

inline double sample_student_eps(RandomStream& stream) {
  const double z = sample_normal(stream);
  const double chi2 = 2.0 * sample_gamma(SimSetting::student_df / 2.0, 1.0, stream);
  return z / std::sqrt(chi2 / SimSetting::student_df);
}

inline double sample_beta(double a, double b, RandomStream& stream) {
  const double g1 = sample_gamma(a, 1.0, stream);
  const double g2 = sample_gamma(b, 1.0, stream);
  return g1 / (g1 + g2);
}

}  // namespace detail

// One draw from the conditional law of Y given X = x.
inline double sample(const SimSetting& s, double x, RandomStream& stream) {
  detail::check_covariate(x);
  switch (s.kind) {
    case SettingKind::StudentLocScale:
      return detail::student_location(x) +
             detail::student_scale(x) * detail::sample_student_eps(stream);
    case SettingKind::GammaXY:
      return detail::sample_gamma(detail::gamma_shape(x), detail::gamma_rate(x), stream);
    case SettingKind::BetaBinomial: {
      const double p = detail::sample_beta(detail::betabin_a(x), detail::betabin_b(x), stream);
      int k = 0;
      for (int t = 0; t < SimSetting::trials; ++t)
        if (stream.next_double() < p) ++k;
      return static_cast<double>(k);
    }
  }
  throw std::logic_error("sample: unknown setting");
}

// Covariate draw, uniform on [1, 4].
inline double sample_covariate(RandomStream& stream) { return 1.0 + 3.0 * stream.next_double(); }

}  // namespace stochord

#endif  // STOCHORD_DISTRIBUTIONS_HPP
