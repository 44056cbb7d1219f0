#ifndef STOCHORD_HARNESS_HPP
#define STOCHORD_HARNESS_HPP

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stochord/distributions.hpp"
#include "stochord/ensemble.hpp"
#include "stochord/estimators.hpp"
#include "stochord/metrics.hpp"
#include "stochord/rng.hpp"
#include "stochord/sample.hpp"

namespace stochord {

struct EnsembleSpec {
  std::size_t n_subsamples = 50;
  double fraction = 0.5;  // subsample size = round(fraction * n)
};

enum class DesignKind { KSample, Continuous };

// Declarative Monte Carlo experiment: dataset design, estimator pair to
// compare, optional subagging variants, and evaluation points.
struct ExperimentConfig {
  SimSetting setting;
  DesignKind design = DesignKind::KSample;
  std::vector<double> levels = {1.0, 4.0};  // KSample
  std::size_t per_group_n = 30;             // KSample
  std::size_t n = 500;                      // Continuous
  OrderConstraint method = OrderConstraint::Icv;
  OrderConstraint competitor = OrderConstraint::Ecdf;
  std::optional<EnsembleSpec> ensemble;  // adds subagged variants of both
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  std::vector<double> eval_x;  // defaults: levels (KSample) / interior grid (Continuous)
  std::vector<double> gamma_levels = {0.1, 0.5, 0.9};
  double l1_tol = 1e-4;
  std::size_t threads = 0;      // 0 = hardware concurrency
  std::size_t audit_every = 100;  // order-invariant audit cadence (0 = off)

  // Interior evaluation grid mirroring the theory's boundary margin.
  static std::vector<double> interior_grid(std::size_t count = 25, double margin = 0.15) {
    std::vector<double> xs(count);
    const double lo = 1.0 + margin, hi = 4.0 - margin;
    for (std::size_t i = 0; i < count; ++i)
      xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return xs;
  }

  void validate() const {
    if (replications < 1) throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
    for (double g : gamma_levels)
      if (!(g > 0.0 && g < 1.0))
        throw std::invalid_argument("ExperimentConfig: gamma levels must lie in (0,1)");
    if (design == DesignKind::KSample) {
      if (levels.empty() || per_group_n == 0)
        throw std::invalid_argument("ExperimentConfig: K-sample design needs levels and per-group n");
      for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] >= 1.0 && levels[i] <= 4.0))
          throw std::invalid_argument("ExperimentConfig: levels must lie in [1, 4]");
        if (i > 0 && !(levels[i - 1] < levels[i]))
          throw std::invalid_argument("ExperimentConfig: levels must be strictly increasing");
      }
    } else if (n < 2) {
      throw std::invalid_argument("ExperimentConfig: continuous design needs n >= 2");
    }
    if (ensemble) {
      if (ensemble->n_subsamples == 0 || !(ensemble->fraction > 0.0 && ensemble->fraction <= 1.0))
        throw std::invalid_argument("ExperimentConfig: invalid ensemble spec");
    }
  }
};

// Aggregated error table: per estimator variant, evaluation point and metric,
// the Monte Carlo mean and standard error, plus the relative improvement
// (baseline - variant) / baseline against the paired baseline variant.
struct MetricsReport {
  std::string setting;
  std::string design;
  std::size_t replications = 0;
  std::vector<std::string> estimators;
  std::vector<std::size_t> baseline;  // index into estimators; npos = none
  std::vector<double> eval_x;
  std::vector<std::string> metrics;
  // Indexed [estimator][x][metric].
  std::vector<std::vector<std::vector<double>>> mean, se, rel, rel_se;
  // Raw per-replication errors, indexed [estimator][x][metric][rep]; kept in
  // memory for paired contrasts, not serialized.
  std::vector<std::vector<std::vector<std::vector<double>>>> raw;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t estimator_index(const std::string& name) const {
    for (std::size_t v = 0; v < estimators.size(); ++v)
      if (estimators[v] == name) return v;
    throw std::out_of_range("MetricsReport: unknown estimator " + name);
  }
  std::size_t metric_index(const std::string& name) const {
    for (std::size_t m = 0; m < metrics.size(); ++m)
      if (metrics[m] == name) return m;
    throw std::out_of_range("MetricsReport: unknown metric " + name);
  }
};

namespace detail {

inline std::string metric_label(double gamma) {
  std::string s = "dq_" + std::to_string(gamma);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.push_back('0');
  return s;
}

struct Variant {
  std::string name;
  OrderConstraint order;
  bool subagged = false;
  std::size_t baseline = MetricsReport::npos;
};

inline std::vector<Variant> experiment_variants(const ExperimentConfig& cfg) {
  std::vector<Variant> v;
  v.push_back({order_name(cfg.method), cfg.method, false, 1});
  v.push_back({order_name(cfg.competitor), cfg.competitor, false, MetricsReport::npos});
  if (cfg.ensemble) {
    v.push_back({order_name(cfg.method) + "_sbg", cfg.method, true, 3});
    v.push_back({order_name(cfg.competitor) + "_sbg", cfg.competitor, true, MetricsReport::npos});
  }
  return v;
}

inline std::vector<std::pair<double, double>> draw_dataset(const ExperimentConfig& cfg,
                                                           const RandomStream& rep_stream) {
  std::vector<std::pair<double, double>> pairs;
  if (cfg.design == DesignKind::KSample) {
    pairs.reserve(cfg.levels.size() * cfg.per_group_n);
    std::size_t obs = 0;
    for (double level : cfg.levels)
      for (std::size_t j = 0; j < cfg.per_group_n; ++j, ++obs) {
        RandomStream s = rep_stream.substream(obs);
        pairs.emplace_back(level, sample(cfg.setting, level, s));
      }
  } else {
    pairs.reserve(cfg.n);
    for (std::size_t obs = 0; obs < cfg.n; ++obs) {
      RandomStream s = rep_stream.substream(obs);
      const double x = sample_covariate(s);
      pairs.emplace_back(x, sample(cfg.setting, x, s));
    }
  }
  return pairs;
}

inline void run_over_replications(std::size_t replications, std::size_t threads,
                                  const std::function<void(std::size_t)>& body) {
  std::size_t nthreads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  if (nthreads == 0) nthreads = 1;
  nthreads = std::min(nthreads, replications);
  if (nthreads <= 1) {
    for (std::size_t rep = 0; rep < replications; ++rep) body(rep);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t rep = next.fetch_add(1);
        if (rep >= replications) return;
        try {
          body(rep);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline void finalize_report(MetricsReport& report) {
  const std::size_t nv = report.estimators.size();
  const std::size_t nx = report.eval_x.size();
  const std::size_t nm = report.metrics.size();
  const double r = static_cast<double>(report.replications);
  report.mean.assign(nv, std::vector<std::vector<double>>(nx, std::vector<double>(nm, 0.0)));
  report.se = report.mean;
  report.rel = report.mean;
  report.rel_se = report.mean;

  const auto moments = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v;
    const double m = s / r;
    double q = 0.0;
    for (double v : a) q += (v - m) * (v - m);
    const double var = a.size() > 1 ? q / (r - 1.0) : 0.0;
    return std::pair<double, double>(m, var);
  };

  for (std::size_t v = 0; v < nv; ++v)
    for (std::size_t xi = 0; xi < nx; ++xi)
      for (std::size_t mi = 0; mi < nm; ++mi) {
        const auto [m, var] = moments(report.raw[v][xi][mi]);
        report.mean[v][xi][mi] = m;
        report.se[v][xi][mi] = std::sqrt(var / r);
      }

  for (std::size_t v = 0; v < nv; ++v) {
    const std::size_t b = report.baseline[v];
    if (b == MetricsReport::npos) continue;
    for (std::size_t xi = 0; xi < nx; ++xi)
      for (std::size_t mi = 0; mi < nm; ++mi) {
        const double mb = report.mean[b][xi][mi];
        const double mv = report.mean[v][xi][mi];
        if (!(mb > 0.0)) continue;
        report.rel[v][xi][mi] = (mb - mv) / mb;
        // Delta method for 1 - mv/mb with paired replications.
        const auto& av = report.raw[v][xi][mi];
        const auto& ab = report.raw[b][xi][mi];
        double cross = 0.0;
        for (std::size_t rep = 0; rep < av.size(); ++rep)
          cross += (av[rep] - mv) * (ab[rep] - mb);
        const double cov = av.size() > 1 ? cross / (r - 1.0) : 0.0;
        const double var_v = report.se[v][xi][mi] * report.se[v][xi][mi];
        const double var_b = report.se[b][xi][mi] * report.se[b][xi][mi];
        const double ratio = mv / mb;
        const double var_ratio =
            ratio * ratio * (var_v / (mv * mv) + var_b / (mb * mb) - 2.0 * cov / (r * mv * mb));
        report.rel_se[v][xi][mi] = var_ratio > 0.0 ? std::sqrt(var_ratio) : 0.0;
      }
  }
}

}  // namespace detail

// Shared Monte Carlo driver for the K-sample and continuous designs: per
// replication, draw a dataset, fit every estimator variant, and record the L1
// distance and quantile absolute errors at the evaluation points.
inline MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<detail::Variant> variants = detail::experiment_variants(cfg);
  MetricsReport report;
  report.setting = cfg.setting.name();
  report.design = cfg.design == DesignKind::KSample ? "ksample" : "continuous";
  report.replications = cfg.replications;
  report.eval_x = cfg.eval_x;
  if (report.eval_x.empty())
    report.eval_x = cfg.design == DesignKind::KSample ? cfg.levels
                                                      : ExperimentConfig::interior_grid();
  report.metrics.push_back("l1");
  for (double g : cfg.gamma_levels) report.metrics.push_back(detail::metric_label(g));
  for (const auto& v : variants) {
    report.estimators.push_back(v.name);
    report.baseline.push_back(v.baseline);
  }

  const std::size_t nx = report.eval_x.size();
  const std::size_t nm = report.metrics.size();
  report.raw.assign(variants.size(),
                    std::vector<std::vector<std::vector<double>>>(
                        nx, std::vector<std::vector<double>>(
                                nm, std::vector<double>(cfg.replications, 0.0))));

  // True quantiles are fixed per (x, gamma); cache them up front.
  std::vector<std::vector<double>> tq(nx, std::vector<double>(cfg.gamma_levels.size()));
  for (std::size_t xi = 0; xi < nx; ++xi)
    for (std::size_t gi = 0; gi < cfg.gamma_levels.size(); ++gi)
      tq[xi][gi] = true_quantile(cfg.setting, report.eval_x[xi], cfg.gamma_levels[gi]);

  const std::size_t total_n =
      cfg.design == DesignKind::KSample ? cfg.levels.size() * cfg.per_group_n : cfg.n;
  const RandomStream root(cfg.seed);

  detail::run_over_replications(cfg.replications, cfg.threads, [&](std::size_t rep) {
    const RandomStream rep_stream = root.substream(rep);
    const std::vector<std::pair<double, double>> pairs = detail::draw_dataset(cfg, rep_stream);
    const GroupedSample grouped = group(pairs);
    const GridSpec grid = GridSpec::observed();

    for (std::size_t v = 0; v < variants.size(); ++v) {
      FittedModel model;
      if (variants[v].subagged) {
        EnsembleConfig ecfg;
        ecfg.n_subsamples = cfg.ensemble->n_subsamples;
        ecfg.subsample_size = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::llround(cfg.ensemble->fraction *
                                                     static_cast<double>(total_n))));
        RandomStream seed_stream = rep_stream.substream(0xE5E5ULL + v);
        ecfg.seed = seed_stream.next_u64();
        model = ensemble_fit(pairs, grid, variants[v].order, ecfg);
      } else {
        model = fit(grouped, grid, variants[v].order);
      }
      if (cfg.audit_every != 0 && rep % cfg.audit_every == 0 &&
          !satisfies_order_invariant(model, 1e-8))
        throw std::runtime_error("run_experiment: fitted model violates its order invariant");

      for (std::size_t xi = 0; xi < nx; ++xi) {
        const StepCdf est = interpolated_cdf(model, report.eval_x[xi]);
        report.raw[v][xi][0][rep] = l1_distance(est, cfg.setting, report.eval_x[xi], cfg.l1_tol);
        for (std::size_t gi = 0; gi < cfg.gamma_levels.size(); ++gi)
          report.raw[v][xi][gi + 1][rep] =
              std::abs(est.quantile(cfg.gamma_levels[gi]) - tq[xi][gi]);
      }
    }
  });

  detail::finalize_report(report);
  return report;
}

inline MetricsReport run_ksample(const ExperimentConfig& cfg) {
  if (cfg.design != DesignKind::KSample)
    throw std::invalid_argument("run_ksample: config has a continuous design");
  return run_experiment(cfg);
}

inline MetricsReport run_continuous(const ExperimentConfig& cfg) {
  if (cfg.design != DesignKind::Continuous)
    throw std::invalid_argument("run_continuous: config has a K-sample design");
  return run_experiment(cfg);
}

struct RateTrendRow {
  std::size_t n = 0;  // total sample size (continuous) or per-group size (K-sample)
  double mean_sup_error = 0.0;
  double se = 0.0;
};

struct RateTrendResult {
  std::vector<RateTrendRow> rows;
  double ratio = 1.0;  // error at the largest n over error at the smallest n
};

// Monte Carlo estimate of the sup-error of the first-stage regression,
// sup |M~_{n;x}(y) - M_x(y)| over a fixed interior x-grid and a fixed dense
// y-grid, per sample size. For the icx order the pipeline runs on reflected
// data, so the comparison target is the reflected integrated CDF.
inline RateTrendResult run_rate_trend(const SimSetting& setting, OrderConstraint order,
                                      const std::vector<std::size_t>& n_list, std::size_t reps,
                                      std::uint64_t seed, const std::vector<double>& levels = {},
                                      std::size_t threads = 0) {
  if (order != OrderConstraint::Icv && order != OrderConstraint::Icx)
    throw std::invalid_argument("run_rate_trend: order must be icv or icx");
  if (n_list.empty()) throw std::invalid_argument("run_rate_trend: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] < n_list[i - 1])
      throw std::invalid_argument("run_rate_trend: n list must be nondecreasing");
  const bool reflected = order == OrderConstraint::Icx;
  const bool ksample = !levels.empty();

  // Fixed evaluation grids, shared across all sample sizes.
  std::vector<double> xs = ksample ? levels : ExperimentConfig::interior_grid();
  double qlo = true_quantile(setting, 1.0, 1e-4), qhi = true_quantile(setting, 1.0, 1.0 - 1e-4);
  qlo = std::min(qlo, true_quantile(setting, 4.0, 1e-4));
  qhi = std::max(qhi, true_quantile(setting, 4.0, 1.0 - 1e-4));
  std::vector<double> ys(200);
  for (std::size_t j = 0; j < ys.size(); ++j)
    ys[j] = qlo + (qhi - qlo) * static_cast<double>(j) / static_cast<double>(ys.size() - 1);

  // True target on the (possibly reflected) scale.
  std::vector<double> eval_x = xs, eval_y = ys;
  if (reflected) {
    eval_x.assign(xs.rbegin(), xs.rend());
    for (double& x : eval_x) x = -x;
    eval_y.assign(ys.rbegin(), ys.rend());
    for (double& y : eval_y) y = -y;
  }
  std::vector<std::vector<double>> truth(eval_x.size(), std::vector<double>(eval_y.size()));
  for (std::size_t xi = 0; xi < eval_x.size(); ++xi)
    for (std::size_t yj = 0; yj < eval_y.size(); ++yj)
      truth[xi][yj] = reflected
                          ? true_upper_integral(setting, -eval_x[xi], -eval_y[yj])
                          : true_integrated_cdf(setting, eval_x[xi], eval_y[yj]);

  RateTrendResult result;
  const RandomStream root(seed);
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::size_t n = n_list[ni];
    std::vector<double> sup_errors(reps, 0.0);
    detail::run_over_replications(reps, threads, [&](std::size_t rep) {
      const RandomStream rep_stream = root.substream(ni).substream(rep);
      std::vector<std::pair<double, double>> pairs;
      if (ksample) {
        std::size_t obs = 0;
        for (double level : levels)
          for (std::size_t j = 0; j < n; ++j, ++obs) {
            RandomStream s = rep_stream.substream(obs);
            pairs.emplace_back(level, sample(setting, level, s));
          }
      } else {
        for (std::size_t obs = 0; obs < n; ++obs) {
          RandomStream s = rep_stream.substream(obs);
          const double x = sample_covariate(s);
          pairs.emplace_back(x, sample(setting, x, s));
        }
      }
      GroupedSample grouped = group(pairs);
      if (reflected) grouped = grouped.reflected();
      const auto mtilde = antitonic_integrated_cdf(grouped, eval_y);

      double sup = 0.0;
      for (std::size_t xi = 0; xi < eval_x.size(); ++xi) {
        const auto nb = detail::locate(grouped.design_points, eval_x[xi]);
        for (std::size_t yj = 0; yj < eval_y.size(); ++yj) {
          const double est = nb.lo == nb.hi
                                 ? mtilde[nb.lo][yj]
                                 : nb.lambda * mtilde[nb.lo][yj] +
                                       (1.0 - nb.lambda) * mtilde[nb.hi][yj];
          sup = std::max(sup, std::abs(est - truth[xi][yj]));
        }
      }
      sup_errors[rep] = sup;
    });

    RateTrendRow row;
    row.n = n;
    double s = 0.0;
    for (double v : sup_errors) s += v;
    row.mean_sup_error = s / static_cast<double>(reps);
    double q = 0.0;
    for (double v : sup_errors) q += (v - row.mean_sup_error) * (v - row.mean_sup_error);
    row.se = reps > 1 ? std::sqrt(q / (static_cast<double>(reps) - 1.0) /
                                  static_cast<double>(reps))
                      : 0.0;
    result.rows.push_back(row);
  }
  result.ratio = result.rows.back().mean_sup_error / result.rows.front().mean_sup_error;
  return result;
}

}  // namespace stochord

#endif  // STOCHORD_HARNESS_HPP
