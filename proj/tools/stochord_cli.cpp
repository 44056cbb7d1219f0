// Command-line interface: fit conditional-CDF models from CSV data, query
// them, evaluate them against the simulation ground truths, and run the Monte
// Carlo experiments.
//
// Exit codes: 0 success, 2 unreadable/malformed input, 3 invariant violation
// (bad grid, invalid model state), 4 quantile level outside (0,1). No output
// file is written on a nonzero exit.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochord/ensemble.hpp"
#include "stochord/estimators.hpp"
#include "stochord/harness.hpp"
#include "stochord/io.hpp"
#include "stochord/metrics.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitGamma = 4;

stochord::GridSpec parse_grid_flag(const std::string& flag) {
  if (flag == "observed") return stochord::GridSpec::observed();
  if (flag == "integer") return stochord::GridSpec::integer_lattice();
  if (flag.rfind("file:", 0) == 0)
    return stochord::GridSpec::explicit_grid(stochord::read_grid_file(flag.substr(5)));
  throw CLI::ValidationError("--grid", "expected observed, integer or file:PATH");
}

int cmd_fit(const std::string& input, const std::string& order_flag, const std::string& grid_flag,
            std::size_t subag, double frac, std::uint64_t seed, const std::string& output) {
  const auto pairs = stochord::read_xy_csv_file(input);
  const stochord::GridSpec grid = parse_grid_flag(grid_flag);
  const stochord::OrderConstraint order = stochord::order_from_name(order_flag);

  stochord::FittedModel model;
  if (subag > 0) {
    stochord::EnsembleConfig cfg;
    cfg.n_subsamples = subag;
    cfg.subsample_size = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(frac * static_cast<double>(pairs.size()))));
    cfg.seed = seed;
    model = stochord::ensemble_fit(pairs, grid, order, cfg);
  } else {
    model = stochord::fit(stochord::group(pairs), grid, order);
  }
  stochord::write_model_file(output, model);
  std::fprintf(stderr, "fit: n=%zu d=%zu grid=%zu order=%s -> %s\n", pairs.size(),
               model.design_points.size(), model.grid.size(), order_flag.c_str(),
               output.c_str());
  return 0;
}

int cmd_predict(const std::string& model_path, double x, std::optional<double> y,
                std::optional<double> gamma) {
  if (y.has_value() == gamma.has_value())
    throw CLI::ValidationError("predict", "exactly one of --y and --gamma is required");
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) {
    std::fprintf(stderr, "predict: --gamma must lie strictly between 0 and 1\n");
    return kExitGamma;
  }
  const stochord::FittedModel model = stochord::read_model_file(model_path);
  const double value = y ? stochord::predict_cdf(model, x, *y)
                         : stochord::predict_quantile(model, x, *gamma);
  std::printf("%.12g\n", value);
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& setting_name,
                 std::vector<double> xs, std::vector<double> gammas, double tol) {
  for (double g : gammas)
    if (!(g > 0.0 && g < 1.0)) {
      std::fprintf(stderr, "evaluate: --gamma must lie strictly between 0 and 1\n");
      return kExitGamma;
    }
  const stochord::FittedModel model = stochord::read_model_file(model_path);
  const stochord::SimSetting setting = stochord::SimSetting::from_name(setting_name);
  if (xs.empty()) xs = model.design_points;
  std::printf("x,metric,value\n");
  for (double x : xs) {
    const stochord::StepCdf est = stochord::interpolated_cdf(model, x);
    std::printf("%.17g,l1,%.17g\n", x, stochord::l1_distance(est, setting, x, tol));
    for (double g : gammas)
      std::printf("%.17g,dq_%g,%.17g\n", x, g,
                  stochord::quantile_abs_error(est, setting, x, g));
  }
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_base,
                   std::optional<std::size_t> reps_override, std::optional<std::uint64_t> seed,
                   std::optional<std::size_t> threads) {
  std::ifstream in(config_path);
  if (!in) throw stochord::ParseError("cannot open " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw stochord::ParseError(config_path + ": " + e.what());
  }

  const std::string type = [&] {
    try {
      return j.at("design").at("type").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw stochord::ParseError(std::string("config: ") + e.what());
    }
  }();

  nlohmann::json out_json;
  std::string out_csv;
  std::string table;
  if (type == "rate_trend") {
    try {
      const stochord::SimSetting setting =
          stochord::SimSetting::from_name(j.at("setting").get<std::string>());
      const auto n_list = j.at("design").at("n_list").get<std::vector<std::size_t>>();
      const auto levels = j.at("design").value("levels", std::vector<double>{});
      const std::size_t reps = reps_override.value_or(j.value("replications", std::size_t{200}));
      const stochord::OrderConstraint order =
          j.contains("order") ? stochord::order_from_name(j.at("order").get<std::string>())
                              : natural_order(setting);
      const stochord::RateTrendResult result = stochord::run_rate_trend(
          setting, order, n_list, reps, seed.value_or(j.value("seed", std::uint64_t{0})), levels,
          threads.value_or(j.value("threads", std::size_t{0})));
      out_json = stochord::rate_trend_to_json(result);
      out_csv = stochord::rate_trend_to_csv(result);
      table = out_csv + "ratio," + std::to_string(result.ratio) + "\n";
    } catch (const nlohmann::json::exception& e) {
      throw stochord::ParseError(std::string("config: ") + e.what());
    }
  } else {
    stochord::ExperimentConfig cfg = stochord::experiment_config_from_json(j);
    if (reps_override) cfg.replications = *reps_override;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    const stochord::MetricsReport report = stochord::run_experiment(cfg);
    out_json = stochord::report_to_json(report);
    out_csv = stochord::report_to_csv(report);
    table = stochord::improvement_table(
        report, cfg.design == stochord::DesignKind::KSample ? cfg.levels.size() : 0);
  }

  {
    std::ofstream out(out_base + ".json");
    if (!out) throw std::runtime_error("cannot write " + out_base + ".json");
    out << out_json.dump(2) << "\n";
  }
  {
    std::ofstream out(out_base + ".csv");
    if (!out) throw std::runtime_error("cannot write " + out_base + ".csv");
    out << out_csv;
  }
  std::fputs(table.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional distribution estimation under stochastic order constraints"};
  app.require_subcommand(1);

  std::string input, output, model_path, order_flag = "icv", grid_flag = "observed";
  std::string setting_name = "gamma", config_path, out_base;
  std::size_t subag = 0;
  double frac = 0.5, x = 0.0, tol = 1e-6;
  std::uint64_t seed = 0;
  std::optional<double> y, gamma;
  std::optional<std::size_t> reps_override, threads;
  std::optional<std::uint64_t> seed_override;
  std::vector<double> xs, gammas{0.1, 0.5, 0.9};

  auto* fit = app.add_subcommand("fit", "fit a model from CSV data");
  fit->add_option("--input", input)->required();
  fit->add_option("--order", order_flag)->check(CLI::IsMember({"icv", "icx", "fsd", "ecdf"}));
  fit->add_option("--grid", grid_flag, "observed, integer, or file:PATH");
  fit->add_option("--subag", subag, "number of subsamples (0 = no subagging)");
  fit->add_option("--frac", frac, "subsample fraction of n");
  fit->add_option("--seed", seed);
  fit->add_option("--output", output)->required();

  auto* predict = app.add_subcommand("predict", "evaluate a fitted model");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--x", x)->required();
  predict->add_option("--y", [&y](const std::vector<std::string>& v) {
    y = std::stod(v[0]);
    return true;
  }, "response threshold for a CDF value");
  predict->add_option("--gamma", [&gamma](const std::vector<std::string>& v) {
    gamma = std::stod(v[0]);
    return true;
  }, "quantile level in (0,1)");

  auto* evaluate = app.add_subcommand("evaluate", "compare a model to a simulation ground truth");
  evaluate->add_option("--model", model_path)->required();
  evaluate->add_option("--setting", setting_name)
      ->check(CLI::IsMember({"student", "gamma", "betabin"}));
  evaluate->add_option("--x", xs, "evaluation covariates (default: design points)");
  evaluate->add_option("--gamma", gammas, "quantile levels");
  evaluate->add_option("--tol", tol, "L1 quadrature tolerance");

  auto* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment config");
  experiment->add_option("--config", config_path)->required();
  experiment->add_option("--out", out_base, "output base path (.json/.csv)")->required();
  experiment->add_option("--reps-override",
                         [&reps_override](const std::vector<std::string>& v) {
                           reps_override = std::stoull(v[0]);
                           return true;
                         },
                         "replication count override");
  experiment->add_option("--seed", [&seed_override](const std::vector<std::string>& v) {
    seed_override = std::stoull(v[0]);
    return true;
  });
  experiment->add_option("--threads", [&threads](const std::vector<std::string>& v) {
    threads = std::stoull(v[0]);
    return true;
  });

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(input, order_flag, grid_flag, subag, frac, seed, output);
    if (predict->parsed()) return cmd_predict(model_path, x, y, gamma);
    if (evaluate->parsed()) return cmd_evaluate(model_path, setting_name, xs, gammas, tol);
    if (experiment->parsed())
      return cmd_experiment(config_path, out_base, reps_override, seed_override, threads);
  } catch (const stochord::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
