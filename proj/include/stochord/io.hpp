#ifndef STOCHORD_IO_HPP
#define STOCHORD_IO_HPP

#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stochord/estimators.hpp"
#include "stochord/harness.hpp"

namespace stochord {

// Unreadable or malformed input files; carries the offending line when known.
struct ParseError : std::runtime_error {
  std::size_t line = 0;
  explicit ParseError(const std::string& what, std::size_t line_number = 0)
      : std::runtime_error(what), line(line_number) {}
};

// CSV with header "x,y", one observation per row; '#' lines are comments.
inline std::vector<std::pair<double, double>> read_xy_csv(std::istream& in,
                                                          const std::string& source = "<stream>") {
  std::vector<std::pair<double, double>> pairs;
  std::string row;
  std::size_t line_number = 0;
  bool header_seen = false;
  while (std::getline(in, row)) {
    ++line_number;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    std::string trimmed = row;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;  // header row
    }
    const std::size_t comma = row.find(',');
    if (comma == std::string::npos)
      throw ParseError(source + ":" + std::to_string(line_number) + ": expected 'x,y' row", line_number);
    try {
      std::size_t used = 0;
      const double x = std::stod(row.substr(0, comma), &used);
      const double y = std::stod(row.substr(comma + 1), &used);
      pairs.emplace_back(x, y);
    } catch (const std::exception&) {
      throw ParseError(source + ":" + std::to_string(line_number) + ": cannot parse row '" + row + "'",
                       line_number);
    }
  }
  if (pairs.empty()) throw ParseError(source + ": no data rows", line_number);
  return pairs;
}

inline std::vector<std::pair<double, double>> read_xy_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_xy_csv(in, path);
}

// Strictly increasing grid values, one per line ('#' comments allowed).
inline std::vector<double> read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<double> pts;
  std::string row;
  std::size_t line_number = 0;
  while (std::getline(in, row)) {
    ++line_number;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    std::string trimmed = row;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    try {
      pts.push_back(std::stod(trimmed));
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_number) + ": cannot parse grid value",
                       line_number);
    }
  }
  if (pts.empty()) throw ParseError(path + ": empty grid file");
  return pts;
}

inline std::string grid_mode_name(GridSpec::Mode mode) {
  switch (mode) {
    case GridSpec::Mode::ObservedValues: return "observed";
    case GridSpec::Mode::IntegerLattice: return "integer";
    case GridSpec::Mode::Explicit: return "explicit";
  }
  return "?";
}

inline GridSpec::Mode grid_mode_from_name(const std::string& name) {
  if (name == "observed") return GridSpec::Mode::ObservedValues;
  if (name == "integer") return GridSpec::Mode::IntegerLattice;
  if (name == "explicit") return GridSpec::Mode::Explicit;
  throw ParseError("unknown grid mode: " + name);
}

inline nlohmann::json model_to_json(const FittedModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["order"] = order_name(model.order);
  j["grid_mode"] = grid_mode_name(model.grid_mode);
  j["grid"] = model.grid;
  j["design_points"] = model.design_points;
  nlohmann::json cdfs = nlohmann::json::array();
  for (const StepCdf& c : model.cdfs)
    cdfs.push_back({{"jumps", c.points()}, {"cum", c.cum()}});
  j["cdfs"] = std::move(cdfs);
  return j;
}

inline FittedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported model version");
    FittedModel m;
    m.order = order_from_name(j.at("order").get<std::string>());
    m.grid_mode = grid_mode_from_name(j.at("grid_mode").get<std::string>());
    m.grid = j.at("grid").get<std::vector<double>>();
    m.design_points = j.at("design_points").get<std::vector<double>>();
    for (const auto& c : j.at("cdfs"))
      m.cdfs.emplace_back(c.at("jumps").get<std::vector<double>>(),
                          c.at("cum").get<std::vector<double>>());
    if (m.cdfs.size() != m.design_points.size())
      throw ParseError("model file: one CDF per design point required");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

inline void write_model_file(const std::string& path, const FittedModel& model) {
  const std::string payload = model_to_json(model).dump(2);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << payload << "\n";
}

inline FittedModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model_from_json(j);
}

// Experiment configuration schema, see configs/ for examples:
// {
//   "setting": "gamma" | "student" | "betabin",
//   "design": {"type": "ksample", "levels": [...], "per_group_n": 30}
//           | {"type": "continuous", "n": 500},
//   "method": "icv" | "icx" (default: the setting's natural order),
//   "competitor": "ecdf" | "fsd" | ... (default: ecdf for ksample, fsd otherwise),
//   "ensemble": {"n_subsamples": 50, "fraction": 0.5}   (optional),
//   "replications": 1000, "seed": 0,
//   "eval_x": [...], "gamma_levels": [...], "l1_tol": 1e-4, "threads": 0
// }
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    cfg.setting = SimSetting::from_name(j.at("setting").get<std::string>());
    const auto& design = j.at("design");
    const std::string type = design.at("type").get<std::string>();
    if (type == "ksample") {
      cfg.design = DesignKind::KSample;
      cfg.levels = design.at("levels").get<std::vector<double>>();
      cfg.per_group_n = design.at("per_group_n").get<std::size_t>();
      cfg.competitor = OrderConstraint::Ecdf;
    } else if (type == "continuous") {
      cfg.design = DesignKind::Continuous;
      cfg.n = design.at("n").get<std::size_t>();
      cfg.competitor = OrderConstraint::Fsd;
    } else {
      throw ParseError("config: unknown design type " + type);
    }
    cfg.method = natural_order(cfg.setting);
    if (j.contains("method")) cfg.method = order_from_name(j.at("method").get<std::string>());
    if (j.contains("competitor"))
      cfg.competitor = order_from_name(j.at("competitor").get<std::string>());
    if (j.contains("ensemble")) {
      EnsembleSpec e;
      e.n_subsamples = j.at("ensemble").at("n_subsamples").get<std::size_t>();
      e.fraction = j.at("ensemble").at("fraction").get<double>();
      cfg.ensemble = e;
    }
    if (j.contains("replications")) cfg.replications = j.at("replications").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("eval_x")) cfg.eval_x = j.at("eval_x").get<std::vector<double>>();
    if (j.contains("gamma_levels"))
      cfg.gamma_levels = j.at("gamma_levels").get<std::vector<double>>();
    if (j.contains("l1_tol")) cfg.l1_tol = j.at("l1_tol").get<double>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<std::size_t>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

inline nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["setting"] = report.setting;
  j["design"] = report.design;
  j["replications"] = report.replications;
  j["eval_x"] = report.eval_x;
  j["metrics"] = report.metrics;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t v = 0; v < report.estimators.size(); ++v)
    for (std::size_t xi = 0; xi < report.eval_x.size(); ++xi)
      for (std::size_t mi = 0; mi < report.metrics.size(); ++mi) {
        nlohmann::json row;
        row["estimator"] = report.estimators[v];
        row["x"] = report.eval_x[xi];
        row["metric"] = report.metrics[mi];
        row["mean_error"] = report.mean[v][xi][mi];
        row["mc_se"] = report.se[v][xi][mi];
        if (report.baseline[v] != MetricsReport::npos) {
          row["baseline"] = report.estimators[report.baseline[v]];
          row["rel_improvement"] = report.rel[v][xi][mi];
          row["rel_improvement_se"] = report.rel_se[v][xi][mi];
        }
        rows.push_back(std::move(row));
      }
  j["rows"] = std::move(rows);
  return j;
}

inline std::string report_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "setting,design,estimator,x,metric,mean_error,mc_se,baseline,rel_improvement,"
         "rel_improvement_se,replications\n";
  for (std::size_t v = 0; v < report.estimators.size(); ++v)
    for (std::size_t xi = 0; xi < report.eval_x.size(); ++xi)
      for (std::size_t mi = 0; mi < report.metrics.size(); ++mi) {
        out << report.setting << ',' << report.design << ',' << report.estimators[v] << ','
            << report.eval_x[xi] << ',' << report.metrics[mi] << ','
            << report.mean[v][xi][mi] << ',' << report.se[v][xi][mi] << ',';
        if (report.baseline[v] != MetricsReport::npos)
          out << report.estimators[report.baseline[v]] << ',' << report.rel[v][xi][mi] << ','
              << report.rel_se[v][xi][mi] << ',';
        else
          out << ",,,";
        out << report.replications << "\n";
      }
  return out.str();
}

// Relative-improvement table, rows (K, X), one column per metric.
inline std::string improvement_table(const MetricsReport& report, std::size_t k_levels) {
  std::ostringstream out;
  out << "relative improvement, " << report.setting << " setting";
  for (std::size_t v = 0; v < report.estimators.size(); ++v)
    if (report.baseline[v] != MetricsReport::npos) {
      out << " (" << report.estimators[v] << " vs " << report.estimators[report.baseline[v]]
          << ")";
      break;
    }
  out << "\n";
  out << "   K      X";
  for (const std::string& m : report.metrics) {
    out.width(9);
    out << m;
  }
  out << "\n";
  for (std::size_t v = 0; v < report.estimators.size(); ++v) {
    if (report.baseline[v] == MetricsReport::npos) continue;
    if (v > 2) out << "-- " << report.estimators[v] << " --\n";
    for (std::size_t xi = 0; xi < report.eval_x.size(); ++xi) {
      out.width(4);
      if (xi == 0 && k_levels > 0) out << k_levels;
      else out << "";
      out.width(7);
      out.precision(3);
      out << std::fixed << report.eval_x[xi];
      out.unsetf(std::ios_base::fixed);
      for (std::size_t mi = 0; mi < report.metrics.size(); ++mi) {
        out.width(9);
        out.precision(2);
        out << std::fixed << report.rel[v][xi][mi];
        out.unsetf(std::ios_base::fixed);
      }
      out << "\n";
    }
  }
  return out.str();
}

inline nlohmann::json rate_trend_to_json(const RateTrendResult& result) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.rows)
    rows.push_back({{"n", row.n}, {"mean_sup_error", row.mean_sup_error}, {"mc_se", row.se}});
  j["rows"] = std::move(rows);
  j["ratio"] = result.ratio;
  return j;
}

inline std::string rate_trend_to_csv(const RateTrendResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "n,mean_sup_error,mc_se\n";
  for (const auto& row : result.rows)
    out << row.n << ',' << row.mean_sup_error << ',' << row.se << "\n";
  return out.str();
}

}  // namespace stochord

#endif  // STOCHORD_IO_HPP
