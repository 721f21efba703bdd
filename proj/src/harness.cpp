#include "fedsllm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fedsllm/error.hpp"
#include "fedsllm/scenario.hpp"

namespace fedsllm::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no inf/nan; they go out as null.
nlohmann::ordered_json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace

void SweepSpec::validate() const {
  if (var != "p_max_dbm" && var != "bandwidth_mhz" && var != "users") {
    throw ConfigError("sweep variable must be p_max_dbm, bandwidth_mhz or users",
                      "sweep_var");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value", "sweep_values");
  if (strategies.empty()) {
    throw ConfigError("sweep needs at least one strategy", "sweep_strategies");
  }
  if (seeds < 1) throw ConfigError("sweep needs at least one seed", "sweep_seeds");
  if (!(eta_step > 0.0 && eta_step < 1.0)) {
    throw ConfigError("eta step must lie in (0, 1)", "eta_step");
  }
}

SweepSpec SweepSpec::from_config(const ExperimentConfig& config) {
  SweepSpec s;
  s.var = config.sweep_var;
  s.values = config.sweep_values;
  for (const auto& name : config.sweep_strategies) {
    s.strategies.push_back(opt::parse_strategy(name));
  }
  s.seeds = config.sweep_seeds;
  s.base_seed = config.seed;
  s.eta_step = config.eta_step;
  s.validate();
  return s;
}

double SweepReport::mean_T(double value, opt::Strategy s) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.value == value && r.strategy == s) {
      sum += r.T_seconds;
      ++n;
    }
  }
  return n > 0 ? sum / n : kNaN;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config,
                                   const std::string& var, double value) {
  ExperimentConfig c = config;
  if (var == "p_max_dbm") {
    c.p_max_dbm = value;
    c.p_max_fed_dbm.reset();
    c.p_max_main_dbm.reset();
  } else if (var == "bandwidth_mhz") {
    c.bandwidth_fed_mhz = value;
    c.bandwidth_main_mhz = value;
  } else if (var == "users") {
    c.users = static_cast<int>(value);
  } else {
    throw ConfigError("unknown sweep variable '" + var + "'", "sweep_var");
  }
  c.validate();
  return c;
}

SweepReport run_sweep(const SweepSpec& spec, const ExperimentConfig& config) {
  spec.validate();
  SweepReport report;
  report.spec = spec;
  for (double value : spec.values) {
    const ExperimentConfig point = apply_sweep_value(config, spec.var, value);
    for (int j = 0; j < spec.seeds; ++j) {
      const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(j);
      const Scenario scenario = generate_scenario(point, seed);
      for (opt::Strategy tag : spec.strategies) {
        try {
          const auto res = opt::run_strategy(tag, scenario, spec.eta_step, value);
          SweepRow row;
          row.var = spec.var;
          row.value = value;
          row.strategy = tag;
          row.seed = seed;
          row.eta_star = res.solution.eta;
          row.T_seconds = res.solution.T_s;
          row.sum_bc_hz = res.solution.sum_b_fed();
          row.sum_bs_hz = res.solution.sum_b_main();
          row.max_lemma3_residual = res.solution.max_lemma3_residual();
          row.solve_ms = spec.timing ? res.wall_time_s * 1e3 : 0.0;
          report.rows.push_back(row);
        } catch (const Error& e) {
          report.errors.push_back({value, tag, seed, e.what()});
        }
      }
    }
  }
  return report;
}

SweepReport run_power_sweep(const SweepSpec& spec,
                            const ExperimentConfig& config) {
  if (spec.var != "p_max_dbm") {
    throw ConfigError("power sweep needs sweep_var = p_max_dbm", "sweep_var");
  }
  return run_sweep(spec, config);
}

Improvement improvement_vs(const SweepReport& report, opt::Strategy baseline) {
  auto present = [&](opt::Strategy s) {
    return std::any_of(report.rows.begin(), report.rows.end(),
                       [&](const SweepRow& r) { return r.strategy == s; });
  };
  if (!present(opt::Strategy::kProposed) || !present(baseline)) {
    throw DomainError("improvement needs both PROPOSED and " +
                      std::string(opt::to_string(baseline)) + " in the report");
  }
  Improvement out;
  double sum = 0.0;
  for (double value : report.spec.values) {
    const double prop = report.mean_T(value, opt::Strategy::kProposed);
    const double base = report.mean_T(value, baseline);
    if (std::isnan(prop) || std::isnan(base)) continue;
    out.values.push_back(value);
    out.percent.push_back((base - prop) / base * 100.0);
    sum += out.percent.back();
  }
  out.mean_percent = out.percent.empty() ? kNaN : sum / out.percent.size();
  return out;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "jsonl") return Format::kJsonl;
  throw ConfigError("output format must be csv or jsonl, got '" + name + "'",
                    "format");
}

std::string render(const SweepReport& report, Format format) {
  std::ostringstream out;
  if (format == Format::kCsv) out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    const std::string tag(opt::to_string(r.strategy));
    if (format == Format::kCsv) {
      out << r.var << ',' << num(r.value) << ',' << tag << ',' << r.seed << ','
          << num(r.eta_star) << ',' << num(r.T_seconds) << ','
          << num(r.sum_bc_hz) << ',' << num(r.sum_bs_hz) << ','
          << num(r.max_lemma3_residual) << ',' << num(r.solve_ms) << '\n';
    } else {
      nlohmann::ordered_json j;
      j["sweep_var"] = r.var;
      j["value"] = jnum(r.value);
      j["strategy"] = tag;
      j["seed"] = r.seed;
      j["eta_star"] = jnum(r.eta_star);
      j["T_seconds"] = jnum(r.T_seconds);
      j["sum_bc_hz"] = jnum(r.sum_bc_hz);
      j["sum_bs_hz"] = jnum(r.sum_bs_hz);
      j["max_lemma3_residual"] = jnum(r.max_lemma3_residual);
      j["solve_ms"] = jnum(r.solve_ms);
      out << j.dump() << '\n';
    }
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void export_report(const SweepReport& report, const std::filesystem::path& path,
                   Format format) {
  write_text(path, render(report, format));
}

std::string render_summary(const SweepReport& report) {
  nlohmann::ordered_json j;
  j["sweep_var"] = report.spec.var;
  j["base_seed"] = report.spec.base_seed;
  j["seeds_per_point"] = report.spec.seeds;
  j["eta_step"] = report.spec.eta_step;
  j["averaging"] =
      "T averaged over seeds at each point; improvement computed per point "
      "from those means, then averaged over points";

  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (double value : report.spec.values) {
    nlohmann::ordered_json p;
    p["value"] = value;
    for (auto s : report.spec.strategies) {
      p["mean_T_" + std::string(opt::to_string(s))] = jnum(report.mean_T(value, s));
    }
    points.push_back(p);
  }
  j["points"] = points;

  nlohmann::ordered_json imp = nlohmann::ordered_json::object();
  for (auto s : report.spec.strategies) {
    if (s == opt::Strategy::kProposed) continue;
    try {
      const auto r = improvement_vs(report, s);
      nlohmann::ordered_json e;
      e["mean_percent"] = jnum(r.mean_percent);
      nlohmann::ordered_json per = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < r.values.size(); ++i) {
        per.push_back({{"value", r.values[i]}, {"percent", jnum(r.percent[i])}});
      }
      e["per_point"] = per;
      imp[std::string(opt::to_string(s))] = e;
    } catch (const DomainError&) {
      // PROPOSED or this baseline has no successful rows.
    }
  }
  j["improvement_of_PROPOSED_vs"] = imp;

  nlohmann::ordered_json errs = nlohmann::ordered_json::array();
  for (const auto& e : report.errors) {
    errs.push_back({{"value", e.value},
                    {"strategy", std::string(opt::to_string(e.strategy))},
                    {"seed", e.seed},
                    {"message", e.message}});
  }
  j["errors"] = errs;
  return j.dump(2) + "\n";
}

}  // namespace fedsllm::harness
