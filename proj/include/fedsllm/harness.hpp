#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedsllm/config.hpp"
#include "fedsllm/optimizer.hpp"

namespace fedsllm::harness {

struct SweepSpec {
  std::string var = "p_max_dbm";  // p_max_dbm | bandwidth_mhz | users
  std::vector<double> values;
  std::vector<opt::Strategy> strategies;
  int seeds = 1;                // scenario seeds per point: base, base+1, ...
  std::uint64_t base_seed = 1;
  double eta_step = 0.01;
  bool timing = false;          // record wall-clock solve_ms (else 0)

  /// Throws ConfigError on an empty value list, bad variable, no
  /// strategies or seeds < 1.
  void validate() const;

  static SweepSpec from_config(const ExperimentConfig& config);
};

struct SweepRow {
  std::string var;
  double value = 0.0;
  opt::Strategy strategy = opt::Strategy::kProposed;
  std::uint64_t seed = 0;
  double eta_star = 0.0;
  double T_seconds = 0.0;
  double sum_bc_hz = 0.0;
  double sum_bs_hz = 0.0;
  double max_lemma3_residual = 0.0;
  double solve_ms = 0.0;
};

struct SweepFailure {
  double value = 0.0;
  opt::Strategy strategy = opt::Strategy::kProposed;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepReport {
  SweepSpec spec;
  std::vector<SweepRow> rows;  // ordered by (point, seed, strategy)
  std::vector<SweepFailure> errors;

  /// Mean T over the seeds that succeeded at `value`; NaN when none did.
  double mean_T(double value, opt::Strategy s) const;
};

/// Config with the swept variable set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config,
                                   const std::string& var, double value);

/// Runs every (point, seed, strategy). Geometry and shadowing depend on the
/// seed only, so a power sweep changes nothing but the link budgets. Solver
/// failures are recorded in `errors` and the sweep continues.
SweepReport run_sweep(const SweepSpec& spec, const ExperimentConfig& config);

/// run_sweep restricted to var == "p_max_dbm".
SweepReport run_power_sweep(const SweepSpec& spec,
                            const ExperimentConfig& config);

struct Improvement {
  std::vector<double> values;   // sweep points with both strategies present
  std::vector<double> percent;  // (T_base - T_prop) / T_base * 100 per point
  double mean_percent = 0.0;    // mean over points
};

/// Per-point improvement of PROPOSED over `baseline`, using the per-point
/// mean T over seeds. Throws DomainError when either strategy is absent.
Improvement improvement_vs(const SweepReport& report, opt::Strategy baseline);

enum class Format { kCsv, kJsonl };

/// Throws ConfigError for anything but "csv" or "jsonl".
Format parse_format(const std::string& name);

inline constexpr const char* kCsvHeader =
    "sweep_var,value,strategy,seed,eta_star,T_seconds,sum_bc_hz,sum_bs_hz,"
    "max_lemma3_residual,solve_ms";

/// Rows in a stable textual form (17 significant digits).
std::string render(const SweepReport& report, Format format);

/// Writes render() to `path`. Throws IoError naming the path.
void export_report(const SweepReport& report, const std::filesystem::path& path,
                   Format format);

/// Aggregates, improvements, averaging convention and errors as JSON.
std::string render_summary(const SweepReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fedsllm::harness
