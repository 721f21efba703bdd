#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fedsllm {

/// Flat experiment configuration. Defaults reproduce the published
/// simulation setup; f_max_server_ghz, L, gamma, a_min and a_max are not
/// published and their defaults are configuration choices.
struct ExperimentConfig {
  // Scenario geometry and radio.
  int users = 50;
  double cell_side_m = 500.0;
  std::string pathloss = "128.1+37.6log10(d_km)";
  double shadow_sigma_db = 8.0;
  double noise_psd_dbm_hz = -174.0;
  double p_max_dbm = 10.0;
  std::optional<double> p_max_fed_dbm;   // defaults to p_max_dbm
  std::optional<double> p_max_main_dbm;  // defaults to p_max_dbm
  double f_max_user_ghz = 2.0;
  double f_max_server_ghz = 10.0;
  double bandwidth_fed_mhz = 20.0;
  double bandwidth_main_mhz = 20.0;
  double s_c_kbits = 28.1;
  double s_kbits = 281.0;
  double cycles_per_sample_min = 1e4;
  double cycles_per_sample_max = 3e4;
  long long total_samples = 60021;
  double gain_floor = 1e-30;

  // Learning constants.
  double xi = 0.1;
  double delta = 0.1;
  double eps0 = 1e-3;
  double L = 4.0;
  double gamma = 2.0;
  double a_min = 0.1;
  double a_max = 0.9;

  // Solver.
  double eta_step = 0.01;
  std::uint64_t seed = 1;

  // Sweep (harness).
  std::string sweep_var = "p_max_dbm";
  std::vector<double> sweep_values = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<std::string> sweep_strategies = {"PROPOSED", "EB", "FE", "BA"};
  int sweep_seeds = 5;

  // Desk-scale split training.
  int train_users = 10;
  int train_samples = 2000;
  int train_features = 16;
  int train_hidden = 8;
  int train_outputs = 4;
  int train_rank = 2;
  int train_server_rank = 2;
  double train_noise = 0.1;
  double train_eta = 0.5;
  int train_max_rounds = 5000;
  std::string train_dataset;  // CSV path; empty selects the synthetic generator

  double p_max_fed_w() const;
  double p_max_main_w() const;
  double noise_psd_w_per_hz() const;

  /// Throws ConfigError naming the offending key(s).
  void validate() const;
};

/// Every key accepted in a config file.
const std::vector<std::string>& config_keys();

/// Parses a config document (JSON object, comments allowed; empty text
/// yields all defaults). Throws ConfigError on parse failure, unknown keys,
/// type mismatches or constraint violations.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses `path`. A missing file is a ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

double dbm_to_watts(double dbm);

}  // namespace fedsllm
