#include "fedsllm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedsllm/error.hpp"

namespace fedsllm {

namespace {

using json = nlohmann::json;

const std::string kPathLossModel = "128.1+37.6log10(d_km)";

template <typename T>
void read_key(const json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key +
                          "' has the wrong type: " + e.what(),
                      key);
  }
}

template <typename T>
void read_optional(const json& doc, const char* key, std::optional<T>& out) {
  if (doc.contains(key)) {
    T value{};
    read_key(doc, key, value);
    out = value;
  }
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what, key);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "users", "cell_side_m", "pathloss", "shadow_sigma_db",
      "noise_psd_dbm_hz", "p_max_dbm", "p_max_fed_dbm", "p_max_main_dbm",
      "f_max_user_ghz", "f_max_server_ghz", "bandwidth_fed_mhz",
      "bandwidth_main_mhz", "s_c_kbits", "s_kbits", "cycles_per_sample_range",
      "total_samples", "gain_floor", "xi", "delta", "eps0", "L", "gamma",
      "a_min", "a_max", "eta_step", "seed", "sweep_var", "sweep_values",
      "sweep_strategies", "sweep_seeds", "train_users", "train_samples",
      "train_features", "train_hidden", "train_outputs", "train_rank",
      "train_server_rank", "train_noise", "train_eta", "train_max_rounds",
      "train_dataset"};
  return keys;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double ExperimentConfig::p_max_fed_w() const {
  return dbm_to_watts(p_max_fed_dbm.value_or(p_max_dbm));
}

double ExperimentConfig::p_max_main_w() const {
  return dbm_to_watts(p_max_main_dbm.value_or(p_max_dbm));
}

double ExperimentConfig::noise_psd_w_per_hz() const {
  return dbm_to_watts(noise_psd_dbm_hz);
}

void ExperimentConfig::validate() const {
  require(users >= 1, "users", "at least one user is required");
  require(positive(cell_side_m), "cell_side_m", "must be positive");
  require(pathloss == kPathLossModel, "pathloss",
          "only '" + kPathLossModel + "' is supported");
  require(positive(shadow_sigma_db), "shadow_sigma_db", "must be positive");
  require(std::isfinite(noise_psd_dbm_hz), "noise_psd_dbm_hz",
          "must be finite");
  require(std::isfinite(p_max_dbm), "p_max_dbm", "must be finite");
  require(!p_max_fed_dbm || std::isfinite(*p_max_fed_dbm), "p_max_fed_dbm",
          "must be finite");
  require(!p_max_main_dbm || std::isfinite(*p_max_main_dbm), "p_max_main_dbm",
          "must be finite");
  require(positive(f_max_user_ghz), "f_max_user_ghz", "must be positive");
  require(positive(f_max_server_ghz), "f_max_server_ghz", "must be positive");
  require(positive(bandwidth_fed_mhz), "bandwidth_fed_mhz", "must be positive");
  require(positive(bandwidth_main_mhz), "bandwidth_main_mhz",
          "must be positive");
  require(positive(s_c_kbits), "s_c_kbits", "must be positive");
  require(positive(s_kbits), "s_kbits", "must be positive");
  require(positive(cycles_per_sample_min) &&
              positive(cycles_per_sample_max) &&
              cycles_per_sample_min <= cycles_per_sample_max,
          "cycles_per_sample_range", "needs 0 < min <= max");
  require(total_samples >= users, "total_samples",
          "must be at least the number of users");
  require(positive(gain_floor) && gain_floor < 1.0, "gain_floor",
          "must lie in (0, 1)");

  require(positive(L), "L", "must be positive");
  require(positive(gamma) && gamma <= L, "gamma", "needs 0 < gamma <= L");
  require(positive(xi) && xi <= gamma / L, "xi", "needs 0 < xi <= gamma/L");
  require(positive(delta) && delta < 2.0 / L, "delta",
          "needs 0 < delta < 2/L");
  require(positive(eps0) && eps0 < 1.0, "eps0", "must lie in (0, 1)");
  if (!(a_min > 0.0 && a_max < 1.0 && a_min < a_max)) {
    throw ConfigError(
        "config keys 'a_min' and 'a_max': need 0 < a_min < a_max < 1", "a_min");
  }

  require(positive(eta_step) && eta_step < 1.0, "eta_step",
          "must lie in (0, 1)");

  require(sweep_var == "p_max_dbm" || sweep_var == "bandwidth_mhz" ||
              sweep_var == "users",
          "sweep_var", "must be one of p_max_dbm, bandwidth_mhz, users");
  require(!sweep_values.empty(), "sweep_values", "must not be empty");
  for (double v : sweep_values) {
    require(std::isfinite(v), "sweep_values", "values must be finite");
    if (sweep_var != "p_max_dbm") {
      require(v > 0.0, "sweep_values", "values must be positive");
    }
    if (sweep_var == "users") {
      require(v == std::floor(v), "sweep_values", "user counts are integers");
    }
  }
  require(!sweep_strategies.empty(), "sweep_strategies", "must not be empty");
  for (const auto& s : sweep_strategies) {
    require(s == "PROPOSED" || s == "EB" || s == "FE" || s == "BA",
            "sweep_strategies", "unknown strategy '" + s + "'");
  }
  require(sweep_seeds >= 1, "sweep_seeds", "must be at least 1");

  require(train_users >= 1, "train_users", "must be at least 1");
  require(train_samples >= train_users, "train_samples",
          "must be at least train_users");
  require(train_features >= 2, "train_features", "must be at least 2");
  require(train_hidden >= 2, "train_hidden", "must be at least 2");
  require(train_outputs >= 2, "train_outputs", "must be at least 2");
  require(train_rank >= 1 &&
              2 * train_rank <= std::min(train_features, train_hidden),
          "train_rank", "needs 1 <= r <= min(features, hidden)/2");
  require(train_server_rank >= 1 &&
              2 * train_server_rank <= std::min(train_hidden, train_outputs),
          "train_server_rank", "needs 1 <= r <= min(hidden, outputs)/2");
  require(train_rank + train_server_rank <= train_outputs, "train_outputs",
          "must be at least train_rank + train_server_rank");
  require(train_outputs <= train_hidden, "train_hidden",
          "must be at least train_outputs");
  require(train_hidden <= train_features, "train_hidden",
          "must not exceed train_features");
  require(std::isfinite(train_noise) && train_noise >= 0.0, "train_noise",
          "must be non-negative");
  require(train_eta > 0.0 && train_eta < 1.0, "train_eta",
          "must lie in (0, 1)");
  require(train_max_rounds >= 1, "train_max_rounds", "must be at least 1");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
  if (blank) {
    cfg.validate();
    return cfg;
  }

  json doc;
  try {
    doc = json::parse(text, nullptr, /*allow_exceptions=*/true,
                      /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config document must be a flat key/value object");
  }
  const auto& known = config_keys();
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'", key);
    }
  }

  read_key(doc, "users", cfg.users);
  read_key(doc, "cell_side_m", cfg.cell_side_m);
  read_key(doc, "pathloss", cfg.pathloss);
  read_key(doc, "shadow_sigma_db", cfg.shadow_sigma_db);
  read_key(doc, "noise_psd_dbm_hz", cfg.noise_psd_dbm_hz);
  read_key(doc, "p_max_dbm", cfg.p_max_dbm);
  read_optional(doc, "p_max_fed_dbm", cfg.p_max_fed_dbm);
  read_optional(doc, "p_max_main_dbm", cfg.p_max_main_dbm);
  read_key(doc, "f_max_user_ghz", cfg.f_max_user_ghz);
  read_key(doc, "f_max_server_ghz", cfg.f_max_server_ghz);
  read_key(doc, "bandwidth_fed_mhz", cfg.bandwidth_fed_mhz);
  read_key(doc, "bandwidth_main_mhz", cfg.bandwidth_main_mhz);
  read_key(doc, "s_c_kbits", cfg.s_c_kbits);
  read_key(doc, "s_kbits", cfg.s_kbits);
  if (doc.contains("cycles_per_sample_range")) {
    std::vector<double> range;
    read_key(doc, "cycles_per_sample_range", range);
    require(range.size() == 2, "cycles_per_sample_range",
            "expects [min, max]");
    cfg.cycles_per_sample_min = range[0];
    cfg.cycles_per_sample_max = range[1];
  }
  read_key(doc, "total_samples", cfg.total_samples);
  read_key(doc, "gain_floor", cfg.gain_floor);
  read_key(doc, "xi", cfg.xi);
  read_key(doc, "delta", cfg.delta);
  read_key(doc, "eps0", cfg.eps0);
  read_key(doc, "L", cfg.L);
  read_key(doc, "gamma", cfg.gamma);
  read_key(doc, "a_min", cfg.a_min);
  read_key(doc, "a_max", cfg.a_max);
  read_key(doc, "eta_step", cfg.eta_step);
  read_key(doc, "seed", cfg.seed);
  read_key(doc, "sweep_var", cfg.sweep_var);
  read_key(doc, "sweep_values", cfg.sweep_values);
  read_key(doc, "sweep_strategies", cfg.sweep_strategies);
  read_key(doc, "sweep_seeds", cfg.sweep_seeds);
  read_key(doc, "train_users", cfg.train_users);
  read_key(doc, "train_samples", cfg.train_samples);
  read_key(doc, "train_features", cfg.train_features);
  read_key(doc, "train_hidden", cfg.train_hidden);
  read_key(doc, "train_outputs", cfg.train_outputs);
  read_key(doc, "train_rank", cfg.train_rank);
  read_key(doc, "train_server_rank", cfg.train_server_rank);
  read_key(doc, "train_noise", cfg.train_noise);
  read_key(doc, "train_eta", cfg.train_eta);
  read_key(doc, "train_max_rounds", cfg.train_max_rounds);
  read_key(doc, "train_dataset", cfg.train_dataset);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace fedsllm
