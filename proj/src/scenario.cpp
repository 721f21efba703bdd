#include "fedsllm/scenario.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fedsllm/error.hpp"

namespace fedsllm {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void check(bool ok, const std::string& what) {
  if (!ok) throw DomainError("invalid scenario: " + what);
}

}  // namespace

double UserProfile::distance_km() const {
  return std::hypot(position_m[0], position_m[1]) / 1000.0;
}

void Scenario::validate(bool require_server_dominance) const {
  check(positive(radio.total_bandwidth_fed_hz) &&
            positive(radio.total_bandwidth_main_hz) &&
            positive(radio.noise_psd_w_per_hz) &&
            positive(radio.payload_fed_bits) &&
            positive(radio.payload_main_bits) &&
            positive(radio.shadow_sigma_db) && positive(radio.cell_side_m),
        "radio parameters must be positive and finite");
  check(positive(compute.f_s_max_hz), "f_s_max must be positive");
  check(compute.a_min > 0.0 && compute.a_min < compute.a_max &&
            compute.a_max < 1.0,
        "need 0 < a_min < a_max < 1");
  check(!users.empty(), "at least one user is required");
  learn.validate();

  const double half = 0.5 * radio.cell_side_m;
  std::set<int> ids;
  for (const auto& u : users) {
    check(ids.insert(u.user_id).second, "duplicate user_id");
    check(u.gain_fed > 0.0 && u.gain_fed <= 1.0 && u.gain_main > 0.0 &&
              u.gain_main <= 1.0,
          "gains must lie in (0, 1]");
    check(positive(u.p_max_fed_w) && positive(u.p_max_main_w) &&
              positive(u.f_max_hz) && positive(u.cycles_per_sample) &&
              positive(u.num_samples),
          "user powers, frequencies, cycles and samples must be positive");
    check(std::abs(u.position_m[0]) <= half && std::abs(u.position_m[1]) <= half,
          "user position outside the cell");
    if (require_server_dominance) {
      if (!(compute.f_s_max_hz > u.f_max_hz)) {
        throw ReductionInvalidError(
            "f_s_max must exceed every user's f_max for the A* = A_min "
            "reduction; sweep A instead");
      }
    }
  }
}

double path_loss_db(double distance_km) {
  if (!(distance_km > 0.0) || !std::isfinite(distance_km)) {
    throw DomainError("path_loss_db: distance must be positive");
  }
  return 128.1 + 37.6 * std::log10(distance_km);
}

double channel_gain(double distance_km, double shadow_db, double gain_floor) {
  const double loss_db = path_loss_db(distance_km) + shadow_db;
  const double gain = std::pow(10.0, -loss_db / 10.0);
  if (!(gain > gain_floor)) return gain_floor;
  return std::min(gain, 1.0);
}

std::vector<double> equal_split(long long total, int users) {
  if (users <= 0) throw DomainError("equal_split: users must be positive");
  std::vector<double> out(static_cast<std::size_t>(users));
  const long long base = total / users;
  const long long rem = total % users;
  for (int k = 0; k < users; ++k) {
    out[static_cast<std::size_t>(k)] =
        static_cast<double>(base + (k < rem ? 1 : 0));
  }
  return out;
}

Scenario generate_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();

  Scenario sc;
  sc.seed = seed;
  sc.radio.total_bandwidth_fed_hz = config.bandwidth_fed_mhz * 1e6;
  sc.radio.total_bandwidth_main_hz = config.bandwidth_main_mhz * 1e6;
  sc.radio.noise_psd_w_per_hz = config.noise_psd_w_per_hz();
  sc.radio.payload_fed_bits = config.s_c_kbits * 1e3;
  sc.radio.payload_main_bits = config.s_kbits * 1e3;
  sc.radio.shadow_sigma_db = config.shadow_sigma_db;
  sc.radio.cell_side_m = config.cell_side_m;

  sc.compute.f_s_max_hz = config.f_max_server_ghz * 1e9;
  sc.compute.a_min = config.a_min;
  sc.compute.a_max = config.a_max;

  sc.learn.lipschitz_L = config.L;
  sc.learn.strong_convexity_gamma = config.gamma;
  sc.learn.surrogate_weight_xi = config.xi;
  sc.learn.step_size_delta = config.delta;
  sc.learn.global_accuracy_eps0 = config.eps0;

  std::mt19937_64 rng(seed);
  const double half = 0.5 * config.cell_side_m;
  std::uniform_real_distribution<double> coord(-half, half);
  std::uniform_real_distribution<double> cycles(config.cycles_per_sample_min,
                                                config.cycles_per_sample_max);
  std::normal_distribution<double> shadow(0.0, config.shadow_sigma_db);

  const auto samples = equal_split(config.total_samples, config.users);
  sc.users.reserve(static_cast<std::size_t>(config.users));
  for (int k = 0; k < config.users; ++k) {
    UserProfile u;
    u.user_id = k;
    // Draw order is part of the determinism contract.
    u.position_m = {coord(rng), coord(rng)};
    u.cycles_per_sample = cycles(rng);
    const double shadow_fed = shadow(rng);
    const double shadow_main = shadow(rng);

    const double d_km = std::max(u.distance_km(), kMinDistanceKm);
    u.gain_fed = channel_gain(d_km, shadow_fed, config.gain_floor);
    u.gain_main = channel_gain(d_km, shadow_main, config.gain_floor);
    u.p_max_fed_w = config.p_max_fed_w();
    u.p_max_main_w = config.p_max_main_w();
    u.f_max_hz = config.f_max_user_ghz * 1e9;
    u.num_samples = samples[static_cast<std::size_t>(k)];
    sc.users.push_back(u);
  }
  sc.validate();
  return sc;
}

}  // namespace fedsllm
