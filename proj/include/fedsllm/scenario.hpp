#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fedsllm/config.hpp"
#include "fedsllm/learning.hpp"

namespace fedsllm {

struct RadioParams {
  double total_bandwidth_fed_hz = 0.0;   // B_c
  double total_bandwidth_main_hz = 0.0;  // B_s
  double noise_psd_w_per_hz = 0.0;       // N_c = N_s
  double payload_fed_bits = 0.0;         // s_c, per global round
  double payload_main_bits = 0.0;        // s, per local iteration
  double shadow_sigma_db = 0.0;
  double cell_side_m = 0.0;
};

struct UserProfile {
  int user_id = 0;
  std::array<double, 2> position_m{};
  double gain_fed = 0.0;
  double gain_main = 0.0;
  double p_max_fed_w = 0.0;
  double p_max_main_w = 0.0;
  double f_max_hz = 0.0;
  double cycles_per_sample = 0.0;  // W_k = |w0 + dw| * C
  double num_samples = 0.0;        // D_k

  double distance_km() const;
};

struct ComputeProfile {
  double f_s_max_hz = 0.0;
  double a_min = 0.0;
  double a_max = 0.0;
};

struct Scenario {
  RadioParams radio;
  ComputeProfile compute;
  std::vector<UserProfile> users;
  LearningHyperParams learn;
  std::uint64_t seed = 0;

  /// Checks every type invariant. Throws DomainError on the first
  /// violation. `require_server_dominance` additionally enforces
  /// f_s_max > f_max of every user.
  void validate(bool require_server_dominance = false) const;
};

/// 128.1 + 37.6*log10(d) in dB; d in km.
double path_loss_db(double distance_km);

/// Linear gain 10^(-(PL(d) + shadow_db)/10), floored at `gain_floor` and
/// capped at 1.
double channel_gain(double distance_km, double shadow_db,
                    double gain_floor = 1e-30);

/// Users closer than this are placed at this distance for path loss.
inline constexpr double kMinDistanceKm = 1e-3;

/// Places config.users users uniformly in the square cell centred on the
/// base station and draws per-user compute demand and per-link shadowing.
/// Deterministic in (config, seed). Transmit powers do not consume random
/// draws, so two configs differing only in power share geometry.
Scenario generate_scenario(const ExperimentConfig& config, std::uint64_t seed);

/// Equal deterministic split of `total` samples over `users`, remainder to
/// the first users.
std::vector<double> equal_split(long long total, int users);

}  // namespace fedsllm
