#pragma once

// Independent checks of the solver and the training loop: a brute-force
// latency oracle, a rate-kernel round trip, and empirical convergence-bound
// trials.

#include <cstdint>
#include <string>
#include <vector>

#include "fedsllm/config.hpp"
#include "fedsllm/optimizer.hpp"

namespace fedsllm::validation {

/// Minimum T at fixed eta for exactly three users by exhaustive search:
/// each user's budget line t_fed + m t_main = Q_k is sampled at `grid`
/// interior points, bandwidths come from the bisection inversion, and every
/// combination is tested against both pools. Outer bisection on T.
double brute_force_T(const opt::ReducedParams& reduced, double eta,
                     int grid = 400);

struct OracleCase {
  std::uint64_t seed = 0;
  double p_max_dbm = 0.0;
  double eta = 0.0;
  double solver_T = 0.0;
  double oracle_T = 0.0;
  double rel_diff = 0.0;  // |solver - oracle| / oracle
};

/// Random three-user scenarios (default radio setup, power drawn in
/// [0, 20] dBm per scenario) compared at every eta in `etas`.
std::vector<OracleCase> oracle_suite(const ExperimentConfig& base,
                                     int scenarios, std::uint64_t base_seed,
                                     const std::vector<double>& etas,
                                     int grid = 400);

struct RoundTrip {
  int pairs = 0;
  double max_rel_err = 0.0;
};

/// min_bandwidth(uplink_rate(b)) against b over random (b, link) pairs.
RoundTrip rate_roundtrip(int pairs, std::uint64_t seed);

/// y = x ln(1 + 1/x) increasing and concave on a log grid over
/// [1e-6, 1e6].
bool rate_shape_check(int points = 2000);

struct LemmaTrial {
  std::uint64_t seed = 0;
  double eta = 0.0;
  double L = 0.0;
  double gamma = 0.0;
  int rounds = 0;
  double global_bound = 0.0;
  int max_local_iters = 0;
  double local_bound = 0.0;
  bool certified = false;

  bool within_bounds() const {
    return certified && rounds <= global_bound &&
           max_local_iters <= local_bound;
  }
};

/// Synthetic training instances (shape and size from the train_* keys),
/// run with measured (L, gamma) and compliant (xi, delta) until the eps0
/// certificate or the global bound is reached.
std::vector<LemmaTrial> lemma_suite(const ExperimentConfig& config, int trials,
                                    std::uint64_t base_seed,
                                    const std::vector<double>& etas);

}  // namespace fedsllm::validation
