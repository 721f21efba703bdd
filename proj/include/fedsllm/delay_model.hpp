#pragma once

#include "fedsllm/learning.hpp"
#include "fedsllm/rate.hpp"
#include "fedsllm/scenario.hpp"

namespace fedsllm::delay {

/// Latency of one user over a full training run.
///
/// total_s == global_iters * (compute_client_s + compute_server_s +
///            upload_fed_s + local_iters * upload_main_per_localiter_s)
struct LatencyBreakdown {
  double compute_client_s = 0.0;             // tau_k, per round
  double compute_server_s = 0.0;             // tau_s, per round
  double upload_fed_s = 0.0;                 // t_c, once per round
  double upload_main_per_localiter_s = 0.0;  // t_s, once per local iteration
  double local_iters = 0.0;                  // v*log2(1/eta)
  double global_iters = 0.0;                 // a/(1-eta)
  double total_s = 0.0;
};

/// a = (2 L^2 / (gamma^2 xi)) ln(1/eps0).
double iteration_constant_a(const LearningHyperParams& h);

/// a/(1 - eta), kept real-valued.
double global_iterations(double eta, const LearningHyperParams& h);

/// v * log2(1/eta). Throws HyperparameterError when delta >= 2/L.
double local_iterations(double eta, const LearningHyperParams& h);

struct ComputeDelay {
  double client_s = 0.0;
  double server_s = 0.0;
};

/// Per-round compute time split between client (share A) and main server.
ComputeDelay compute_delay(double eta, double split_ratio_A,
                           const UserProfile& user, double f_server_hz,
                           const LearningHyperParams& h);

/// Same, with the user's CPU frequency given explicitly (f_k <= f_k^max).
ComputeDelay compute_delay(double eta, double split_ratio_A,
                           double cycles_per_sample, double num_samples,
                           double f_user_hz, double f_server_hz,
                           const LearningHyperParams& h);

LatencyBreakdown user_round_latency(double eta, double split_ratio_A,
                                    const UserProfile& user,
                                    double f_server_hz, double t_fed_s,
                                    double t_main_s,
                                    const LearningHyperParams& h);

/// Assembles a breakdown from its components, enforcing the total identity.
LatencyBreakdown make_breakdown(double eta, ComputeDelay compute,
                                double t_fed_s, double t_main_s,
                                const LearningHyperParams& h);

/// t * uplink_rate(bandwidth) >= payload_bits, up to a few ulps.
bool transmission_feasible(double t_s, double bandwidth_hz,
                           const rate::LinkBudget& link, double payload_bits);

}  // namespace fedsllm::delay
