#include "fedsllm/delay_model.hpp"

#include <cmath>
#include <limits>

#include "fedsllm/error.hpp"

namespace fedsllm::delay {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw DomainError("local accuracy eta must lie in (0, 1)");
  }
}

}  // namespace

double iteration_constant_a(const LearningHyperParams& h) {
  const double ratio = h.lipschitz_L / h.strong_convexity_gamma;
  return 2.0 * ratio * ratio / h.surrogate_weight_xi *
         std::log(1.0 / h.global_accuracy_eps0);
}

double global_iterations(double eta, const LearningHyperParams& h) {
  check_eta(eta);
  return iteration_constant_a(h) / (1.0 - eta);
}

double local_iterations(double eta, const LearningHyperParams& h) {
  check_eta(eta);
  return h.local_iteration_constant() * std::log2(1.0 / eta);
}

ComputeDelay compute_delay(double eta, double split_ratio_A,
                           double cycles_per_sample, double num_samples,
                           double f_user_hz, double f_server_hz,
                           const LearningHyperParams& h) {
  check_eta(eta);
  if (!(split_ratio_A >= 0.0 && split_ratio_A <= 1.0)) {
    throw DomainError("split ratio A must lie in [0, 1]");
  }
  if (!(f_user_hz > 0.0) || !(f_server_hz > 0.0)) {
    throw DomainError("CPU frequencies must be positive");
  }
  const double work = h.local_iteration_constant() * cycles_per_sample *
                      num_samples * std::log2(1.0 / eta);
  return {work * split_ratio_A / f_user_hz,
          work * (1.0 - split_ratio_A) / f_server_hz};
}

ComputeDelay compute_delay(double eta, double split_ratio_A,
                           const UserProfile& user, double f_server_hz,
                           const LearningHyperParams& h) {
  return compute_delay(eta, split_ratio_A, user.cycles_per_sample,
                       user.num_samples, user.f_max_hz, f_server_hz, h);
}

LatencyBreakdown make_breakdown(double eta, ComputeDelay compute,
                                double t_fed_s, double t_main_s,
                                const LearningHyperParams& h) {
  if (!(t_fed_s >= 0.0) || !(t_main_s >= 0.0)) {
    throw DomainError("transmission times must be non-negative");
  }
  LatencyBreakdown out;
  out.compute_client_s = compute.client_s;
  out.compute_server_s = compute.server_s;
  out.upload_fed_s = t_fed_s;
  out.upload_main_per_localiter_s = t_main_s;
  out.local_iters = local_iterations(eta, h);
  out.global_iters = global_iterations(eta, h);
  out.total_s = out.global_iters *
                (out.compute_client_s + out.compute_server_s +
                 out.upload_fed_s + out.local_iters * out.upload_main_per_localiter_s);
  return out;
}

LatencyBreakdown user_round_latency(double eta, double split_ratio_A,
                                    const UserProfile& user,
                                    double f_server_hz, double t_fed_s,
                                    double t_main_s,
                                    const LearningHyperParams& h) {
  return make_breakdown(
      eta, compute_delay(eta, split_ratio_A, user, f_server_hz, h), t_fed_s,
      t_main_s, h);
}

bool transmission_feasible(double t_s, double bandwidth_hz,
                           const rate::LinkBudget& link, double payload_bits) {
  if (payload_bits <= 0.0) return true;
  // A few ulps of slack so the exact boundary t = s / r(b) counts.
  const double sent = t_s * rate::uplink_rate(bandwidth_hz, link);
  return sent >= payload_bits * (1.0 - 4.0 * kEps);
}

}  // namespace fedsllm::delay
