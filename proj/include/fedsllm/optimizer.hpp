#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsllm/delay_model.hpp"
#include "fedsllm/rate.hpp"
#include "fedsllm/scenario.hpp"

namespace fedsllm::opt {

/// Per-user constants after fixing f = f^max, p = p^max and the split ratio.
struct UserReduced {
  int user_id = 0;
  double compute_coeff = 0.0;  // E_k (A/f_k^max + (1-A)/f_s^max), seconds
  rate::LinkBudget fed_link;
  rate::LinkBudget main_link;
  // Inputs kept for rebuilding latency breakdowns.
  double cycles_per_sample = 0.0;
  double num_samples = 0.0;
  double f_max_hz = 0.0;
};

struct ReducedParams {
  std::vector<UserReduced> users;
  double bandwidth_fed_hz = 0.0;   // B_c
  double bandwidth_main_hz = 0.0;  // B_s
  double payload_fed_bits = 0.0;   // s_c
  double payload_main_bits = 0.0;  // s
  double f_server_hz = 0.0;
  double split_ratio_A = 0.0;
  LearningHyperParams learn;
  /// True when A was fixed at A_min by the server-dominance argument,
  /// false when the caller chose A explicitly.
  bool split_at_a_min = true;
};

/// Applies f* = f^max, p* = p^max, A* = A_min. Throws
/// ReductionInvalidError when f_s^max <= f_k^max for some user.
ReducedParams reduce(const Scenario& scenario);

/// Same reductions for f and p, with the split ratio given by the caller.
/// Needs no server-dominance precondition.
ReducedParams reduce_with_split(const Scenario& scenario, double split_ratio_A);

struct UserAllocation {
  double t_fed_s = 0.0;
  double t_main_s = 0.0;
  double b_fed_hz = 0.0;
  double b_main_hz = 0.0;
  delay::LatencyBreakdown latency;
  /// Relative residuals of: the time-budget equality, the main-pool rate
  /// equality, the fed-pool rate equality.
  std::array<double, 3> lemma3_residuals{};
};

struct AllocationSolution {
  double eta = 0.0;
  double split_ratio_A = 0.0;
  double T_s = 0.0;  // max over users of total latency
  double lambda = 0.0;
  bool feasible = false;
  std::vector<UserAllocation> users;

  double sum_b_fed() const;
  double sum_b_main() const;
  double max_lemma3_residual() const;
};

enum class Strategy { kProposed, kEB, kFE, kBA };

std::string_view to_string(Strategy s);
/// Accepts PROPOSED, EB, FE, BA. Throws DomainError otherwise.
Strategy parse_strategy(std::string_view name);

struct StrategyResult {
  Strategy tag = Strategy::kProposed;
  double operating_point = 0.0;
  AllocationSolution solution;
  double wall_time_s = 0.0;
};

/// Fixed local accuracy used by the FE and BA baselines.
inline constexpr double kFixedEta = 0.1;
/// Outer bisection on T stops at this relative width.
inline constexpr double kTimeRelTol = 1e-13;
/// Bracket for the pool-trading weight lambda.
inline constexpr double kLambdaMin = 1e-12;
inline constexpr double kLambdaMax = 1e12;
/// Split-ratio grid step used when A cannot be fixed analytically.
inline constexpr double kSplitRatioStep = 0.05;

struct SplitResult {
  double t_fed_s = 0.0;
  double t_main_s = 0.0;
  double b_fed_hz = 0.0;
  double b_main_hz = 0.0;
};

/// Splits one user's per-round time budget Q between the fed upload (once
/// per round) and the main upload (once per local iteration):
///
///   minimise b_fed(t_fed) + lambda * b_main(t_main)
///   subject to t_fed + local_iters * t_main = Q.
///
/// The objective is convex in t_fed; the stationary point is found by a
/// safeguarded Newton iteration on its derivative. Returns nullopt when Q
/// cannot cover both rate-ceiling lower bounds. lambda = 0 and
/// lambda = +inf are the degenerate limits (one bandwidth unbounded).
std::optional<SplitResult> split_budget(double budget_s, double lambda,
                                        const UserReduced& user,
                                        double payload_fed_bits,
                                        double payload_main_bits,
                                        double local_iters);

/// Per-round time budget Q_k(T) = (1-eta) T / a - compute_coeff * log2(1/eta).
double time_budget(double T, double eta, const UserReduced& user,
                   const LearningHyperParams& h);

struct Feasibility {
  bool feasible = false;
  AllocationSolution allocation;  // meaningful only when feasible
};

/// Can every user finish within T at local accuracy eta?
Feasibility feasible_at(double T, double eta, const ReducedParams& reduced);

/// Minimum-latency allocation for fixed eta. At the returned point every
/// time budget is used exactly, every bandwidth is the minimum meeting its
/// rate, and both pools are exhausted.
AllocationSolution solve_subproblem(double eta, const ReducedParams& reduced);

/// Equal bandwidth B/K per user with the minimal transmission times;
/// T is the slowest user's latency.
AllocationSolution equal_bandwidth_allocation(double eta,
                                              const ReducedParams& reduced);

/// eta grid {step, 2 step, ...} strictly inside (0, 1), plus kFixedEta so
/// the fixed-eta baselines are always restrictions of the sweep.
std::vector<double> eta_grid(double step);

struct OptimizeResult {
  AllocationSolution best;
  std::vector<AllocationSolution> sweep;  // ordered by (A, eta)
};

/// Full proposed method: sweep eta (and A when the reduction is invalid),
/// solve each fixed-eta subproblem, keep the minimum. Ties go to the
/// smallest eta.
OptimizeResult optimize(const Scenario& scenario, double eta_step);

/// Runs one strategy on a scenario. EB sweeps eta with equal bandwidth, FE
/// fixes eta = 0.1 and optimises bandwidth, BA fixes both.
StrategyResult run_strategy(Strategy tag, const Scenario& scenario,
                            double eta_step, double operating_point = 0.0);

/// Baselines only; throws DomainError for PROPOSED.
StrategyResult baseline(Strategy tag, const Scenario& scenario,
                        double eta_step);

struct Lemma3Report {
  std::vector<std::array<double, 3>> residuals;  // per user
  double max_residual = 0.0;
};

/// Recomputes the optimality residuals of `solution` from scratch.
Lemma3Report verify_lemma3(const AllocationSolution& solution,
                           const ReducedParams& reduced);

}  // namespace fedsllm::opt
