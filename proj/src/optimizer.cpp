#include "fedsllm/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "fedsllm/error.hpp"

namespace fedsllm::opt {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum bandwidth for sending `payload` bits in time t over a link with
// c = g p / N, with its first two derivatives in t.
struct BandwidthCurve {
  double b = kInf;
  double db = -kInf;
  double d2b = kInf;
};

BandwidthCurve bandwidth_curve(double payload, double t, double c) {
  BandwidthCurve out;
  out.b = rate::min_bandwidth_fast(payload / t, c);
  if (!std::isfinite(out.b)) return out;
  const double r1 = rate::rate_slope(out.b, c);
  const double r2 = rate::rate_curvature(out.b, c);
  if (!(r1 > 0.0)) {
    out.db = -kInf;
    return out;
  }
  const double t2 = t * t;
  out.db = -payload / (t2 * r1);
  out.d2b = 2.0 * payload / (t2 * t * r1) -
            payload * payload * r2 / (t2 * t2 * r1 * r1 * r1);
  return out;
}

// Rate-ceiling lower bound on the transmission time of `payload` bits.
double min_time(double payload, double c) { return payload * kLn2 / c; }

double log2_inv(double eta) { return std::log2(1.0 / eta); }

// split_budget with a warm start: the Newton iteration begins at
// start_fraction of the slack, and the converged fraction is written back.
std::optional<SplitResult> split_budget_from(double budget_s, double lambda,
                                             const UserReduced& user,
                                             double payload_fed_bits,
                                             double payload_main_bits,
                                             double local_iters,
                                             double start_fraction,
                                             double* end_fraction) {
  if (!(local_iters > 0.0)) {
    throw DomainError("split_budget: local iteration count must be positive");
  }
  if (!(lambda >= 0.0)) {
    throw DomainError("split_budget: lambda must be non-negative");
  }
  const double c_fed = user.fed_link.snr_bandwidth();
  const double c_main = user.main_link.snr_bandwidth();
  const double tc_min = min_time(payload_fed_bits, c_fed);
  const double ts_min = min_time(payload_main_bits, c_main);
  const double slack = budget_s - tc_min - local_iters * ts_min;
  if (!(slack > 0.0)) return std::nullopt;

  // t_fed = tc_min + x, t_main = ts_min + (slack - x)/local_iters.
  auto result_at = [&](double x) {
    SplitResult s;
    s.t_fed_s = tc_min + x;
    s.t_main_s = ts_min + (slack - x) / local_iters;
    s.b_fed_hz = rate::min_bandwidth_fast(payload_fed_bits / s.t_fed_s, c_fed);
    s.b_main_hz =
        rate::min_bandwidth_fast(payload_main_bits / s.t_main_s, c_main);
    return s;
  };
  if (lambda == 0.0) {
    // Main bandwidth is free: all slack to the fed upload.
    SplitResult s = result_at(slack);
    s.t_main_s = ts_min;
    s.b_main_hz = kInf;
    return s;
  }
  if (std::isinf(lambda)) {
    SplitResult s = result_at(0.0);
    s.t_fed_s = tc_min;
    s.b_fed_hz = kInf;
    return s;
  }

  // d/dx [b_fed + lambda b_main] is increasing in x, from -inf at x = 0 to
  // +inf at x = slack. Safeguarded Newton on its root.
  const double w = lambda / local_iters;
  double lo = 0.0;
  double hi = slack;
  double x = std::clamp(start_fraction, 1e-9, 1.0 - 1e-9) * slack;
  for (int iter = 0; iter < 300; ++iter) {
    const auto fed = bandwidth_curve(payload_fed_bits, tc_min + x, c_fed);
    const auto main = bandwidth_curve(payload_main_bits,
                                      ts_min + (slack - x) / local_iters, c_main);
    const bool fed_inf = !std::isfinite(fed.db);
    const bool main_inf = !std::isfinite(main.db);
    if (fed_inf && main_inf) return std::nullopt;
    double g;
    if (fed_inf) {
      g = -kInf;
    } else if (main_inf) {
      g = kInf;
    } else {
      g = fed.db - w * main.db;
      // Stationary to rounding: the two marginal costs agree.
      if (std::abs(g) <= 1e-13 * (std::abs(fed.db) + w * std::abs(main.db))) {
        break;
      }
    }
    if (g > 0.0) {
      hi = x;
    } else if (g < 0.0) {
      lo = x;
    } else {
      break;
    }
    double next = 0.5 * (lo + hi);
    if (std::isfinite(g)) {
      const double h = fed.d2b + w / local_iters * main.d2b;
      const double newton = x - g / h;
      if (std::isfinite(newton) && newton > lo && newton < hi) next = newton;
    }
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-14 * std::min(x, slack - x) || hi - lo <= 1e-15 * slack) {
      break;
    }
  }
  if (end_fraction) *end_fraction = x / slack;
  return result_at(x);
}

// Fixed-eta workspace: per-user budgets and the splits from the most
// recent pool evaluation.
class Subproblem {
 public:
  Subproblem(double eta, const ReducedParams& rp)
      : rp_(rp),
        eta_(eta),
        ell_(log2_inv(eta)),
        local_iters_(delay::local_iterations(eta, rp.learn)),
        alpha_((1.0 - eta) / delay::iteration_constant_a(rp.learn)),
        budgets_(rp.users.size()),
        splits_(rp.users.size()),
        fractions_(rp.users.size(), 0.5) {}

  double local_iters() const { return local_iters_; }

  // Smallest T at which some user's budget just covers both rate-ceiling
  // lower bounds. Below it no bandwidth suffices.
  double time_floor() const {
    double floor = 0.0;
    for (const auto& u : rp_.users) {
      const double need = u.compute_coeff * ell_ +
                          min_time(rp_.payload_fed_bits, u.fed_link.snr_bandwidth()) +
                          local_iters_ * min_time(rp_.payload_main_bits,
                                                  u.main_link.snr_bandwidth());
      floor = std::max(floor, need / alpha_);
    }
    return floor;
  }

  bool set_time(double T) {
    for (std::size_t k = 0; k < rp_.users.size(); ++k) {
      budgets_[k] = alpha_ * T - rp_.users[k].compute_coeff * ell_;
      if (!(budgets_[k] > 0.0)) return false;
    }
    return true;
  }

  // Splits every budget at weight lambda; returns false if some user's
  // budget is below its rate-ceiling floor.
  bool split_all(double lambda, double& fed_sum, double& main_sum) {
    fed_sum = 0.0;
    main_sum = 0.0;
    for (std::size_t k = 0; k < rp_.users.size(); ++k) {
      auto s = split_budget_from(budgets_[k], lambda, rp_.users[k],
                                 rp_.payload_fed_bits, rp_.payload_main_bits,
                                 local_iters_, fractions_[k], &fractions_[k]);
      if (!s) return false;
      splits_[k] = *s;
      fed_sum += s->b_fed_hz;
      main_sum += s->b_main_hz;
    }
    return true;
  }

  // Normalised fed-pool excess at the lambda that exactly fills the main
  // pool: min sum b_fed subject to sum b_main <= B_s, over B_c, minus one.
  // Feasible at T iff the result is <= 0. +inf when infeasible outright.
  double margin(double T) {
    if (!set_time(T)) return kInf;
    const double Bc = rp_.bandwidth_fed_hz;
    const double Bs = rp_.bandwidth_main_hz;
    double fed = 0.0;
    double main = 0.0;

    auto main_excess = [&](double log_lambda) {
      if (!split_all(std::exp(log_lambda), fed, main)) return kInf;
      return main / Bs - 1.0;
    };
    const double y_min = std::log(kLambdaMin);
    const double y_max = std::log(kLambdaMax);

    // Bracket the main-pool root, starting next to the previous root.
    double y_lo = y_min;
    double y_hi = y_max;
    double f_lo = kInf;
    double f_hi = -kInf;
    if (std::isfinite(last_log_lambda_)) {
      constexpr double kStep = 0.25;
      double y = last_log_lambda_;
      double f = main_excess(y);
      if (!std::isfinite(f)) return kInf;
      if (f > 0.0) {
        y_lo = y;
        f_lo = f;
        for (double w = kStep;; w *= 2.0) {
          const double next = std::min(y + w, y_max);
          const double fn = main_excess(next);
          if (fn <= 0.0) {
            y_hi = next;
            f_hi = fn;
            break;
          }
          y_lo = next;
          f_lo = fn;
          if (next == y_max) return kInf;
        }
      } else {
        y_hi = y;
        f_hi = f;
        for (double w = kStep;; w *= 2.0) {
          const double next = std::max(y - w, y_min);
          const double fn = main_excess(next);
          if (!std::isfinite(fn)) return kInf;
          if (fn > 0.0) {
            y_lo = next;
            f_lo = fn;
            break;
          }
          y_hi = next;
          f_hi = fn;
          if (next == y_min) {
            lambda_ = kLambdaMin;
            return fed / Bc - 1.0;
          }
        }
      }
    } else {
      f_lo = main_excess(y_lo);
      if (!std::isfinite(f_lo)) return kInf;
      if (f_lo <= 0.0) {
        lambda_ = kLambdaMin;
        return fed / Bc - 1.0;
      }
      f_hi = main_excess(y_hi);
      if (f_hi > 0.0) return kInf;
    }

    double y_root = y_hi;
    if (f_hi < 0.0) {
      boost::uintmax_t max_iter = 200;
      auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
      auto bracket = boost::math::tools::toms748_solve(
          main_excess, y_lo, y_hi, f_lo, f_hi, tol, max_iter);
      y_root = bracket.second;
    }
    // The upper end keeps main usage at or below the budget.
    const double f = main_excess(y_root);
    if (!std::isfinite(f)) return kInf;
    last_log_lambda_ = y_root;
    lambda_ = std::exp(y_root);
    return fed / Bc - 1.0;
  }

  double lambda() const { return lambda_; }

  AllocationSolution solution(double T) const {
    AllocationSolution sol;
    sol.eta = eta_;
    sol.split_ratio_A = rp_.split_ratio_A;
    sol.lambda = lambda_;
    sol.feasible = true;
    sol.users.reserve(rp_.users.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < rp_.users.size(); ++k) {
      const auto& u = rp_.users[k];
      const auto& s = splits_[k];
      UserAllocation ua;
      ua.t_fed_s = s.t_fed_s;
      ua.t_main_s = s.t_main_s;
      ua.b_fed_hz = s.b_fed_hz;
      ua.b_main_hz = s.b_main_hz;
      ua.latency = delay::make_breakdown(
          eta_,
          delay::compute_delay(eta_, rp_.split_ratio_A, u.cycles_per_sample,
                               u.num_samples, u.f_max_hz, rp_.f_server_hz,
                               rp_.learn),
          s.t_fed_s, s.t_main_s, rp_.learn);
      worst = std::max(worst, ua.latency.total_s);
      sol.users.push_back(ua);
    }
    // Every budget is used exactly, so each T_k equals T up to rounding.
    sol.T_s = std::max(worst, T);
    auto report = verify_lemma3(sol, rp_);
    for (std::size_t k = 0; k < sol.users.size(); ++k) {
      sol.users[k].lemma3_residuals = report.residuals[k];
    }
    return sol;
  }

 private:
  const ReducedParams& rp_;
  double eta_;
  double ell_;
  double local_iters_;
  double alpha_;
  double lambda_ = 0.0;
  std::vector<double> budgets_;
  std::vector<SplitResult> splits_;
  std::vector<double> fractions_;  // warm starts for the per-user splits
  double last_log_lambda_ = std::numeric_limits<double>::quiet_NaN();
};

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw DomainError("local accuracy eta must lie in (0, 1)");
  }
}

std::vector<ReducedParams> reduction_options(const Scenario& scenario) {
  try {
    return {reduce(scenario)};
  } catch (const ReductionInvalidError&) {
    std::vector<ReducedParams> out;
    const double lo = scenario.compute.a_min;
    const double hi = scenario.compute.a_max;
    for (int i = 0;; ++i) {
      const double A = lo + i * kSplitRatioStep;
      if (A > hi + 1e-12) break;
      out.push_back(reduce_with_split(scenario, std::min(A, hi)));
    }
    return out;
  }
}

// Applies `solve` to every reduction option and eta in `etas`, keeping the
// first minimum in (A, eta) order.
template <typename Solve>
AllocationSolution best_over(const std::vector<ReducedParams>& options,
                             const std::vector<double>& etas, Solve&& solve,
                             std::vector<AllocationSolution>* sweep) {
  std::optional<AllocationSolution> best;
  for (const auto& rp : options) {
    for (double eta : etas) {
      AllocationSolution sol = solve(eta, rp);
      if (!best || sol.T_s < best->T_s) best = sol;
      if (sweep) sweep->push_back(std::move(sol));
    }
  }
  return *best;
}

}  // namespace

double AllocationSolution::sum_b_fed() const {
  double s = 0.0;
  for (const auto& u : users) s += u.b_fed_hz;
  return s;
}

double AllocationSolution::sum_b_main() const {
  double s = 0.0;
  for (const auto& u : users) s += u.b_main_hz;
  return s;
}

double AllocationSolution::max_lemma3_residual() const {
  double m = 0.0;
  for (const auto& u : users) {
    for (double r : u.lemma3_residuals) m = std::max(m, r);
  }
  return m;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kProposed: return "PROPOSED";
    case Strategy::kEB: return "EB";
    case Strategy::kFE: return "FE";
    case Strategy::kBA: return "BA";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "PROPOSED") return Strategy::kProposed;
  if (name == "EB") return Strategy::kEB;
  if (name == "FE") return Strategy::kFE;
  if (name == "BA") return Strategy::kBA;
  throw DomainError("unknown strategy '" + std::string(name) + "'");
}

ReducedParams reduce_with_split(const Scenario& scenario, double split_ratio_A) {
  scenario.validate();
  if (!(split_ratio_A > 0.0 && split_ratio_A < 1.0)) {
    throw DomainError("split ratio A must lie in (0, 1)");
  }
  ReducedParams rp;
  rp.bandwidth_fed_hz = scenario.radio.total_bandwidth_fed_hz;
  rp.bandwidth_main_hz = scenario.radio.total_bandwidth_main_hz;
  rp.payload_fed_bits = scenario.radio.payload_fed_bits;
  rp.payload_main_bits = scenario.radio.payload_main_bits;
  rp.f_server_hz = scenario.compute.f_s_max_hz;
  rp.split_ratio_A = split_ratio_A;
  rp.learn = scenario.learn;
  rp.split_at_a_min = false;

  const double v = scenario.learn.local_iteration_constant();
  const double N = scenario.radio.noise_psd_w_per_hz;
  rp.users.reserve(scenario.users.size());
  for (const auto& u : scenario.users) {
    UserReduced ur;
    ur.user_id = u.user_id;
    const double E = v * u.cycles_per_sample * u.num_samples;
    ur.compute_coeff =
        E * (split_ratio_A / u.f_max_hz + (1.0 - split_ratio_A) / rp.f_server_hz);
    ur.fed_link = rate::LinkBudget::make(u.gain_fed, u.p_max_fed_w, N);
    ur.main_link = rate::LinkBudget::make(u.gain_main, u.p_max_main_w, N);
    ur.cycles_per_sample = u.cycles_per_sample;
    ur.num_samples = u.num_samples;
    ur.f_max_hz = u.f_max_hz;
    rp.users.push_back(ur);
  }
  return rp;
}

ReducedParams reduce(const Scenario& scenario) {
  scenario.validate(/*require_server_dominance=*/true);
  ReducedParams rp = reduce_with_split(scenario, scenario.compute.a_min);
  rp.split_at_a_min = true;
  return rp;
}

double time_budget(double T, double eta, const UserReduced& user,
                   const LearningHyperParams& h) {
  check_eta(eta);
  return (1.0 - eta) * T / delay::iteration_constant_a(h) -
         user.compute_coeff * log2_inv(eta);
}

std::optional<SplitResult> split_budget(double budget_s, double lambda,
                                        const UserReduced& user,
                                        double payload_fed_bits,
                                        double payload_main_bits,
                                        double local_iters) {
  return split_budget_from(budget_s, lambda, user, payload_fed_bits,
                           payload_main_bits, local_iters, 0.5, nullptr);
}

Feasibility feasible_at(double T, double eta, const ReducedParams& reduced) {
  check_eta(eta);
  Feasibility out;
  if (!(T > 0.0)) return out;
  Subproblem sub(eta, reduced);
  const double margin = sub.margin(T);
  if (margin <= 0.0) {
    out.feasible = true;
    out.allocation = sub.solution(T);
  }
  return out;
}

AllocationSolution solve_subproblem(double eta, const ReducedParams& reduced) {
  check_eta(eta);
  if (reduced.users.empty()) throw DomainError("no users to allocate");
  Subproblem sub(eta, reduced);

  double lo = sub.time_floor();
  double hi = 2.0 * lo;
  double m_hi = sub.margin(hi);
  for (int i = 0; m_hi > 0.0; ++i) {
    if (i > 200) {
      throw SolverError("solve_subproblem: no feasible latency found");
    }
    lo = hi;
    hi *= 2.0;
    m_hi = sub.margin(hi);
  }
  double m_lo = sub.margin(lo);
  // Near the floor the margin is infinite; bisect until both ends are
  // finite so the bracketing solver sees a continuous function.
  while (!std::isfinite(m_lo) && hi - lo > kTimeRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    const double m_mid = sub.margin(mid);
    if (m_mid > 0.0) {
      lo = mid;
      m_lo = m_mid;
    } else {
      hi = mid;
      m_hi = m_mid;
    }
  }
  if (std::isfinite(m_lo) && m_hi < 0.0) {
    boost::uintmax_t max_iter = 300;
    auto tol = [](double a, double b) {
      return std::abs(b - a) <= kTimeRelTol * std::abs(b);
    };
    auto margin_fn = [&sub](double T) { return sub.margin(T); };
    auto bracket = boost::math::tools::toms748_solve(margin_fn, lo, hi, m_lo,
                                                     m_hi, tol, max_iter);
    hi = bracket.second;
  }
  // Leave the workspace at the feasible end. Warm starts make the margin
  // path-dependent at rounding level, so nudge T up if the re-evaluation
  // lands a hair on the infeasible side.
  double nudge = kTimeRelTol;
  while (!(sub.margin(hi) <= 0.0)) {
    if (nudge > 1e-6) {
      throw SolverError("solve_subproblem: lost feasibility at the bracket end");
    }
    hi *= 1.0 + nudge;
    nudge *= 2.0;
  }
  return sub.solution(hi);
}

AllocationSolution equal_bandwidth_allocation(double eta,
                                              const ReducedParams& reduced) {
  check_eta(eta);
  if (reduced.users.empty()) throw DomainError("no users to allocate");
  const double K = static_cast<double>(reduced.users.size());
  const double b_fed = reduced.bandwidth_fed_hz / K;
  const double b_main = reduced.bandwidth_main_hz / K;

  AllocationSolution sol;
  sol.eta = eta;
  sol.split_ratio_A = reduced.split_ratio_A;
  sol.feasible = true;
  double worst = 0.0;
  for (const auto& u : reduced.users) {
    UserAllocation ua;
    ua.b_fed_hz = b_fed;
    ua.b_main_hz = b_main;
    ua.t_fed_s = reduced.payload_fed_bits / rate::uplink_rate(b_fed, u.fed_link);
    ua.t_main_s =
        reduced.payload_main_bits / rate::uplink_rate(b_main, u.main_link);
    ua.latency = delay::make_breakdown(
        eta,
        delay::compute_delay(eta, reduced.split_ratio_A, u.cycles_per_sample,
                             u.num_samples, u.f_max_hz, reduced.f_server_hz,
                             reduced.learn),
        ua.t_fed_s, ua.t_main_s, reduced.learn);
    worst = std::max(worst, ua.latency.total_s);
    sol.users.push_back(ua);
  }
  sol.T_s = worst;
  auto report = verify_lemma3(sol, reduced);
  for (std::size_t k = 0; k < sol.users.size(); ++k) {
    sol.users[k].lemma3_residuals = report.residuals[k];
  }
  return sol;
}

std::vector<double> eta_grid(double step) {
  if (!(step > 0.0 && step < 1.0)) {
    throw DomainError("eta grid step must lie in (0, 1)");
  }
  std::vector<double> grid;
  const double n = std::round(1.0 / step);
  if (std::abs(n * step - 1.0) < 1e-9) {
    for (int i = 1; i < static_cast<int>(n); ++i) grid.push_back(i / n);
  } else {
    for (int i = 1; i * step < 1.0 - 1e-12; ++i) grid.push_back(i * step);
  }
  if (std::find(grid.begin(), grid.end(), kFixedEta) == grid.end()) {
    grid.push_back(kFixedEta);
    std::sort(grid.begin(), grid.end());
  }
  return grid;
}

OptimizeResult optimize(const Scenario& scenario, double eta_step) {
  OptimizeResult out;
  const auto options = reduction_options(scenario);
  out.best = best_over(options, eta_grid(eta_step), solve_subproblem,
                       &out.sweep);
  return out;
}

StrategyResult run_strategy(Strategy tag, const Scenario& scenario,
                            double eta_step, double operating_point) {
  const auto start = std::chrono::steady_clock::now();
  const auto options = reduction_options(scenario);
  StrategyResult res;
  res.tag = tag;
  res.operating_point = operating_point;
  switch (tag) {
    case Strategy::kProposed:
      res.solution =
          best_over(options, eta_grid(eta_step), solve_subproblem, nullptr);
      break;
    case Strategy::kEB:
      res.solution = best_over(options, eta_grid(eta_step),
                               equal_bandwidth_allocation, nullptr);
      break;
    case Strategy::kFE:
      res.solution = best_over(options, {kFixedEta}, solve_subproblem, nullptr);
      break;
    case Strategy::kBA:
      res.solution = best_over(options, {kFixedEta},
                               equal_bandwidth_allocation, nullptr);
      break;
  }
  res.wall_time_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return res;
}

StrategyResult baseline(Strategy tag, const Scenario& scenario,
                        double eta_step) {
  if (tag == Strategy::kProposed) {
    throw DomainError("baseline: PROPOSED is not a baseline strategy");
  }
  return run_strategy(tag, scenario, eta_step);
}

Lemma3Report verify_lemma3(const AllocationSolution& solution,
                           const ReducedParams& reduced) {
  Lemma3Report report;
  if (solution.users.size() != reduced.users.size()) {
    throw DimensionError("verify_lemma3: solution and parameters disagree on K");
  }
  const double eta = solution.eta;
  const double m = delay::local_iterations(eta, reduced.learn);
  auto rel = [](double lhs, double rhs) {
    if (!(std::abs(rhs) > 0.0)) return kInf;
    const double r = std::abs(lhs - rhs) / std::abs(rhs);
    return std::isnan(r) ? kInf : r;
  };
  for (std::size_t k = 0; k < reduced.users.size(); ++k) {
    const auto& u = reduced.users[k];
    const auto& a = solution.users[k];
    std::array<double, 3> r{};
    const double budget = time_budget(solution.T_s, eta, u, reduced.learn);
    r[0] = rel(a.t_fed_s + m * a.t_main_s, budget);
    r[1] = (a.b_main_hz > 0.0 && std::isfinite(a.b_main_hz))
               ? rel(rate::uplink_rate(a.b_main_hz, u.main_link),
                     reduced.payload_main_bits / a.t_main_s)
               : kInf;
    r[2] = (a.b_fed_hz > 0.0 && std::isfinite(a.b_fed_hz))
               ? rel(rate::uplink_rate(a.b_fed_hz, u.fed_link),
                     reduced.payload_fed_bits / a.t_fed_s)
               : kInf;
    report.max_residual = std::max({report.max_residual, r[0], r[1], r[2]});
    report.residuals.push_back(r);
  }
  return report;
}

}  // namespace fedsllm::opt
