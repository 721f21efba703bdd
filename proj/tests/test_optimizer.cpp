#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fedsllm/config.hpp"
#include "fedsllm/error.hpp"
#include "fedsllm/optimizer.hpp"
#include "fedsllm/scenario.hpp"
#include "fedsllm/validation.hpp"

using namespace fedsllm;
using namespace fedsllm::opt;

namespace {

// K users with identical profiles at distance d_km and no shadowing.
Scenario identical_users(int K, double d_km = 0.2) {
  ExperimentConfig cfg = parse_config("");
  cfg.users = K;
  Scenario sc = generate_scenario(cfg, 1);
  for (auto& u : sc.users) {
    u.position_m = {d_km * 1000.0 / std::sqrt(2.0), d_km * 1000.0 / std::sqrt(2.0)};
    u.gain_fed = u.gain_main = channel_gain(d_km, 0.0);
    u.cycles_per_sample = 2e4;
    u.num_samples = 1200;
  }
  return sc;
}

Scenario small_random(int K, std::uint64_t seed) {
  ExperimentConfig cfg = parse_config("");
  cfg.users = K;
  return generate_scenario(cfg, seed);
}

}  // namespace

TEST_CASE("reduction coefficients") {
  const Scenario sc = small_random(5, 3);
  const ReducedParams rp = reduce(sc);
  const double v = sc.learn.local_iteration_constant();
  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto& u = sc.users[k];
    const double E = v * u.cycles_per_sample * u.num_samples;
    const double expect = E * (0.1 / u.f_max_hz + 0.9 / sc.compute.f_s_max_hz);
    CHECK(rp.users[k].compute_coeff == doctest::Approx(expect).epsilon(1e-14));
  }
  CHECK(rp.split_ratio_A == 0.1);
  CHECK(rp.split_at_a_min);

  const ReducedParams same = reduce(identical_users(3));
  CHECK(same.users[0].compute_coeff == same.users[2].compute_coeff);

  Scenario tiny = sc;
  tiny.compute.a_min = 1e-9;
  tiny.compute.f_s_max_hz = 1e30;
  for (const auto& u : reduce(tiny).users) CHECK(u.compute_coeff < 1e-3);

  Scenario slow = sc;
  slow.compute.f_s_max_hz = 1e9;
  CHECK_THROWS_AS(reduce(slow), ReductionInvalidError);
  CHECK_NOTHROW(reduce_with_split(slow, 0.5));
}

TEST_CASE("time budget") {
  const ReducedParams rp = reduce(small_random(2, 1));
  const auto& u = rp.users[0];
  const double a = delay::iteration_constant_a(rp.learn);
  const double T = 500.0;
  CHECK(time_budget(T, 0.3, u, rp.learn) ==
        doctest::Approx(0.7 * T / a - u.compute_coeff * std::log2(1 / 0.3)));
}

TEST_CASE("split_budget limits and symmetry") {
  const ReducedParams rp = reduce(identical_users(1));
  const auto& u = rp.users[0];
  const double s_c = rp.payload_fed_bits;
  const double s = rp.payload_main_bits;
  const double Q = 0.5;
  const double m = 4.0;
  const double tc_min = s_c * std::log(2.0) / u.fed_link.snr_bandwidth();
  const double ts_min = s * std::log(2.0) / u.main_link.snr_bandwidth();

  const auto zero = split_budget(Q, 0.0, u, s_c, s, m);
  REQUIRE(zero);
  CHECK(zero->t_main_s == doctest::Approx(ts_min));
  CHECK(std::isinf(zero->b_main_hz));
  CHECK(zero->t_fed_s + m * zero->t_main_s == doctest::Approx(Q));

  const auto inf = split_budget(Q, INFINITY, u, s_c, s, m);
  REQUIRE(inf);
  CHECK(inf->t_fed_s == doctest::Approx(tc_min));
  CHECK(std::isinf(inf->b_fed_hz));

  // Symmetric links and payloads with one local iteration and unit weight.
  const auto sym = split_budget(Q, 1.0, u, s, s, 1.0);
  REQUIRE(sym);
  CHECK(sym->t_fed_s == doctest::Approx(Q / 2).epsilon(1e-10));
  CHECK(sym->t_main_s == doctest::Approx(Q / 2).epsilon(1e-10));

  // The split minimises b_fed + lambda b_main along the budget line.
  const double lambda = 3.0;
  const auto best = split_budget(Q, lambda, u, s_c, s, m);
  REQUIRE(best);
  const double obj = best->b_fed_hz + lambda * best->b_main_hz;
  for (double x = 0.01; x < 1.0; x += 0.01) {
    const double slack = Q - tc_min - m * ts_min;
    const double tc = tc_min + x * slack;
    const double ts = (Q - tc) / m;
    const double o = rate::min_bandwidth(s_c / tc, u.fed_link) +
                     lambda * rate::min_bandwidth(s / ts, u.main_link);
    CHECK(obj <= o * (1 + 1e-9));
  }

  CHECK_FALSE(split_budget(tc_min + m * ts_min, 1.0, u, s_c, s, m));
  CHECK_THROWS_AS(split_budget(Q, -1.0, u, s_c, s, m), DomainError);
}

TEST_CASE("single user takes both pools") {
  const ReducedParams rp = reduce(identical_users(1));
  const auto sol = solve_subproblem(0.4, rp);
  REQUIRE(sol.users.size() == 1);
  CHECK(sol.users[0].b_fed_hz == doctest::Approx(rp.bandwidth_fed_hz).epsilon(1e-9));
  CHECK(sol.users[0].b_main_hz == doctest::Approx(rp.bandwidth_main_hz).epsilon(1e-9));
  CHECK(sol.max_lemma3_residual() <= 1e-6);

  // Just above T* a grid along the budget line finds a point inside both pools.
  const auto& u = rp.users[0];
  const double m = delay::local_iterations(0.4, rp.learn);
  const double Q = time_budget(1.01 * sol.T_s, 0.4, u, rp.learn);
  bool any = false;
  for (int i = 1; i < 2000; ++i) {
    const double tc = Q * i / 2000.0;
    const double ts = (Q - tc) / m;
    try {
      const double bc = rate::min_bandwidth(rp.payload_fed_bits / tc, u.fed_link);
      const double bs = rate::min_bandwidth(rp.payload_main_bits / ts, u.main_link);
      if (bc <= rp.bandwidth_fed_hz * (1 + 1e-6) && bs <= rp.bandwidth_main_hz * (1 + 1e-6)) {
        any = true;
      }
    } catch (const InfeasibleRateError&) {
    }
  }
  CHECK(any);
  CHECK_FALSE(feasible_at(sol.T_s * 0.99, 0.4, rp).feasible);
}

TEST_CASE("identical users split the pools evenly") {
  const ReducedParams rp = reduce(identical_users(4));
  const auto sol = solve_subproblem(0.5, rp);
  for (const auto& u : sol.users) {
    CHECK(u.b_fed_hz == doctest::Approx(rp.bandwidth_fed_hz / 4).epsilon(1e-8));
    CHECK(u.b_main_hz == doctest::Approx(rp.bandwidth_main_hz / 4).epsilon(1e-8));
  }
}

TEST_CASE("solver postconditions on a heterogeneous scenario") {
  const ReducedParams rp = reduce(small_random(8, 4));
  for (double eta : {0.05, 0.3, 0.7, 0.95}) {
    const auto sol = solve_subproblem(eta, rp);
    CHECK(sol.feasible);
    CHECK(sol.max_lemma3_residual() <= 1e-6);
    CHECK(sol.sum_b_fed() <= rp.bandwidth_fed_hz * (1 + 1e-9));
    CHECK(sol.sum_b_main() <= rp.bandwidth_main_hz * (1 + 1e-9));
    CHECK(sol.sum_b_fed() >= rp.bandwidth_fed_hz * (1 - 1e-9));
    CHECK(sol.sum_b_main() >= rp.bandwidth_main_hz * (1 - 1e-9));
    for (const auto& u : sol.users) {
      CHECK(u.latency.total_s <= sol.T_s * (1 + 1e-6));
      CHECK(u.t_fed_s >= 0.0);
      CHECK(u.b_main_hz >= 0.0);
    }
    CHECK(feasible_at(sol.T_s * 1.01, eta, rp).feasible);
    CHECK_FALSE(feasible_at(sol.T_s * 0.99, eta, rp).feasible);
  }
}

TEST_CASE("feasibility limits") {
  ReducedParams rp = reduce(small_random(3, 2));
  CHECK_FALSE(feasible_at(1e-6, 0.5, rp).feasible);
  const double T = solve_subproblem(0.5, rp).T_s;
  CHECK(feasible_at(10 * T, 0.5, rp).feasible);
  rp.bandwidth_fed_hz *= 2;
  rp.bandwidth_main_hz *= 2;
  CHECK(solve_subproblem(0.5, rp).T_s < T);
}

TEST_CASE("lemma3 verifier flags a perturbed solution") {
  const ReducedParams rp = reduce(small_random(4, 9));
  auto sol = solve_subproblem(0.4, rp);
  CHECK(verify_lemma3(sol, rp).max_residual <= 1e-6);
  sol.users[0].t_fed_s *= 1.1;
  const auto rep = verify_lemma3(sol, rp);
  CHECK(rep.residuals[0][0] > 1e-3);
  CHECK(rep.max_residual > 1e-6);
}

TEST_CASE("eta grid") {
  const auto g = eta_grid(0.01);
  CHECK(g.size() == 99);
  CHECK(g.front() == doctest::Approx(0.01));
  CHECK(g.back() == doctest::Approx(0.99));
  CHECK(std::find(g.begin(), g.end(), kFixedEta) != g.end());
  const auto c = eta_grid(0.3);
  CHECK(std::find(c.begin(), c.end(), kFixedEta) != c.end());
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK_THROWS_AS(eta_grid(0.0), DomainError);
  CHECK_THROWS_AS(eta_grid(1.0), DomainError);
}

TEST_CASE("optimize returns the sweep minimum; finer grid never worse") {
  const Scenario sc = small_random(6, 5);
  const auto fine = optimize(sc, 0.01);
  double best = INFINITY;
  for (const auto& s : fine.sweep) best = std::min(best, s.T_s);
  CHECK(fine.best.T_s == best);
  CHECK(fine.sweep.size() == 99);
  const auto coarse = optimize(sc, 0.1);
  CHECK(coarse.best.T_s >= fine.best.T_s);
}

TEST_CASE("strategy ordering and baselines") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Scenario sc = small_random(10, seed);
    const double P = run_strategy(Strategy::kProposed, sc, 0.05).solution.T_s;
    const auto eb = baseline(Strategy::kEB, sc, 0.05);
    const auto fe = baseline(Strategy::kFE, sc, 0.05);
    const auto ba = baseline(Strategy::kBA, sc, 0.05);
    CHECK(P <= eb.solution.T_s);
    CHECK(P <= fe.solution.T_s);
    CHECK(fe.solution.T_s <= ba.solution.T_s);
    CHECK(eb.solution.T_s <= ba.solution.T_s);
    CHECK(fe.solution.eta == kFixedEta);
    CHECK(ba.solution.eta == kFixedEta);
    CHECK(eb.tag == Strategy::kEB);
    for (const auto& u : ba.solution.users) {
      CHECK(u.b_fed_hz == doctest::Approx(2e6));
    }
  }
  CHECK_THROWS_AS(baseline(Strategy::kProposed, small_random(2, 1), 0.1), DomainError);
  CHECK(parse_strategy("FE") == Strategy::kFE);
  CHECK(to_string(Strategy::kBA) == "BA");
  CHECK_THROWS_AS(parse_strategy("XX"), DomainError);
}

TEST_CASE("more resources never hurt") {
  ExperimentConfig cfg = parse_config("");
  cfg.users = 6;
  const double base = optimize(generate_scenario(cfg, 2), 0.05).best.T_s;
  ExperimentConfig wide = cfg;
  wide.bandwidth_fed_mhz = wide.bandwidth_main_mhz = 40;
  CHECK(optimize(generate_scenario(wide, 2), 0.05).best.T_s <= base);
  ExperimentConfig loud = cfg;
  loud.p_max_dbm = cfg.p_max_dbm + 10 * std::log10(2.0);
  CHECK(optimize(generate_scenario(loud, 2), 0.05).best.T_s <= base);
}

TEST_CASE("invalid reduction sweeps the split ratio") {
  ExperimentConfig cfg = parse_config("");
  cfg.users = 4;
  cfg.f_max_server_ghz = 1.5;
  const Scenario sc = generate_scenario(cfg, 3);
  const auto res = optimize(sc, 0.1);
  CHECK(res.sweep.size() == 17 * eta_grid(0.1).size());
  CHECK(res.best.split_ratio_A >= 0.1);
  CHECK(res.best.max_lemma3_residual() <= 1e-6);
  const double P = res.best.T_s;
  CHECK(P <= run_strategy(Strategy::kBA, sc, 0.1).solution.T_s);
}

TEST_CASE("three-user oracle agreement") {
  const auto cases =
      validation::oracle_suite(parse_config(""), 2, 100, {0.2, 0.8}, 200);
  for (const auto& c : cases) {
    CHECK(c.rel_diff < 0.01);
    CHECK(c.solver_T <= c.oracle_T * (1 + 1e-9));
  }
}
