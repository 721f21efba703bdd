#include <doctest.h>

#include <cmath>

#include "fedsllm/delay_model.hpp"
#include "fedsllm/error.hpp"

using namespace fedsllm;
using namespace fedsllm::delay;

namespace {
LearningHyperParams defaults() { return {}; }
}  // namespace

TEST_CASE("iteration constant a") {
  CHECK(iteration_constant_a(defaults()) == doctest::Approx(552.6204).epsilon(1e-7));
  LearningHyperParams h;
  h.lipschitz_L = h.strong_convexity_gamma = 3.0;
  h.surrogate_weight_xi = 0.25;
  h.global_accuracy_eps0 = std::exp(-1.0);
  CHECK(iteration_constant_a(h) == doctest::Approx(2.0 / 0.25).epsilon(1e-14));
  h.global_accuracy_eps0 = 1.0 - 1e-12;
  CHECK(iteration_constant_a(h) < 1e-10);
}

TEST_CASE("global iterations") {
  CHECK(global_iterations(0.5, defaults()) == doctest::Approx(1105.2408).epsilon(1e-7));
  CHECK(global_iterations(1e-9, defaults()) ==
        doctest::Approx(iteration_constant_a(defaults())).epsilon(1e-8));
  double prev = 0.0;
  for (double eta = 0.01; eta < 1.0; eta += 0.01) {
    const double I = global_iterations(eta, defaults());
    CHECK(I > prev);
    prev = I;
  }
  CHECK_THROWS_AS(global_iterations(0.0, defaults()), DomainError);
  CHECK_THROWS_AS(global_iterations(1.0, defaults()), DomainError);
}

TEST_CASE("local iterations") {
  CHECK(defaults().local_iteration_constant() == doctest::Approx(6.25).epsilon(1e-14));
  CHECK(local_iterations(0.5, defaults()) == doctest::Approx(6.25).epsilon(1e-14));
  CHECK(local_iterations(1.0 - 1e-12, defaults()) < 1e-9);
  CHECK(local_iterations(0.125, defaults()) - local_iterations(0.25, defaults()) ==
        doctest::Approx(6.25).epsilon(1e-12));
  double prev = INFINITY;
  for (double eta = 0.01; eta < 1.0; eta += 0.01) {
    const double m = local_iterations(eta, defaults());
    CHECK(m < prev);
    prev = m;
  }
  LearningHyperParams bad;
  bad.step_size_delta = 0.5;  // 2/L = 0.5
  CHECK_THROWS_AS(bad.validate(), HyperparameterError);
}

TEST_CASE("compute delay") {
  const auto d = compute_delay(0.5, 0.2, 2e4, 1200, 2e9, 1e10, defaults());
  CHECK(d.client_s == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(d.server_s == doctest::Approx(0.012).epsilon(1e-12));
  CHECK(compute_delay(0.5, 1.0, 2e4, 1200, 2e9, 1e10, defaults()).server_s == 0.0);
  double prev = INFINITY;
  for (double A = 0.9; A > 0.05; A -= 0.1) {
    const auto c = compute_delay(0.3, A, 2e4, 1200, 2e9, 1e10, defaults());
    CHECK(c.client_s + c.server_s < prev);
    prev = c.client_s + c.server_s;
  }
  const auto twice = compute_delay(0.5, 0.2, 4e4, 2400, 2e9, 1e10, defaults());
  CHECK(twice.client_s == doctest::Approx(4.0 * d.client_s));
  CHECK_THROWS_AS(compute_delay(0.5, 1.5, 2e4, 1200, 2e9, 1e10, defaults()), DomainError);
}

TEST_CASE("round latency identity") {
  UserProfile u;
  u.cycles_per_sample = 2e4;
  u.num_samples = 1200;
  u.f_max_hz = 2e9;
  const auto b = user_round_latency(0.5, 0.2, u, 1e10, 0.01, 0.002, defaults());
  CHECK(b.total_s == doctest::Approx(54.7094).epsilon(1e-6));
  const double identity =
      b.global_iters * (b.compute_client_s + b.compute_server_s + b.upload_fed_s +
                        b.local_iters * b.upload_main_per_localiter_s);
  CHECK(std::abs(b.total_s - identity) <= 1e-12 * identity);

  const auto zero = user_round_latency(0.5, 0.2, u, 1e10, 0.0, 0.0, defaults());
  CHECK(zero.total_s == doctest::Approx(1105.2408 * 0.027).epsilon(1e-7));

  // Affine and increasing in each transmission time.
  const double t0 = user_round_latency(0.5, 0.2, u, 1e10, 0.01, 0.002, defaults()).total_s;
  const double t1 = user_round_latency(0.5, 0.2, u, 1e10, 0.02, 0.002, defaults()).total_s;
  const double t2 = user_round_latency(0.5, 0.2, u, 1e10, 0.03, 0.002, defaults()).total_s;
  CHECK(t1 > t0);
  CHECK((t2 - t1) == doctest::Approx(t1 - t0).epsilon(1e-9));
  const double s1 = user_round_latency(0.5, 0.2, u, 1e10, 0.01, 0.004, defaults()).total_s;
  CHECK(s1 > t0);
  CHECK_THROWS_AS(user_round_latency(0.5, 0.2, u, 1e10, -1.0, 0.0, defaults()), DomainError);
}

TEST_CASE("transmission feasibility") {
  const auto link = rate::LinkBudget::make(1e-9, 0.01, 3.981e-21);
  const double b = 1e6;
  const double payload = 281e3;
  const double t = payload / rate::uplink_rate(b, link);
  CHECK(transmission_feasible(t, b, link, 0.0));
  CHECK(transmission_feasible(t, b, link, payload));
  CHECK_FALSE(transmission_feasible(0.99 * t, b, link, payload));
  CHECK(transmission_feasible(1.01 * t, b, link, payload));
}
