#include <doctest.h>

#include <cmath>
#include <random>

#include "fedsllm/config.hpp"
#include "fedsllm/error.hpp"
#include "fedsllm/rate.hpp"
#include "fedsllm/validation.hpp"

using namespace fedsllm;
using namespace fedsllm::rate;

namespace {
const double kN = dbm_to_watts(-174.0);
LinkBudget reference_link() { return LinkBudget::make(1e-9, 0.01, kN); }
}  // namespace

TEST_CASE("forward rate") {
  const auto link = reference_link();
  const double c = link.snr_bandwidth();
  CHECK(c == doctest::Approx(2.511886e9).epsilon(1e-6));
  CHECK(uplink_rate(1e6, link) == doctest::Approx(1.129513e7).epsilon(1e-6));
  CHECK(uplink_rate(c, link) == doctest::Approx(c).epsilon(1e-14));
  const double big = uplink_rate(1e12 * c, link);
  CHECK(std::abs(big - rate_ceiling(link)) / rate_ceiling(link) < 1e-6);
  CHECK_THROWS_AS(uplink_rate(0.0, link), DomainError);
  CHECK_THROWS_AS(uplink_rate(-5.0, link), DomainError);
}

TEST_CASE("rate ceiling") {
  CHECK(rate_ceiling(reference_link()) == doctest::Approx(3.623886e9).epsilon(1e-6));
  const auto unit = LinkBudget::make(std::log(2.0), 1.0, 1.0);
  CHECK(rate_ceiling(unit) == doctest::Approx(1.0).epsilon(1e-15));
  for (double b : {1.0, 1e3, 1e6, 1e9, 1e12}) {
    CHECK(uplink_rate(b, reference_link()) < rate_ceiling(reference_link()));
  }
}

TEST_CASE("link budget validation") {
  CHECK_THROWS_AS(LinkBudget::make(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(LinkBudget::make(1e-9, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(LinkBudget::make(1e-9, 1.0, 0.0), DomainError);
}

TEST_CASE("min_bandwidth round trip and errors") {
  const auto link = reference_link();
  for (double b0 : {1e3, 1e6, 1e9}) {
    const double b = min_bandwidth(uplink_rate(b0, link), link);
    CHECK(std::abs(b - b0) / b0 < 1e-9);
  }
  const double near = 0.999999 * rate_ceiling(link);
  const double b = min_bandwidth(near, link);
  CHECK(std::isfinite(b));
  CHECK(b > 1e3 * link.snr_bandwidth());
  CHECK(std::abs(uplink_rate(b, link) - near) / near < 1e-9);
  CHECK_THROWS_AS(min_bandwidth(rate_ceiling(link), link), InfeasibleRateError);
  CHECK_THROWS_AS(min_bandwidth(2.0 * rate_ceiling(link), link), InfeasibleRateError);
  CHECK_THROWS_AS(min_bandwidth(0.0, link), DomainError);
  double prev = INFINITY;
  for (double r = 1e3; r > 1e-3; r /= 10.0) {
    const double bb = min_bandwidth(r, link);
    CHECK(bb < prev);
    prev = bb;
  }
  CHECK(prev < 1e-2);  // b < r once c > b
}

TEST_CASE("fast inversion agrees with bisection") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const auto link = LinkBudget::make(std::pow(10.0, -14 + 6 * u(rng)),
                                       std::pow(10.0, -3 + 2 * u(rng)), kN);
    const double R = rate_ceiling(link) * (0.999 * u(rng) + 1e-4);
    const double slow = min_bandwidth(R, link);
    const double fast = min_bandwidth_fast(R, link.snr_bandwidth());
    CHECK(std::abs(fast - slow) / slow < 1e-9);
  }
  CHECK(std::isinf(min_bandwidth_fast(1e20, 1e6)));
  CHECK(min_bandwidth_fast(0.0, 1e6) == 0.0);
}

TEST_CASE("inverse is convex and increasing in rate") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto link = LinkBudget::make(std::pow(10.0, -13 + 4 * u(rng)), 0.01, kN);
    const double cap = rate_ceiling(link);
    const double r1 = cap * 0.9 * u(rng) + 1.0;
    const double r2 = cap * 0.9 * u(rng) + 1.0;
    const double mid = min_bandwidth(0.5 * (r1 + r2), link);
    const double chord = 0.5 * (min_bandwidth(r1, link) + min_bandwidth(r2, link));
    CHECK(mid <= chord * (1.0 + 1e-9));
    if (r1 < r2) CHECK(min_bandwidth(r1, link) < min_bandwidth(r2, link));
  }
}

TEST_CASE("slope and curvature match finite differences") {
  const double c = 2.5e9;
  for (double b : {1e3, 1e6, 1e9, 1e11}) {
    const double h = 1e-4 * b;
    auto rate = [&](double x) { return x * std::log1p(c / x) / std::log(2.0); };
    const double fd1 = (rate(b + h) - rate(b - h)) / (2 * h);
    const double fd2 = (rate(b + h) - 2 * rate(b) + rate(b - h)) / (h * h);
    CHECK(rate_slope(b, c) == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(rate_slope(b, c) > 0.0);
    CHECK(rate_curvature(b, c) < 0.0);
    if (b <= 1e9) CHECK(rate_curvature(b, c) == doctest::Approx(fd2).epsilon(1e-3));
  }
}

TEST_CASE("scaled rate is increasing and concave") {
  CHECK(validation::rate_shape_check());
}
