#include "fedsllm/rate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fedsllm/error.hpp"

namespace fedsllm::rate {

namespace {

constexpr double kLn2 = std::numbers::ln2;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// ln(1+u) - u/(1+u), accurate for small u where the two terms cancel.
double log1p_minus_ratio(double u) {
  if (u < 1e-3) {
    // sum_{n>=2} (-1)^n (n-1)/n u^n
    double term = u * u;
    double sum = 0.0;
    for (int n = 2; n < 12; ++n) {
      const double coeff = static_cast<double>(n - 1) / n;
      sum += ((n % 2 == 0) ? coeff : -coeff) * term;
      term *= u;
    }
    return sum;
  }
  return std::log1p(u) - u / (1.0 + u);
}

}  // namespace

LinkBudget LinkBudget::make(double gain, double power_w, double noise_psd) {
  if (!positive_finite(gain) || !positive_finite(power_w) ||
      !positive_finite(noise_psd)) {
    std::ostringstream os;
    os << "link budget requires positive finite gain/power/noise, got g="
       << gain << " p=" << power_w << " N=" << noise_psd;
    throw DomainError(os.str());
  }
  LinkBudget link{gain, power_w, noise_psd};
  if (!positive_finite(link.snr_bandwidth())) {
    throw DomainError("link budget: g*p/N is not finite and positive");
  }
  return link;
}

double uplink_rate(double bandwidth_hz, const LinkBudget& link) {
  if (!(bandwidth_hz > 0.0)) {
    throw DomainError("uplink_rate: bandwidth must be positive");
  }
  const double c = link.snr_bandwidth();
  return bandwidth_hz * std::log1p(c / bandwidth_hz) / kLn2;
}

double rate_ceiling(const LinkBudget& link) {
  return link.snr_bandwidth() / kLn2;
}

double min_bandwidth(double required_rate, const LinkBudget& link) {
  if (!(required_rate > 0.0)) {
    throw DomainError("min_bandwidth: required rate must be positive");
  }
  const double ceiling = rate_ceiling(link);
  if (!(required_rate <= (1.0 - kCeilingGuard) * ceiling)) {
    std::ostringstream os;
    os << "min_bandwidth: rate " << required_rate
       << " bit/s is not attainable (ceiling " << ceiling << " bit/s)";
    throw InfeasibleRateError(os.str());
  }
  const double c = link.snr_bandwidth();
  auto rate_at = [c](double b) { return b * std::log1p(c / b) / kLn2; };

  // High-SNR start: r(b) <= b*log2(1+c/b) at b = R gives R*log2(1+c/R) >= R
  // whenever c >= R, so b = R often already lies above the root.
  double lo = required_rate;
  double hi = required_rate;
  while (rate_at(lo) > required_rate) lo *= 0.5;
  while (rate_at(hi) < required_rate) hi *= 2.0;
  if (lo == hi) return lo;

  for (int iter = 0; iter < 400 && hi - lo > kBandwidthRelTol * lo; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double m = (mid > lo && mid < hi) ? mid : 0.5 * (lo + hi);
    if (rate_at(m) < required_rate) {
      lo = m;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

double min_bandwidth_fast(double required_rate, double snr_bandwidth) {
  if (!(required_rate > 0.0)) return 0.0;
  const double rho = required_rate * kLn2 / snr_bandwidth;
  if (!(rho <= 1.0 - kCeilingGuard)) {
    return std::numeric_limits<double>::infinity();
  }
  // F(u) = ln(1+u) - rho*u is concave with F(0) = 0, F'(0) = 1 - rho > 0.
  // Its positive root u* is approached monotonically from the right by
  // Newton. Both starts satisfy F <= 0:
  //   ln(1+u) <= u/sqrt(1+u)  =>  u0 = 1/rho^2 - 1
  //   q = 2/rho, u0 = q ln q  (valid for q >= 2)
  const double q = 2.0 / rho;
  double u = std::min(1.0 / (rho * rho) - 1.0, q * std::log(q));
  for (int iter = 0; iter < 200; ++iter) {
    const double f = std::log1p(u) - rho * u;
    const double df = 1.0 / (1.0 + u) - rho;
    if (!(f < 0.0) || !(df < 0.0)) break;
    const double step = f / df;
    u -= step;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * u) break;
  }
  return snr_bandwidth / u;
}

double rate_slope(double bandwidth_hz, double snr_bandwidth) {
  return log1p_minus_ratio(snr_bandwidth / bandwidth_hz) / kLn2;
}

double rate_curvature(double bandwidth_hz, double snr_bandwidth) {
  const double c = snr_bandwidth;
  const double b = bandwidth_hz;
  return -(c * c) / (b * (b + c) * (b + c) * kLn2);
}

}  // namespace fedsllm::rate
