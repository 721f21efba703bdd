#pragma once

// Shannon-rate arithmetic for FDMA uplinks.
//
// A link is summarised by c = g*p/N (Hz). The rate over bandwidth b is
// r(b) = b*log2(1 + c/b), strictly increasing and concave in b with
// supremum c/ln 2.

namespace fedsllm::rate {

struct LinkBudget {
  double gain = 0.0;        // linear channel gain g
  double power_w = 0.0;     // transmit power p
  double noise_psd = 0.0;   // noise power spectral density N, W/Hz

  /// Throws DomainError unless all fields are finite and positive and c is
  /// finite and positive.
  static LinkBudget make(double gain, double power_w, double noise_psd);

  /// c = g*p/N in Hz.
  double snr_bandwidth() const noexcept { return gain * power_w / noise_psd; }
};

/// Relative bracket tolerance on b for min_bandwidth.
inline constexpr double kBandwidthRelTol = 1e-10;
/// Rates above (1 - kCeilingGuard) * ceiling are treated as unattainable.
inline constexpr double kCeilingGuard = 1e-12;

double uplink_rate(double bandwidth_hz, const LinkBudget& link);

double rate_ceiling(const LinkBudget& link);

/// Minimum bandwidth b* with uplink_rate(b*) = required_rate.
///
/// Bracketed geometric bisection on the monotone rate curve. Throws
/// DomainError for required_rate <= 0 and InfeasibleRateError when the
/// rate is at or above the (guarded) ceiling.
double min_bandwidth(double required_rate, const LinkBudget& link);

/// Same root as min_bandwidth, computed from c alone by a monotone Newton
/// iteration on ln(1+u) = rho*u with u = c/b and rho = R*ln2/c. Converges
/// from a certified upper start, so it needs no bracket; used in solver
/// inner loops where bisection would dominate the cost.
///
/// Returns +infinity when required_rate is at or above the guarded ceiling
/// and 0 when required_rate <= 0, instead of throwing.
double min_bandwidth_fast(double required_rate, double snr_bandwidth);

/// d r / d b at bandwidth b for a link with c = snr_bandwidth.
double rate_slope(double bandwidth_hz, double snr_bandwidth);

/// d^2 r / d b^2 at bandwidth b (always negative).
double rate_curvature(double bandwidth_hz, double snr_bandwidth);

}  // namespace fedsllm::rate
