#include "fedsllm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fedsllm/delay_model.hpp"
#include "fedsllm/error.hpp"
#include "fedsllm/rate.hpp"
#include "fedsllm/scenario.hpp"
#include "fedsllm/split_train.hpp"

namespace fedsllm::validation {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double exact_bandwidth(double rate_bps, const rate::LinkBudget& link) {
  try {
    return rate::min_bandwidth(rate_bps, link);
  } catch (const InfeasibleRateError&) {
    return kInf;
  }
}

struct Line {
  std::vector<double> fed;   // decreasing along the line
  std::vector<double> main;  // increasing along the line
};

}  // namespace

double brute_force_T(const opt::ReducedParams& rp, double eta, int grid) {
  if (rp.users.size() != 3) throw DomainError("oracle handles exactly 3 users");
  if (grid < 2) throw DomainError("oracle grid needs at least 2 points");
  const double a = delay::iteration_constant_a(rp.learn);
  const double m = delay::local_iterations(eta, rp.learn);
  const double ell = std::log2(1.0 / eta);
  const double ln2 = std::log(2.0);

  std::vector<double> tc_min;
  std::vector<double> ts_min;
  double T_lo = 0.0;
  for (const auto& u : rp.users) {
    tc_min.push_back(rp.payload_fed_bits * ln2 / u.fed_link.snr_bandwidth());
    ts_min.push_back(rp.payload_main_bits * ln2 / u.main_link.snr_bandwidth());
    const double need = u.compute_coeff * ell + tc_min.back() + m * ts_min.back();
    T_lo = std::max(T_lo, need * a / (1.0 - eta));
  }

  auto lines_at = [&](double T, std::vector<Line>& lines) {
    lines.assign(3, {});
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& u = rp.users[k];
      const double Q = (1.0 - eta) * T / a - u.compute_coeff * ell;
      const double span = Q - tc_min[k] - m * ts_min[k];
      if (!(span > 0.0)) return false;
      for (int i = 0; i < grid; ++i) {
        const double t_fed = tc_min[k] + (i + 0.5) / grid * span;
        const double t_main = (Q - t_fed) / m;
        lines[k].fed.push_back(
            exact_bandwidth(rp.payload_fed_bits / t_fed, u.fed_link));
        lines[k].main.push_back(
            exact_bandwidth(rp.payload_main_bits / t_main, u.main_link));
      }
    }
    return true;
  };

  auto feasible = [&](double T) {
    std::vector<Line> lines;
    if (!lines_at(T, lines)) return false;
    const auto& third = lines[2];
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        const double fed_left =
            rp.bandwidth_fed_hz - lines[0].fed[i] - lines[1].fed[j];
        const double main_left =
            rp.bandwidth_main_hz - lines[0].main[i] - lines[1].main[j];
        if (!(fed_left >= 0.0 && main_left >= 0.0)) continue;
        // First point of the third line whose fed bandwidth fits; later
        // points only need more main bandwidth.
        const auto it = std::partition_point(
            third.fed.begin(), third.fed.end(),
            [&](double b) { return b > fed_left; });
        if (it == third.fed.end()) continue;
        if (third.main[it - third.fed.begin()] <= main_left) return true;
      }
    }
    return false;
  };

  double hi = std::max(T_lo, 1e-9) * 2.0;
  for (int n = 0; !feasible(hi); ++n) {
    if (n > 200) throw SolverError("oracle found no feasible T");
    hi *= 2.0;
  }
  double lo = T_lo;
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<OracleCase> oracle_suite(const ExperimentConfig& base,
                                     int scenarios, std::uint64_t base_seed,
                                     const std::vector<double>& etas,
                                     int grid) {
  std::vector<OracleCase> out;
  for (int s = 0; s < scenarios; ++s) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    ExperimentConfig cfg = base;
    cfg.users = 3;
    cfg.p_max_dbm = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
    cfg.p_max_fed_dbm.reset();
    cfg.p_max_main_dbm.reset();
    const Scenario sc = generate_scenario(cfg, seed);
    const opt::ReducedParams rp = opt::reduce(sc);
    for (double eta : etas) {
      OracleCase c;
      c.seed = seed;
      c.p_max_dbm = cfg.p_max_dbm;
      c.eta = eta;
      c.solver_T = opt::solve_subproblem(eta, rp).T_s;
      c.oracle_T = brute_force_T(rp, eta, grid);
      c.rel_diff = std::abs(c.solver_T - c.oracle_T) / c.oracle_T;
      out.push_back(c);
    }
  }
  return out;
}

RoundTrip rate_roundtrip(int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double noise = dbm_to_watts(-174.0);
  RoundTrip rt;
  rt.pairs = pairs;
  for (int i = 0; i < pairs; ++i) {
    const double gain = std::pow(10.0, -14.0 + 6.0 * unit(rng));
    const double power = std::pow(10.0, -3.0 + 2.0 * unit(rng));
    const double b = std::pow(10.0, 3.0 + 5.0 * unit(rng));
    const auto link = rate::LinkBudget::make(gain, power, noise);
    const double back = rate::min_bandwidth(rate::uplink_rate(b, link), link);
    rt.max_rel_err = std::max(rt.max_rel_err, std::abs(back - b) / b);
  }
  return rt;
}

bool rate_shape_check(int points) {
  auto y = [](double x) { return x * std::log1p(1.0 / x); };
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) {
    xs[i] = std::pow(10.0, -6.0 + 12.0 * i / (points - 1));
  }
  double prev_slope = kInf;
  for (int i = 1; i < points; ++i) {
    const double slope = (y(xs[i]) - y(xs[i - 1])) / (xs[i] - xs[i - 1]);
    if (!(slope > 0.0) || !(slope < prev_slope)) return false;
    prev_slope = slope;
  }
  return true;
}

std::vector<LemmaTrial> lemma_suite(const ExperimentConfig& config, int trials,
                                    std::uint64_t base_seed,
                                    const std::vector<double>& etas) {
  train::ModelShape shape{config.train_features, config.train_hidden,
                          config.train_outputs, config.train_rank,
                          config.train_server_rank};
  train::SyntheticSpec spec{config.train_users, config.train_samples,
                            config.train_noise};
  std::vector<LemmaTrial> out;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(t);
    const auto model = train::SplitModel::make(shape, seed);
    const auto data = train::make_synthetic(spec, model, seed);
    const auto smooth = train::estimate_smoothness(model, data);
    const auto hp = train::compliant_hyperparams(smooth, config.xi,
                                                 config.delta, config.eps0);
    for (double eta : etas) {
      auto state = train::make_state(model, smooth.ridge);
      // One round past the bound is enough to tell a violation.
      const double bound = std::ceil(
          delay::iteration_constant_a(hp) / (1.0 - eta));
      const auto rep = train::train(state, data, eta, hp,
                                    static_cast<int>(bound) + 1);
      LemmaTrial lt;
      lt.seed = seed;
      lt.eta = eta;
      lt.L = smooth.L;
      lt.gamma = smooth.gamma;
      lt.rounds = rep.rounds;
      lt.global_bound = rep.global_bound;
      lt.max_local_iters = rep.max_local_iters;
      lt.local_bound = rep.local_bound;
      lt.certified = rep.certified;
      out.push_back(lt);
    }
  }
  return out;
}

}  // namespace fedsllm::validation
