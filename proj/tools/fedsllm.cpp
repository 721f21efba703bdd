// fedsllm command line: optimize, sweep, train, validate.
//
// Exit codes: 0 success, 1 config error, 2 solver failure, 3 I/O error.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsllm/config.hpp"
#include "fedsllm/error.hpp"
#include "fedsllm/harness.hpp"
#include "fedsllm/optimizer.hpp"
#include "fedsllm/scenario.hpp"
#include "fedsllm/split_train.hpp"
#include "fedsllm/validation.hpp"

namespace {

using namespace fedsllm;
using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kIo = 3 };

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta_step;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (JSON)");
  cmd->add_option("--seed", c.seed, "Scenario / base seed");
  cmd->add_option("--eta-step", c.eta_step, "eta grid step");
  cmd->add_option("--out", c.out, "Output path");
  cmd->add_option("--format", c.format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.eta_step) cfg.eta_step = *c.eta_step;
  cfg.validate();
  return cfg;
}

json solution_json(const opt::AllocationSolution& s) {
  json j;
  j["eta_star"] = s.eta;
  j["split_ratio_A"] = s.split_ratio_A;
  j["T_seconds"] = s.T_s;
  j["lambda"] = s.lambda;
  j["sum_bc_hz"] = s.sum_b_fed();
  j["sum_bs_hz"] = s.sum_b_main();
  j["max_lemma3_residual"] = s.max_lemma3_residual();
  json users = json::array();
  for (const auto& u : s.users) {
    users.push_back({{"t_fed_s", u.t_fed_s},
                     {"t_main_s", u.t_main_s},
                     {"b_fed_hz", u.b_fed_hz},
                     {"b_main_hz", u.b_main_hz},
                     {"total_s", u.latency.total_s}});
  }
  j["users"] = users;
  return j;
}

int cmd_optimize(const Common& c) {
  const auto cfg = load(c);
  const auto sc = generate_scenario(cfg, cfg.seed);
  const auto res = opt::optimize(sc, cfg.eta_step);
  const auto& s = res.best;
  std::cout << "users          " << s.users.size() << "\n"
            << "eta*           " << s.eta << "\n"
            << "split ratio A  " << s.split_ratio_A << "\n"
            << "T* (s)         " << s.T_s << "\n"
            << "sum b_c (Hz)   " << s.sum_b_fed() << "\n"
            << "sum b_s (Hz)   " << s.sum_b_main() << "\n"
            << "lemma3 resid.  " << s.max_lemma3_residual() << "\n";
  if (!c.out.empty()) {
    harness::write_text(c.out, solution_json(s).dump(2) + "\n");
  }
  return kOk;
}

int cmd_sweep(const Common& c, bool timing) {
  const auto cfg = load(c);
  auto spec = harness::SweepSpec::from_config(cfg);
  spec.timing = timing;
  const auto fmt = harness::parse_format(c.format);
  const std::string out =
      c.out.empty() ? (fmt == harness::Format::kCsv ? "sweep.csv" : "sweep.jsonl")
                    : c.out;
  const auto report = harness::run_sweep(spec, cfg);
  harness::export_report(report, out, fmt);
  harness::write_text(out + ".summary.json", harness::render_summary(report));
  std::cout << "rows " << report.rows.size() << ", failures "
            << report.errors.size() << " -> " << out << "\n";
  for (auto s : spec.strategies) {
    if (s == opt::Strategy::kProposed) continue;
    try {
      const auto imp = harness::improvement_vs(report, s);
      std::cout << "mean improvement vs " << opt::to_string(s) << ": "
                << imp.mean_percent << " %\n";
    } catch (const DomainError&) {
    }
  }
  return report.errors.empty() ? kOk : kSolver;
}

int cmd_train(const Common& c, std::optional<double> eta) {
  const auto cfg = load(c);
  train::ModelShape shape{cfg.train_features, cfg.train_hidden,
                          cfg.train_outputs, cfg.train_rank,
                          cfg.train_server_rank};
  train::Dataset data;
  train::SplitModel model;
  if (cfg.train_dataset.empty()) {
    model = train::SplitModel::make(shape, cfg.seed);
    data = train::make_synthetic(
        {cfg.train_users, cfg.train_samples, cfg.train_noise}, model, cfg.seed);
  } else {
    data = train::load_dataset(cfg.train_dataset, cfg.train_users, cfg.seed);
    shape.features = data.feature_dim();
    model = train::SplitModel::make(shape, cfg.seed);
  }
  const auto smooth = train::estimate_smoothness(model, data);
  const auto hp =
      train::compliant_hyperparams(smooth, cfg.xi, cfg.delta, cfg.eps0);
  auto state = train::make_state(model, smooth.ridge);
  std::vector<train::RoundRecord> transcript;
  const double run_eta = eta.value_or(cfg.train_eta);
  const auto rep =
      train::train(state, data, run_eta, hp, cfg.train_max_rounds, &transcript);

  const std::string out = c.out.empty() ? "train_transcript.jsonl" : c.out;
  std::string text;
  if (c.format == "csv") {
    text = "round,user,local_iters,F_k,gap_ratio,bytes_up_main,bytes_up_fed,bytes_up_sync\n";
    for (const auto& r : transcript) {
      text += std::to_string(r.round) + "," + std::to_string(r.user) + "," +
              std::to_string(r.local_iters) + "," + json(r.F_k).dump() + "," +
              json(r.gap_ratio).dump() + "," + std::to_string(r.bytes_up_main) +
              "," + std::to_string(r.bytes_up_fed) + "," +
              std::to_string(r.bytes_up_sync) + "\n";
    }
  } else {
    for (const auto& r : transcript) text += train::to_json_line(r) + "\n";
  }
  harness::write_text(out, text);

  std::cout << "L " << smooth.L << ", gamma " << smooth.gamma
            << (smooth.ridge > 0 ? " (ridge on)" : "") << "\n"
            << "xi " << hp.surrogate_weight_xi << ", delta "
            << hp.step_size_delta << ", eta " << run_eta << "\n"
            << "rounds " << rep.rounds << " (bound " << rep.global_bound
            << "), max local iters " << rep.max_local_iters << " (bound "
            << rep.local_bound << ")\n"
            << "global gap ratio " << rep.final_gap_ratio
            << (rep.certified ? " (eps0 reached)" : " (eps0 not reached)")
            << "\n-> " << out << "\n";
  return rep.certified ? kOk : kSolver;
}

int cmd_validate(const Common& c, int scenarios, int trials) {
  const auto cfg = load(c);
  bool all = true;
  json doc;
  auto line = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    all = all && ok;
    doc[name] = {{"pass", ok}, {"detail", detail}};
  };

  const auto rt = validation::rate_roundtrip(1000, cfg.seed);
  line("rate_roundtrip", rt.max_rel_err <= 1e-9,
       "max rel err " + sci(rt.max_rel_err));
  line("rate_shape", validation::rate_shape_check(), "y = x ln(1+1/x) on [1e-6, 1e6]");

  const auto sc = generate_scenario(cfg, cfg.seed);
  const auto best = opt::optimize(sc, cfg.eta_step).best;
  line("lemma3", best.max_lemma3_residual() <= 1e-6,
       "max residual " + sci(best.max_lemma3_residual()));

  double worst = 0.0;
  const auto cases =
      validation::oracle_suite(cfg, scenarios, cfg.seed, {0.1, 0.5, 0.9});
  for (const auto& o : cases) worst = std::max(worst, o.rel_diff);
  line("oracle", worst <= 0.01,
       std::to_string(cases.size()) + " cases, worst rel diff " +
           sci(worst));

  const auto lemma = validation::lemma_suite(cfg, trials, cfg.seed, {0.1, 0.5, 0.9});
  int ok = 0;
  for (const auto& t : lemma) ok += t.within_bounds() ? 1 : 0;
  line("lemma1_2", ok >= 0.95 * lemma.size(),
       std::to_string(ok) + "/" + std::to_string(lemma.size()) +
           " runs within both bounds");

  if (!c.out.empty()) harness::write_text(c.out, doc.dump(2) + "\n");
  return all ? kOk : kSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-optimal resource allocation and split training for FedsLLM"};
  app.require_subcommand(1);

  Common opt_c, sweep_c, train_c, val_c;
  auto* optimize = app.add_subcommand("optimize", "Solve one scenario over the eta grid");
  add_common(optimize, opt_c);

  bool timing = false;
  auto* sweep = app.add_subcommand("sweep", "Run the configured sweep and export rows");
  add_common(sweep, sweep_c);
  sweep->add_flag("--timing", timing, "Record wall-clock solve_ms");

  std::optional<double> train_eta;
  auto* trainc = app.add_subcommand("train", "Run split training and write a transcript");
  add_common(trainc, train_c);
  train_c.format = "jsonl";
  trainc->add_option("--eta", train_eta, "Local accuracy (default train_eta)");

  int scenarios = 20;
  int trials = 50;
  auto* validate = app.add_subcommand("validate", "Oracle, rate and convergence-bound checks");
  add_common(validate, val_c);
  validate->add_option("--oracle-scenarios", scenarios, "Three-user oracle scenarios")
      ->check(CLI::PositiveNumber);
  validate->add_option("--trials", trials, "Training trials per eta")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*optimize) return cmd_optimize(opt_c);
    if (*sweep) return cmd_sweep(sweep_c, timing);
    if (*trainc) return cmd_train(train_c, train_eta);
    if (*validate) return cmd_validate(val_c, scenarios, trials);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kOk;
}
