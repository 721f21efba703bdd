#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedsllm/config.hpp"
#include "fedsllm/error.hpp"
#include "fedsllm/harness.hpp"

using namespace fedsllm;
using namespace fedsllm::harness;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = parse_config("");
  c.users = 4;
  return c;
}

SweepSpec spec_of(std::vector<double> values, int seeds) {
  SweepSpec s;
  s.values = std::move(values);
  s.strategies = {opt::Strategy::kProposed, opt::Strategy::kEB, opt::Strategy::kFE,
                  opt::Strategy::kBA};
  s.seeds = seeds;
  s.eta_step = 0.1;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepRow row(double value, opt::Strategy s, double T) {
  SweepRow r;
  r.var = "p_max_dbm";
  r.value = value;
  r.strategy = s;
  r.T_seconds = T;
  return r;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(spec_of({}, 1).validate(), ConfigError);
  CHECK_THROWS_AS(spec_of({0}, 0).validate(), ConfigError);
  SweepSpec bad = spec_of({0}, 1);
  bad.var = "noise";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = spec_of({0}, 1);
  bad.strategies.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const SweepSpec d = SweepSpec::from_config(parse_config(""));
  CHECK(d.values.size() == 11);
  CHECK(d.strategies.size() == 4);
  CHECK(d.seeds == 5);
  CHECK(parse_format("jsonl") == Format::kJsonl);
  CHECK_THROWS_AS(parse_format("xml"), ConfigError);
}

TEST_CASE("sweep values") {
  const auto c = small_config();
  CHECK(apply_sweep_value(c, "p_max_dbm", 17).p_max_dbm == 17);
  const auto bw = apply_sweep_value(c, "bandwidth_mhz", 5);
  CHECK(bw.bandwidth_fed_mhz == 5);
  CHECK(bw.bandwidth_main_mhz == 5);
  CHECK(apply_sweep_value(c, "users", 7).users == 7);
  CHECK_THROWS_AS(apply_sweep_value(c, "users", 0), ConfigError);
}

TEST_CASE("empty report exports a header") {
  SweepReport r;
  r.spec = spec_of({0}, 1);
  CHECK(render(r, Format::kCsv) == std::string(kCsvHeader) + "\n");
  CHECK(render(r, Format::kJsonl).empty());
}

TEST_CASE("row count, ordering and byte-stable export") {
  const auto spec = spec_of({0, 5, 10, 15, 20}, 3);
  const auto report = run_sweep(spec, small_config());
  CHECK(report.errors.empty());
  REQUIRE(report.rows.size() == 60);
  CHECK(report.rows[0].strategy == opt::Strategy::kProposed);
  CHECK(report.rows[3].strategy == opt::Strategy::kBA);
  CHECK(report.rows[4].seed == spec.base_seed + 1);
  CHECK(report.rows[12].value == 5);
  for (const auto& r : report.rows) {
    CHECK(r.solve_ms == 0.0);
    CHECK(std::isfinite(r.T_seconds));
  }

  const auto dir = std::filesystem::temp_directory_path();
  for (Format f : {Format::kCsv, Format::kJsonl}) {
    export_report(report, dir / "fedsllm_a.out", f);
    export_report(report, dir / "fedsllm_b.out", f);
    CHECK(slurp(dir / "fedsllm_a.out") == slurp(dir / "fedsllm_b.out"));
  }
  const auto again = run_sweep(spec, small_config());
  CHECK(render(again, Format::kCsv) == render(report, Format::kCsv));

  const std::string csv = render(report, Format::kCsv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);
  const std::string jsonl = render(report, Format::kJsonl);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 60);

  CHECK_THROWS_AS(export_report(report, "/nonexistent/dir/x.csv", Format::kCsv), IoError);
}

TEST_CASE("improvement arithmetic") {
  SweepReport r;
  r.spec = spec_of({0, 10}, 2);
  r.rows = {row(0, opt::Strategy::kProposed, 10), row(0, opt::Strategy::kProposed, 30),
            row(0, opt::Strategy::kBA, 20), row(0, opt::Strategy::kBA, 20),
            row(10, opt::Strategy::kProposed, 5), row(10, opt::Strategy::kBA, 10)};
  const auto imp = improvement_vs(r, opt::Strategy::kBA);
  REQUIRE(imp.percent.size() == 2);
  CHECK(imp.percent[0] == doctest::Approx(0.0));
  CHECK(imp.percent[1] == doctest::Approx(50.0));
  CHECK(imp.mean_percent == doctest::Approx(25.0));
  CHECK(r.mean_T(0, opt::Strategy::kProposed) == 20);
  CHECK(std::isnan(r.mean_T(5, opt::Strategy::kBA)));
  CHECK_THROWS_AS(improvement_vs(r, opt::Strategy::kFE), DomainError);

  const std::string summary = render_summary(r);
  CHECK(summary.find("\"mean_percent\": 25.0") != std::string::npos);
}

TEST_CASE("single point and seed") {
  const auto report = run_sweep(spec_of({10}, 1), small_config());
  CHECK(report.rows.size() == 4);
  for (auto s : {opt::Strategy::kEB, opt::Strategy::kFE, opt::Strategy::kBA}) {
    CHECK(improvement_vs(report, s).mean_percent >= 0.0);
  }
}

TEST_CASE("curves fall with resources") {
  auto c = small_config();
  const auto power = run_power_sweep(spec_of({0, 10, 20}, 2), c);
  SweepSpec bs = spec_of({5, 10, 20}, 2);
  bs.var = "bandwidth_mhz";
  const auto band = run_sweep(bs, c);
  for (auto s : bs.strategies) {
    CHECK(power.mean_T(10, s) <= power.mean_T(0, s));
    CHECK(power.mean_T(20, s) <= power.mean_T(10, s));
    CHECK(band.mean_T(10, s) <= band.mean_T(5, s));
    CHECK(band.mean_T(20, s) <= band.mean_T(10, s));
  }
  CHECK_THROWS_AS(run_power_sweep(bs, c), ConfigError);
}
