#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "qclock/errors.hpp"
#include "qclock/scan.hpp"

using namespace qclock;

namespace {

std::string csv(const ScanResult& r, int precision = 10) {
  std::ostringstream os;
  write_csv(os, r, precision);
  return os.str();
}

std::string json_text(const ScanResult& r, int precision = 10) {
  std::ostringstream os;
  write_json(os, r, precision);
  return os.str();
}

RunConfig ising_grid() {
  RunConfig c;
  c.coupling.epsilon0 = 4.0;
  c.scan = {{"quench.initial", 0.2, 0.8, 3}, {"quench.final", 0.1, 3.0, 30}};
  return c;
}

}  // namespace

TEST_CASE("a configuration without axes is a single point") {
  const ScanResult r = run_command(Command::Rates, RunConfig{});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.param_names.empty());
  CHECK(r.rows[0].flag.empty());
  CHECK(r.rows[0].gamma_up > r.rows[0].gamma_down);
  CHECK(r.rows[0].active == 1.0);
  CHECK(r.rows[0].chi_second == doctest::Approx(r.rows[0].gamma_down - r.rows[0].gamma_up));
}

TEST_CASE("grid order puts the first axis slowest") {
  RunConfig c;
  c.scan = {{"quench.initial", 0.1, 0.3, 3}, {"quench.final", 1.5, 2.5, 2}};
  const ScanResult r = run_command(Command::Rates, c);
  REQUIRE(r.rows.size() == 6);
  CHECK(r.param_names == std::vector<std::string>{"quench.initial", "quench.final"});
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(r.rows[i].index == i);
    CHECK(r.rows[i].params[0] == doctest::Approx(0.1 + 0.1 * static_cast<double>(i / 2)));
    CHECK(r.rows[i].params[1] == (i % 2 ? 2.5 : 1.5));
  }
}

TEST_CASE("invalid grid points are rejected before evaluation") {
  RunConfig c;
  c.scan = {{"ladder.d", 3, 0, 4}};
  CHECK_THROWS_AS(run_command(Command::Clock, c), Error);
}

TEST_CASE("numerical failures become flags") {
  RunConfig c;
  c.scan = {{"coupling.epsilon0", 1.0, 12.0, 3}};
  const ScanResult r = run_command(Command::Rates, c);
  CHECK(r.rows[0].flag == "NoResonance");
  CHECK(r.rows[1].flag.empty());
  CHECK(r.rows[2].flag == "NoResonance");
  CHECK_FALSE(r.all_flagged());

  RunConfig off;
  off.coupling.epsilon0 = 20.0;
  CHECK(run_command(Command::Rates, off).all_flagged());
  CHECK(run_command(Command::Lifetime, off).rows[0].flag == "NoResonance");

  RunConfig passive;
  passive.quench = {0.5, 0.2};
  passive.coupling.epsilon0 = 4.0;
  CHECK(run_command(Command::Lifetime, passive).rows[0].flag == "PassiveState");

  for (Command cmd : {Command::Rates, Command::Clock, Command::Lifetime, Command::Scan}) {
    const ScanResult all = run_command(cmd, ising_grid());
    const std::vector<std::string> cols = result_columns(cmd);
    const nlohmann::json doc = nlohmann::json::parse(json_text(all));
    for (const auto& row : doc.at("rows")) {
      bool gap = false;
      const bool sampled = !row.contains("mc_trajectories") || row.at("mc_trajectories") != 0.0;
      for (const std::string& col : cols) {
        if (!sampled && col.rfind("empirical_", 0) == 0) continue;
        if (col != "flag" && row.at(col).is_null()) gap = true;
      }
      if (gap) CHECK_FALSE(row.at("flag").get<std::string>().empty());
    }
  }
}

TEST_CASE("CSV layout") {
  RunConfig c;
  c.scan = {{"coupling.epsilon0", 1.0, 12.0, 3}};
  const std::string out = csv(run_command(Command::Rates, c));
  std::istringstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# qclock rates schema 1");
  std::getline(in, line);
  CHECK(line == "coupling.epsilon0,gamma_up,gamma_down,chi_second,active,condition_lhs,n_roots,sigma_z,flag");
  std::getline(in, line);
  CHECK(line == "1,0,0,0,0,nan,0,nan,NoResonance");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  for (Command cmd : {Command::Rates, Command::Clock, Command::Lifetime, Command::Oracle, Command::Scan})
    CHECK(result_columns(cmd).back() == "flag");
}

TEST_CASE("JSON layout") {
  RunConfig off;
  off.coupling.epsilon0 = 20.0;
  const nlohmann::json doc = nlohmann::json::parse(json_text(run_command(Command::Rates, off)));
  CHECK(doc.at("command") == "rates");
  CHECK(doc.at("schema") == kSchemaVersion);
  CHECK(doc.at("columns").back() == "flag");
  CHECK(doc.at("rows")[0].at("condition_lhs").is_null());
  CHECK(doc.at("rows")[0].at("flag") == "NoResonance");
}

TEST_CASE("output is independent of the worker count") {
  RunConfig c = ising_grid();
  c.mc.n_trajectories = 300;
  c.mc.histogram_bins = 4;
  c.ladder.d = 6;
  c.clock.source = ClockSource::Ratio;
  c.scan = {{"clock.bias_ratio", 1.5, 4.0, 6}};
  c.threads = 1;
  const ScanResult one = run_command(Command::Clock, c);
  c.threads = 4;
  const ScanResult four = run_command(Command::Clock, c);
  CHECK(csv(one) == csv(four));
  CHECK(json_text(one) == json_text(four));
  CHECK(one.histograms.size() == 6);
  CHECK(csv(one).find("# histogram row 5 schema 1\nbin_lo,bin_hi,count\n") != std::string::npos);

  RunConfig single = c;
  single.scan.clear();
  single.threads = 1;
  const std::string a = csv(run_command(Command::Clock, single));
  single.threads = 3;
  CHECK(csv(run_command(Command::Clock, single)) == a);
}

TEST_CASE("row seeds are distinct and reproducible") {
  CHECK(row_seed(1, 0) == row_seed(1, 0));
  CHECK(row_seed(1, 0) != row_seed(1, 1));
  CHECK(row_seed(1, 0) != row_seed(2, 0));
}

TEST_CASE("worker count resolution") {
  CHECK(resolve_threads(3) == 3u);
  ::setenv("QCLOCK_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5u);
  CHECK(resolve_threads(2) == 2u);
  ::unsetenv("QCLOCK_THREADS");
  CHECK(resolve_threads(0) == 1u);
}

TEST_CASE("Ising bias map: only ferromagnetic-to-paramagnetic quenches charge") {
  const ScanResult r = run_command(Command::Scan, ising_grid());
  int active = 0;
  for (const ScanRow& row : r.rows) {
    if (!row.flag.empty()) continue;
    CHECK((row.active == 1.0) == (row.gamma_up > row.gamma_down));
    CHECK((row.active == 1.0) == (row.condition_lhs < 0.0));
    if (row.active == 1.0) {
      CHECK(row.params[1] > 1.0);
      CHECK(row.nu_tick > 0.0);
      ++active;
    } else {
      CHECK(row.nu_tick <= 0.0);
    }
  }
  CHECK(active > 0);
}

TEST_CASE("XX bias map: only sign-changing quenches charge") {
  RunConfig c;
  c.model.kind = ModelKind::XXRing;
  c.coupling.epsilon0 = 3.0;
  c.scan = {{"quench.initial", -2.0, 2.0, 9}, {"quench.final", -2.0, 2.0, 9}};
  const ScanResult r = run_command(Command::Rates, c);
  int active = 0;
  for (const ScanRow& row : r.rows) {
    if (!row.flag.empty() || row.active != 1.0) continue;
    CHECK(row.params[0] * row.params[1] < 0.0);
    ++active;
  }
  CHECK(active > 0);
}

TEST_CASE("clock sweep over the ladder depth") {
  RunConfig c;
  c.clock.source = ClockSource::Ratio;
  c.clock.bias_ratio = 3.0;
  c.scan = {{"ladder.d", 5, 40, 8}};
  const ScanResult r = run_command(Command::Clock, c);
  for (const ScanRow& row : r.rows) {
    const double d = row.params[0];
    CHECK(row.flag.empty());
    CHECK(std::isnan(row.empirical_rate));
    CHECK(row.nu_tick * d == doctest::Approx(r.rows[0].nu_tick * 5).epsilon(1e-12));
    CHECK(row.accuracy_N == doctest::Approx(d / 2).epsilon(1e-12));
    CHECK(row.tanh_identity == doctest::Approx(row.accuracy_N).epsilon(1e-12));
    CHECK(row.exact_rate * row.mean_tick_time == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("oracle command reports relative errors") {
  RunConfig c;
  c.oracle.L = 2048;
  c.oracle.eta = 2e-2;
  c.oracle.ladder.clear();
  const ScanResult r = run_command(Command::Oracle, c);
  const ScanRow& row = r.rows[0];
  CHECK(row.flag.empty());
  CHECK(row.oracle_L == 2048);
  CHECK(row.rel_err_up == doctest::Approx(std::abs(row.gamma_up_oracle / row.gamma_up - 1)).epsilon(1e-12));
  CHECK(row.rel_err_up < 0.1);
  CHECK(row.rel_err_down < 0.1);

  RunConfig ladder;
  ladder.oracle.ladder = {{512, 1e-2}, {1024, 5e-3}};
  const ScanResult steps = run_command(Command::Oracle, ladder);
  REQUIRE(steps.rows.size() == 2);
  CHECK(steps.rows[1].oracle_L == 1024);
  CHECK(steps.rows[1].oracle_eta == 5e-3);
}
