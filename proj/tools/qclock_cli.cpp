// qclock: rates, clock metrics, lifetimes, oracle checks and parameter scans for
// quenched free-fermion batteries driving a ladder clock.
//
//   qclock rates    --config run.json --set quench.final=2.5
//   qclock scan     --config run.json --out scan.csv --threads 4
//   qclock clock    --set clock.source=ratio --set mc.n_trajectories=100000 --seed 7
//
// Exit status: 0 success, 2 configuration error, 3 every row flagged, 1 anything else.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qclock/errors.hpp"
#include "qclock/run_config.hpp"
#include "qclock/scan.hpp"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool print_config = false;
};

qclock::RunConfig build_config(const Options& o) {
  qclock::RunConfig cfg = o.config_path.empty() ? qclock::parse_config("{}") : qclock::load_config(o.config_path);
  for (const std::string& s : o.sets) qclock::apply_override(cfg, s);
  if (o.out) cfg.output.path = *o.out;
  if (o.format) {
    if (*o.format == "csv")
      cfg.output.format = qclock::OutputFormat::Csv;
    else if (*o.format == "json")
      cfg.output.format = qclock::OutputFormat::Json;
    else
      throw qclock::Error(qclock::Errc::ConfigError, "--format: expected csv or json");
  }
  if (o.seed) cfg.mc.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qclock::Error(qclock::Errc::ConfigError, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quenched-chain battery and ladder clock calculator"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--set", opt.sets, "Override a config key, e.g. --set coupling.epsilon0=3")
      ->take_all()
      ->allow_extra_args(false);
  app.add_option("--out", opt.out, "Output file (default stdout)");
  app.add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", opt.seed, "Monte Carlo seed");
  app.add_option("--threads", opt.threads, "Worker threads (default $QCLOCK_THREADS or 1)");
  app.add_flag("--print-config", opt.print_config, "Print the effective configuration and exit");

  const std::vector<std::pair<qclock::Command, const char*>> commands{
      {qclock::Command::Rates, "Transition rates, bias verdict and printed condition"},
      {qclock::Command::Clock, "Ladder rates, clock metrics, exact and sampled tick statistics"},
      {qclock::Command::Lifetime, "Available energy and lifetime estimates"},
      {qclock::Command::Oracle, "Finite-size broadened sums against the closed-form rates"},
      {qclock::Command::Scan, "Rates, clock and lifetime columns together"}};
  std::optional<qclock::Command> chosen;
  for (const auto& [cmd, help] : commands) {
    const qclock::Command c = cmd;
    app.add_subcommand(qclock::command_name(c), help)->callback([&chosen, c] { chosen = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const qclock::RunConfig cfg = build_config(opt);
    if (opt.print_config) {
      std::cout << qclock::emit_config(cfg);
      return 0;
    }
    const qclock::ScanResult result = qclock::run_command(*chosen, cfg);
    write_output(qclock::render(result, cfg.output), cfg.output.path);
    return result.all_flagged() ? 3 : 0;
  } catch (const qclock::Error& e) {
    std::cerr << "qclock: " << e.what() << '\n';
    return e.code() == qclock::Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "qclock: internal error: " << e.what() << '\n';
    return 1;
  }
}
