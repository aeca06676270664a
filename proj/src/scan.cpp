#include "qclock/scan.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "qclock/battery_lifetime.hpp"
#include "qclock/errors.hpp"
#include "qclock/lehmann_oracle.hpp"
#include "qclock/rates.hpp"

namespace qclock {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Field {
  const char* name;
  double ScanRow::*member;
};

const std::vector<Field>& rate_fields() {
  static const std::vector<Field> f{{"gamma_up", &ScanRow::gamma_up},
                                    {"gamma_down", &ScanRow::gamma_down},
                                    {"chi_second", &ScanRow::chi_second},
                                    {"active", &ScanRow::active},
                                    {"condition_lhs", &ScanRow::condition_lhs},
                                    {"n_roots", &ScanRow::n_roots},
                                    {"sigma_z", &ScanRow::sigma_z}};
  return f;
}

const std::vector<Field>& clock_fields() {
  static const std::vector<Field> f{{"gamma_up", &ScanRow::gamma_up},
                                    {"gamma_down", &ScanRow::gamma_down},
                                    {"p_up", &ScanRow::p_up},
                                    {"p_down", &ScanRow::p_down},
                                    {"nu_tick", &ScanRow::nu_tick},
                                    {"accuracy_N", &ScanRow::accuracy_N},
                                    {"entropy_per_tick", &ScanRow::entropy_per_tick},
                                    {"tanh_identity", &ScanRow::tanh_identity},
                                    {"exact_N", &ScanRow::exact_N},
                                    {"exact_rate", &ScanRow::exact_rate},
                                    {"mean_tick_time", &ScanRow::mean_tick_time},
                                    {"empirical_accuracy", &ScanRow::empirical_accuracy},
                                    {"empirical_rate", &ScanRow::empirical_rate},
                                    {"mc_trajectories", &ScanRow::mc_trajectories}};
  return f;
}

const std::vector<Field>& lifetime_fields() {
  static const std::vector<Field> f{{"gamma_up", &ScanRow::gamma_up},
                                    {"gamma_down", &ScanRow::gamma_down},
                                    {"chi_second", &ScanRow::chi_second},
                                    {"E_av", &ScanRow::E_av},
                                    {"E_ph", &ScanRow::E_ph},
                                    {"N_p", &ScanRow::N_p},
                                    {"T_star", &ScanRow::T_star},
                                    {"mean_tick_time", &ScanRow::mean_tick_time},
                                    {"T_star_supplementary", &ScanRow::T_star_supplementary},
                                    {"lifetime_ratio", &ScanRow::lifetime_ratio}};
  return f;
}

const std::vector<Field>& oracle_fields() {
  static const std::vector<Field> f{{"L", &ScanRow::oracle_L},
                                    {"eta", &ScanRow::oracle_eta},
                                    {"gamma_up_oracle", &ScanRow::gamma_up_oracle},
                                    {"gamma_down_oracle", &ScanRow::gamma_down_oracle},
                                    {"gamma_up", &ScanRow::gamma_up},
                                    {"gamma_down", &ScanRow::gamma_down},
                                    {"rel_err_up", &ScanRow::rel_err_up},
                                    {"rel_err_down", &ScanRow::rel_err_down}};
  return f;
}

const std::vector<Field>& scan_fields() {
  static const std::vector<Field> f{{"gamma_up", &ScanRow::gamma_up},
                                    {"gamma_down", &ScanRow::gamma_down},
                                    {"active", &ScanRow::active},
                                    {"condition_lhs", &ScanRow::condition_lhs},
                                    {"chi_second", &ScanRow::chi_second},
                                    {"nu_tick", &ScanRow::nu_tick},
                                    {"accuracy_N", &ScanRow::accuracy_N},
                                    {"entropy_per_tick", &ScanRow::entropy_per_tick},
                                    {"exact_N", &ScanRow::exact_N},
                                    {"T_star", &ScanRow::T_star}};
  return f;
}

const std::vector<Field>& fields(Command c) {
  switch (c) {
    case Command::Rates: return rate_fields();
    case Command::Clock: return clock_fields();
    case Command::Lifetime: return lifetime_fields();
    case Command::Oracle: return oracle_fields();
    case Command::Scan: return scan_fields();
  }
  return scan_fields();
}

// Grid-point evaluation. Each stage fills its fields or records the first failure.
class PointEvaluator {
 public:
  PointEvaluator(const RunConfig& cfg, Command cmd, std::uint64_t seed, unsigned mc_threads)
      : cfg_(cfg), cmd_(cmd), seed_(seed), mc_threads_(mc_threads) {}

  std::vector<ScanRow> run(ScanRow base) {
    if (cmd_ == Command::Oracle) return oracle(base);
    ScanRow& r = base;
    const bool need_rates = cmd_ != Command::Clock || cfg_.clock.source == ClockSource::Quench;
    if (need_rates && !guard(r, [&] { rates(r); })) return {r};
    if (cmd_ == Command::Clock && cfg_.clock.source == ClockSource::Ratio) ratio_rates(r);
    if (cmd_ == Command::Clock || cmd_ == Command::Scan) {
      if (!guard(r, [&] { clock(r); })) return {r};
    }
    if (cmd_ == Command::Lifetime || cmd_ == Command::Scan) guard(r, [&] { life(r); });
    return {r};
  }

 private:
  template <class F>
  bool guard(ScanRow& r, F&& f) {
    try {
      f();
      return r.flag.empty();
    } catch (const Error& e) {
      if (r.flag.empty()) r.flag = std::string(to_string(e.code()));
      return false;
    }
  }

  void rates(ScanRow& r) {
    const QuenchSpec q = cfg_.quench_spec();
    const Rates rt = transition_rates(q, cfg_.coupling);
    r.gamma_up = rt.gamma_up;
    r.gamma_down = rt.gamma_down;
    r.chi_second = rt.gamma_down - rt.gamma_up;
    r.n_roots = static_cast<double>(rt.roots.size());
    if (rt.gamma_sum() > 0.0) r.sigma_z = qubit_steady_state(rt).sigma_z;
    if (rt.no_resonance()) {
      r.active = 0.0;
      r.flag = to_string(Errc::NoResonance);
      return;
    }
    const BiasCondition bc = bias_condition(q, cfg_.coupling.epsilon0);
    r.active = bc.active ? 1.0 : 0.0;
    r.condition_lhs = bc.roots.front().lhs;
    if (rt.gamma_sum() == 0.0) {
      r.flag = to_string(Errc::ZeroRates);
    } else if (!bc.roots.front().defined) {
      r.flag = to_string(Errc::ConditionUndefined);
    }
  }

  void ratio_rates(ScanRow& r) {
    const double ratio = cfg_.clock.bias_ratio;
    r.gamma_down = cfg_.clock.gamma_sum / (1.0 + ratio);
    r.gamma_up = cfg_.clock.gamma_sum - r.gamma_down;
  }

  void clock(ScanRow& r) {
    const LadderSpec ladder = cfg_.ladder_spec();
    const LadderRates lr = ladder_rates(r.gamma_up, r.gamma_down, ladder);
    r.p_up = lr.p_up;
    r.p_down = lr.p_down;
    const ClockMetrics m = clock_metrics(lr, ladder.d);
    r.nu_tick = m.nu_tick;
    r.accuracy_N = m.accuracy_N;
    r.entropy_per_tick = m.entropy_per_tick;
    r.tanh_identity = m.tanh_identity;
    if (m.zero_down_rate) r.flag = to_string(Errc::ZeroDownRate);
    const FirstPassage fp = solve_first_passage(lr, ladder);
    r.exact_N = fp.exact_N;
    r.exact_rate = fp.exact_rate;
    r.mean_tick_time = fp.mean;
    if (cmd_ != Command::Clock) return;
    r.mc_trajectories = static_cast<double>(cfg_.mc.n_trajectories);
    if (cfg_.mc.n_trajectories == 0) return;
    if (!(lr.p_up > lr.p_down)) {
      if (r.flag.empty()) r.flag = to_string(Errc::PassiveState);
      return;
    }
    std::vector<double> times = simulate_tick_times(lr, ladder, cfg_.mc.n_trajectories, seed_, mc_threads_);
    const TickStatistics s = tick_statistics(times, seed_);
    r.empirical_accuracy = s.empirical_accuracy;
    r.empirical_rate = s.empirical_rate;
    if (cfg_.mc.histogram_bins > 0)
      histogram.push_back(tick_histogram(times, static_cast<std::size_t>(cfg_.mc.histogram_bins)));
  }

  void life(ScanRow& r) {
    const LifetimeReport rep = lifetime(cfg_.quench_spec(), cfg_.coupling, cfg_.ladder_spec());
    r.E_av = rep.E_av;
    r.E_ph = rep.E_ph;
    r.N_p = rep.N_p;
    r.T_star = rep.T_star;
    r.mean_tick_time = rep.mean_tick_time;
    r.T_star_supplementary = rep.T_star_supplementary;
    r.lifetime_ratio = rep.ratio;
  }

  std::vector<ScanRow> oracle(const ScanRow& base) {
    std::vector<std::pair<int, double>> steps = cfg_.oracle.ladder;
    if (steps.empty()) steps.emplace_back(cfg_.oracle.L, cfg_.oracle.eta);
    std::vector<ScanRow> out;
    for (const auto& [L, eta] : steps) {
      ScanRow r = base;
      r.oracle_L = L;
      r.oracle_eta = eta;
      guard(r, [&] {
        const OracleReport rep = discrete_rates(cfg_.quench_spec(), cfg_.coupling, L, eta, cfg_.oracle.kernel);
        r.gamma_up_oracle = rep.gamma_up_oracle;
        r.gamma_down_oracle = rep.gamma_down_oracle;
        r.gamma_up = rep.gamma_up_closed;
        r.gamma_down = rep.gamma_down_closed;
        r.rel_err_up = rep.rel_err_up;
        r.rel_err_down = rep.rel_err_down;
      });
      out.push_back(r);
    }
    return out;
  }

  const RunConfig& cfg_;
  Command cmd_;
  std::uint64_t seed_;
  unsigned mc_threads_;

 public:
  /// Empty, or the tick-time histogram of this point.
  std::vector<Histogram> histogram;
};

std::string format_number(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.{}g}", v, precision);
}

}  // namespace

ScanRow::ScanRow()
    : gamma_up(kNaN), gamma_down(kNaN), chi_second(kNaN), active(kNaN), condition_lhs(kNaN),
      n_roots(kNaN), sigma_z(kNaN), p_up(kNaN), p_down(kNaN), nu_tick(kNaN), accuracy_N(kNaN),
      entropy_per_tick(kNaN), tanh_identity(kNaN), exact_N(kNaN), exact_rate(kNaN),
      mean_tick_time(kNaN), empirical_accuracy(kNaN), empirical_rate(kNaN), mc_trajectories(kNaN),
      E_av(kNaN), E_ph(kNaN), N_p(kNaN), T_star(kNaN), T_star_supplementary(kNaN),
      lifetime_ratio(kNaN), oracle_L(kNaN), oracle_eta(kNaN), gamma_up_oracle(kNaN),
      gamma_down_oracle(kNaN), rel_err_up(kNaN), rel_err_down(kNaN) {}

const char* command_name(Command c) {
  switch (c) {
    case Command::Rates: return "rates";
    case Command::Clock: return "clock";
    case Command::Lifetime: return "lifetime";
    case Command::Oracle: return "oracle";
    case Command::Scan: return "scan";
  }
  return "scan";
}

bool ScanResult::all_flagged() const {
  if (rows.empty()) return false;
  for (const ScanRow& r : rows)
    if (r.flag.empty()) return false;
  return true;
}

std::vector<std::string> result_columns(Command c) {
  std::vector<std::string> cols;
  for (const Field& f : fields(c)) cols.emplace_back(f.name);
  cols.emplace_back("flag");
  return cols;
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), 0x726f77u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

unsigned resolve_threads(unsigned configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("QCLOCK_THREADS")) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && n > 0 && n < 4096) return static_cast<unsigned>(n);
  }
  return 1;
}

ScanResult run_command(Command cmd, const RunConfig& config) {
  config.validate();
  ScanResult result;
  result.command = cmd;
  std::size_t total = 1;
  for (const ScanAxis& a : config.scan) {
    result.param_names.push_back(a.param);
    total *= static_cast<std::size_t>(a.steps);
  }
  const unsigned threads = resolve_threads(config.threads);

  // Validate every grid point's configuration up front so config errors are not
  // turned into row flags.
  auto point_config = [&](std::size_t index, std::vector<double>& params) {
    RunConfig c = config;
    std::size_t rem = index;
    params.assign(config.scan.size(), 0.0);
    for (std::size_t ax = config.scan.size(); ax-- > 0;) {
      const ScanAxis& a = config.scan[ax];
      const auto i = static_cast<int>(rem % static_cast<std::size_t>(a.steps));
      rem /= static_cast<std::size_t>(a.steps);
      params[ax] = a.value(i);
      set_parameter(c, a.param, params[ax]);
    }
    c.validate();
    return c;
  };
  std::vector<RunConfig> configs;
  std::vector<std::vector<double>> params(total);
  configs.reserve(total);
  for (std::size_t i = 0; i < total; ++i) configs.push_back(point_config(i, params[i]));

  std::vector<std::vector<ScanRow>> rows(total);
  std::vector<std::vector<Histogram>> hists(total);
  const unsigned mc_threads = total == 1 ? threads : 1;
  auto evaluate = [&](std::size_t i) {
    ScanRow base;
    base.index = i;
    base.params = params[i];
    PointEvaluator ev(configs[i], cmd, row_seed(configs[i].mc.seed, i), mc_threads);
    rows[i] = ev.run(std::move(base));
    hists[i] = std::move(ev.histogram);
  };

  const std::size_t workers = std::min<std::size_t>(threads, total);
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) {
          try {
            evaluate(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (std::size_t i = 0; i < total; ++i) {
    for (ScanRow& r : rows[i]) {
      if (r.flag.empty()) {
        for (const Field& f : fields(cmd)) {
          if (r.mc_trajectories == 0.0 &&
              (f.member == &ScanRow::empirical_accuracy || f.member == &ScanRow::empirical_rate))
            continue;
          if (!std::isfinite(r.*f.member)) {
            r.flag = "NonFinite";
            break;
          }
        }
      }
      result.rows.push_back(std::move(r));
    }
    for (Histogram& h : hists[i]) result.histograms.emplace_back(i, std::move(h));
  }
  return result;
}

void write_csv(std::ostream& os, const ScanResult& result, int precision) {
  const std::vector<Field>& fs = fields(result.command);
  std::vector<std::string> header = result.param_names;
  for (const std::string& c : result_columns(result.command)) header.push_back(c);
  os << fmt::format("# qclock {} schema {}\n", command_name(result.command), kSchemaVersion);
  os << fmt::format("{}\n", fmt::join(header, ","));
  for (const ScanRow& r : result.rows) {
    std::string line;
    for (double p : r.params) line += format_number(p, precision) + ",";
    for (const Field& f : fs) line += format_number(r.*f.member, precision) + ",";
    line += r.flag;
    os << line << '\n';
  }
  for (const auto& [row, h] : result.histograms) {
    os << fmt::format("# histogram row {} schema {}\n", row, kSchemaVersion);
    os << "bin_lo,bin_hi,count\n";
    const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      os << format_number(h.lo + width * b, precision) << ','
         << format_number(h.lo + width * (b + 1), precision) << ',' << h.counts[b] << '\n';
  }
}

void write_json(std::ostream& os, const ScanResult& result, int precision) {
  using nlohmann::ordered_json;
  auto number = [&](double v) -> ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(fmt::format("{:.{}g}", v, precision));
  };
  ordered_json doc;
  doc["command"] = command_name(result.command);
  doc["schema"] = kSchemaVersion;
  std::vector<std::string> cols = result.param_names;
  for (const std::string& c : result_columns(result.command)) cols.push_back(c);
  doc["columns"] = cols;
  doc["rows"] = ordered_json::array();
  for (const ScanRow& r : result.rows) {
    ordered_json row;
    for (std::size_t i = 0; i < r.params.size(); ++i) row[result.param_names[i]] = number(r.params[i]);
    for (const Field& f : fields(result.command)) row[f.name] = number(r.*f.member);
    row["flag"] = r.flag.empty() ? ordered_json(nullptr) : ordered_json(r.flag);
    doc["rows"].push_back(row);
  }
  if (!result.histograms.empty()) {
    doc["histograms"] = ordered_json::array();
    for (const auto& [row, h] : result.histograms)
      doc["histograms"].push_back({{"row", row}, {"lo", number(h.lo)}, {"hi", number(h.hi)}, {"counts", h.counts}});
  }
  os << doc.dump(2) << '\n';
}

std::string render(const ScanResult& result, const OutputConfig& output) {
  std::ostringstream os;
  if (output.format == OutputFormat::Csv)
    write_csv(os, result, output.precision);
  else
    write_json(os, result, output.precision);
  return os.str();
}

}  // namespace qclock
