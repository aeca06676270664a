#pragma once

// Grid evaluation behind the CLI subcommands, and the CSV / JSON emitters.
//
// The grid is the Cartesian product of the configured scan axes with the first
// axis varying slowest; no axes means a single point. Rows are evaluated in a
// worker pool and emitted in grid order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qclock/clock_dynamics.hpp"
#include "qclock/run_config.hpp"

namespace qclock {

enum class Command { Rates, Clock, Lifetime, Oracle, Scan };

const char* command_name(Command c);

/// Version of the column layout, written into the header comment of every table.
inline constexpr int kSchemaVersion = 1;

/// One evaluated grid point. Fields a command does not compute stay NaN and are
/// not emitted; a non-finite emitted field always comes with a flag, except the
/// empirical clock columns of rows where no trajectories were sampled.
struct ScanRow {
  std::size_t index = 0;
  std::vector<double> params;

  double gamma_up, gamma_down, chi_second, active, condition_lhs, n_roots, sigma_z;
  double p_up, p_down, nu_tick, accuracy_N, entropy_per_tick, tanh_identity;
  double exact_N, exact_rate, mean_tick_time;
  double empirical_accuracy, empirical_rate, mc_trajectories;
  double E_av, E_ph, N_p, T_star, T_star_supplementary, lifetime_ratio;
  double oracle_L, oracle_eta, gamma_up_oracle, gamma_down_oracle, rel_err_up, rel_err_down;

  /// Empty, or the name of the single condition that explains the row's gaps.
  std::string flag;

  ScanRow();
};

struct ScanResult {
  Command command = Command::Rates;
  std::vector<std::string> param_names;
  std::vector<ScanRow> rows;
  /// Tick-time histograms, one per row, when mc.histogram_bins > 0 and MC ran.
  std::vector<std::pair<std::size_t, Histogram>> histograms;

  bool all_flagged() const;
};

/// Column names emitted for a command after the swept parameters; "flag" is last.
std::vector<std::string> result_columns(Command c);

/// Seed of grid row `row` in a run seeded with `seed`.
std::uint64_t row_seed(std::uint64_t seed, std::size_t row);

/// Worker count: `configured` if nonzero, else QCLOCK_THREADS, else 1.
unsigned resolve_threads(unsigned configured);

/// Throws ConfigError for an invalid configuration; numerical failures at a grid
/// point become row flags.
ScanResult run_command(Command c, const RunConfig& config);

void write_csv(std::ostream& os, const ScanResult& result, int precision);
void write_json(std::ostream& os, const ScanResult& result, int precision);
std::string render(const ScanResult& result, const OutputConfig& output);

}  // namespace qclock
