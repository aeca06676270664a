#pragma once

// Qubit steady state, the d-level ladder as a biased random walk, closed-form clock
// figures of merit, and two exact descriptions of the same renewal chain (master
// equation and first-passage moments) plus its Gillespie realization.
//
// Ladder chain: levels 0..d-1, j -> j+1 at p_up (j < d-1), j -> j-1 at p_down (j > 0),
// d-1 -> 0 at Gamma. The last transition is the emitted photon, i.e. one tick.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qclock/rates.hpp"

namespace qclock {

struct QubitSteadyState {
  double sigma_z = 0.0;  ///< (g_up - g_down) / (g_up + g_down)
  double p1 = 0.0;       ///< upper level
  double p0 = 0.0;
  bool inverted() const { return p1 > p0; }
};

/// Throws ZeroRates if gamma_up + gamma_down == 0.
QubitSteadyState qubit_steady_state(const Rates& rates);

struct LadderSpec {
  int d = 2;
  double epsilon_w = 1.0;  ///< must equal the qubit gap
  double g = 0.01;
  /// Top-level emission rate. Unset means 10 (p_up + p_down) d.
  std::optional<double> Gamma;

  void validate() const;
  bool operator==(const LadderSpec&) const = default;
};

struct LadderRates {
  double p_up = 0.0;
  double p_down = 0.0;
  double g_over_gamma_sum = 0.0;  ///< weak-coupling diagnostics
  double g_over_Gamma = 0.0;
  /// g/gamma_sum < 0.1 and g/Gamma < 0.1
  bool weak_coupling = false;
};

/// p_up = 2 g^2 g_up / (g_up + g_down)^2, p_down likewise.
LadderRates ladder_rates(const Rates& rates, const LadderSpec& ladder);
LadderRates ladder_rates(double gamma_up, double gamma_down, const LadderSpec& ladder);

/// Gamma if set, otherwise the default 10 (p_up + p_down) d.
double emission_rate(const LadderRates& lr, const LadderSpec& ladder);

struct ClockMetrics {
  double nu_tick = 0.0;           ///< (p_up - p_down) / d
  double accuracy_N = 0.0;        ///< d (p_up - p_down) / (p_up + p_down)
  double entropy_per_tick = 0.0;  ///< d ln(p_up / p_down); +inf when p_down == 0
  double tanh_identity = 0.0;     ///< d tanh(entropy / 2d), equal to accuracy_N
  double tur_ratio = 0.0;         ///< accuracy_N / (entropy_per_tick / 2)
  bool weak_bias = false;         ///< |p_up - p_down| / (p_up + p_down) < 0.1
  bool zero_down_rate = false;
};

/// accuracy_N is signed: negative for a reversed bias, |N| <= d. Throws ZeroRates
/// when both rates vanish; p_down == 0 sets zero_down_rate and an infinite entropy.
ClockMetrics clock_metrics(const LadderRates& lr, int d);

struct MasterTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> populations;
  std::vector<double> ticks;  ///< expected number of ticks emitted up to each time
  std::vector<double> flux;   ///< Gamma * p_{d-1}
  double max_mass_error = 0.0;
  /// Tick count increment over the last quarter of the run divided by its length.
  double late_flux = 0.0;
};

/// RK4 integration of the population master equation from level 0. Throws
/// UnstableStep unless dt <= 0.1 / max(p_up d, p_down d, Gamma).
MasterTrajectory evolve_master(const LadderRates& lr, const LadderSpec& ladder, double t_max,
                               double dt, std::size_t record_every = 1000);

/// Tick flux of the stationary distribution of the chain, from a direct linear solve.
double stationary_tick_flux(const LadderRates& lr, const LadderSpec& ladder);

struct FirstPassage {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  double exact_N = 0.0;     ///< mean^2 / variance
  double exact_rate = 0.0;  ///< 1 / mean
};

/// Exact first two moments of the tick interval (0 -> emission). Throws NotReachable if p_up <= 0.
FirstPassage solve_first_passage(const LadderRates& lr, const LadderSpec& ladder);

struct TickStatistics {
  std::size_t n_trajectories = 0;
  double mean_tick_time = 0.0;
  double var_tick_time = 0.0;
  double empirical_accuracy = 0.0;  ///< mean^2 / var
  double empirical_rate = 0.0;      ///< 1 / mean
  std::uint64_t seed = 0;
};

/// One tick interval per trajectory; trajectory i draws from its own stream keyed
/// by (seed, i), so the result does not depend on `threads`.
std::vector<double> simulate_tick_times(const LadderRates& lr, const LadderSpec& ladder,
                                        std::size_t n_ticks, std::uint64_t seed,
                                        unsigned threads = 1);

TickStatistics tick_statistics(const std::vector<double>& tick_times, std::uint64_t seed);

TickStatistics simulate_ticks(const LadderRates& lr, const LadderSpec& ladder, std::size_t n_ticks,
                              std::uint64_t seed, unsigned threads = 1);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
};

/// Equal-width bins spanning [min, max] of the samples.
Histogram tick_histogram(const std::vector<double>& tick_times, std::size_t bins);

}  // namespace qclock
