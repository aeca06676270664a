#include "qclock/clock_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <thread>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

constexpr double kWeakCoupling = 0.1;
constexpr double kWeakBias = 0.1;
constexpr double kStabilityFactor = 0.1;

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

// Independent stream for trajectory `index` of a run seeded with `seed`.
std::mt19937_64 trajectory_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Exp(rate) from the top 53 bits of one draw; written out so the stream of
// variates is identical across standard libraries.
double exponential(std::mt19937_64& eng, double rate) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  return -std::log1p(-u) / rate;
}

double uniform(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

double one_tick(const LadderRates& lr, int d, double Gamma, std::mt19937_64& eng) {
  double t = 0.0;
  int level = 0;
  while (level < d - 1) {
    const double down = level > 0 ? lr.p_down : 0.0;
    const double total = lr.p_up + down;
    t += exponential(eng, total);
    if (uniform(eng) * total < lr.p_up)
      ++level;
    else
      --level;
  }
  return t + exponential(eng, Gamma);
}

// dp/dt of the ladder populations; returns the tick flux Gamma p_{d-1}.
double derivative(const std::vector<double>& p, std::vector<double>& dp, const LadderRates& lr,
                  double Gamma) {
  const std::size_t d = p.size();
  std::fill(dp.begin(), dp.end(), 0.0);
  for (std::size_t j = 0; j + 1 < d; ++j) {
    const double up = lr.p_up * p[j];
    dp[j] -= up;
    dp[j + 1] += up;
  }
  for (std::size_t j = 1; j < d; ++j) {
    const double down = lr.p_down * p[j];
    dp[j] -= down;
    dp[j - 1] += down;
  }
  const double flux = Gamma * p[d - 1];
  dp[d - 1] -= flux;
  dp[0] += flux;
  return flux;
}

}  // namespace

QubitSteadyState qubit_steady_state(const Rates& rates) {
  const double sum = rates.gamma_sum();
  if (!(sum > 0.0)) throw Error(Errc::ZeroRates, "gamma_up + gamma_down = 0");
  QubitSteadyState s;
  s.sigma_z = (rates.gamma_up - rates.gamma_down) / sum;
  s.p1 = 0.5 * (1.0 + s.sigma_z);
  s.p0 = 1.0 - s.p1;
  return s;
}

void LadderSpec::validate() const {
  if (d < 2) throw Error(Errc::InvalidArgument, "ladder needs d >= 2 levels");
  if (!(epsilon_w > 0.0) || !std::isfinite(epsilon_w))
    throw Error(Errc::InvalidArgument, "ladder spacing must be positive");
  if (!(g > 0.0) || !std::isfinite(g)) throw Error(Errc::InvalidArgument, "ladder coupling g must be positive");
  if (Gamma && (!(*Gamma > 0.0) || !std::isfinite(*Gamma)))
    throw Error(Errc::InvalidArgument, "Gamma must be positive");
}

LadderRates ladder_rates(double gamma_up, double gamma_down, const LadderSpec& ladder) {
  ladder.validate();
  if (gamma_up < 0.0 || gamma_down < 0.0) throw Error(Errc::InvalidArgument, "negative rate");
  const double sum = gamma_up + gamma_down;
  if (!(sum > 0.0)) throw Error(Errc::ZeroRates, "gamma_up + gamma_down = 0");
  const double scale = 2.0 * ladder.g * ladder.g / (sum * sum);
  LadderRates lr;
  lr.p_up = scale * gamma_up;
  lr.p_down = scale * gamma_down;
  lr.g_over_gamma_sum = ladder.g / sum;
  lr.g_over_Gamma = ladder.g / emission_rate(lr, ladder);
  lr.weak_coupling = lr.g_over_gamma_sum < kWeakCoupling && lr.g_over_Gamma < kWeakCoupling;
  return lr;
}

LadderRates ladder_rates(const Rates& rates, const LadderSpec& ladder) {
  return ladder_rates(rates.gamma_up, rates.gamma_down, ladder);
}

double emission_rate(const LadderRates& lr, const LadderSpec& ladder) {
  if (ladder.Gamma) return *ladder.Gamma;
  return 10.0 * (lr.p_up + lr.p_down) * ladder.d;
}

ClockMetrics clock_metrics(const LadderRates& lr, int d) {
  if (d < 2) throw Error(Errc::InvalidArgument, "ladder needs d >= 2 levels");
  const double sum = lr.p_up + lr.p_down;
  if (!(sum > 0.0)) throw Error(Errc::ZeroRates, "p_up + p_down = 0");
  const double diff = lr.p_up - lr.p_down;
  ClockMetrics m;
  m.nu_tick = diff / d;
  m.accuracy_N = d * diff / sum;
  m.zero_down_rate = lr.p_down == 0.0;
  if (m.zero_down_rate)
    m.entropy_per_tick = std::numeric_limits<double>::infinity();
  else if (lr.p_up == 0.0)
    m.entropy_per_tick = -std::numeric_limits<double>::infinity();
  else
    m.entropy_per_tick = d * std::log(lr.p_up / lr.p_down);
  m.tanh_identity = d * std::tanh(m.entropy_per_tick / (2.0 * d));
  // N / (dS/2) tends to 1 at zero bias, where both vanish.
  m.tur_ratio = m.entropy_per_tick == 0.0 ? 1.0 : m.accuracy_N / (0.5 * m.entropy_per_tick);
  m.weak_bias = std::abs(diff) / sum < kWeakBias;
  return m;
}

MasterTrajectory evolve_master(const LadderRates& lr, const LadderSpec& ladder, double t_max,
                               double dt, std::size_t record_every) {
  ladder.validate();
  const double Gamma = emission_rate(lr, ladder);
  const int d = ladder.d;
  const double fastest = std::max({lr.p_up * d, lr.p_down * d, Gamma});
  const double limit = kStabilityFactor / fastest;
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
    throw Error(Errc::UnstableStep, fmt::format("dt = {} exceeds {}", dt, limit));
  if (!(t_max > 0.0)) throw Error(Errc::InvalidArgument, "t_max must be positive");
  if (record_every == 0) record_every = 1;

  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt));
  const double h = t_max / static_cast<double>(steps);
  const std::size_t quarter_mark = steps - steps / 4;

  std::vector<double> p(static_cast<std::size_t>(d), 0.0);
  p[0] = 1.0;
  std::vector<double> k1(p.size()), k2(p.size()), k3(p.size()), k4(p.size()), tmp(p.size());
  double ticks = 0.0;
  double ticks_at_mark = 0.0;

  MasterTrajectory out;
  auto record = [&](double t, double flux) {
    out.times.push_back(t);
    out.populations.push_back(p);
    out.ticks.push_back(ticks);
    out.flux.push_back(flux);
  };
  record(0.0, Gamma * p[static_cast<std::size_t>(d - 1)]);

  for (std::size_t n = 1; n <= steps; ++n) {
    const double f1 = derivative(p, k1, lr, Gamma);
    for (std::size_t j = 0; j < p.size(); ++j) tmp[j] = p[j] + 0.5 * h * k1[j];
    const double f2 = derivative(tmp, k2, lr, Gamma);
    for (std::size_t j = 0; j < p.size(); ++j) tmp[j] = p[j] + 0.5 * h * k2[j];
    const double f3 = derivative(tmp, k3, lr, Gamma);
    for (std::size_t j = 0; j < p.size(); ++j) tmp[j] = p[j] + h * k3[j];
    const double f4 = derivative(tmp, k4, lr, Gamma);
    for (std::size_t j = 0; j < p.size(); ++j)
      p[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    ticks += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);

    double mass = 0.0;
    for (double v : p) mass += v;
    out.max_mass_error = std::max(out.max_mass_error, std::abs(mass - 1.0));
    if (n == quarter_mark) ticks_at_mark = ticks;
    if (n % record_every == 0 || n == steps)
      record(static_cast<double>(n) * h, Gamma * p[static_cast<std::size_t>(d - 1)]);
  }
  out.late_flux = (ticks - ticks_at_mark) / (h * static_cast<double>(steps - quarter_mark));
  return out;
}

double stationary_tick_flux(const LadderRates& lr, const LadderSpec& ladder) {
  ladder.validate();
  const double Gamma = emission_rate(lr, ladder);
  const int d = ladder.d;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j + 1 < d; ++j) {
    Q(j + 1, j) += lr.p_up;
    Q(j, j) -= lr.p_up;
  }
  for (int j = 1; j < d; ++j) {
    Q(j - 1, j) += lr.p_down;
    Q(j, j) -= lr.p_down;
  }
  Q(0, d - 1) += Gamma;
  Q(d - 1, d - 1) -= Gamma;
  // Replace one balance equation by normalization.
  Q.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  rhs(0) = 1.0;
  const Eigen::VectorXd pi = Q.fullPivLu().solve(rhs);
  return Gamma * pi(d - 1);
}

FirstPassage solve_first_passage(const LadderRates& lr, const LadderSpec& ladder) {
  ladder.validate();
  if (!(lr.p_up > 0.0)) throw Error(Errc::NotReachable, "p_up = 0: the top level is never reached");
  const double Gamma = emission_rate(lr, ladder);

  // a_j, b_j: first and second moments of the time to climb from level j to j+1.
  // With r the total exit rate and q the probability of stepping down first,
  //   T_j = X + B (T_{j-1} + T_j'),  X ~ Exp(r),  B ~ Bernoulli(q).
  double mean = 0.0;
  double var = 0.0;
  double a_prev = 0.0;
  double b_prev = 0.0;
  for (int j = 0; j + 1 < ladder.d; ++j) {
    const double down = j > 0 ? lr.p_down : 0.0;
    const double r = lr.p_up + down;
    const double q = down / r;
    const double stay = lr.p_up / r;
    const double a = (1.0 / r + q * a_prev) / stay;
    const double b = (2.0 / (r * r) + 2.0 * q * (a_prev + a) / r + q * (b_prev + 2.0 * a_prev * a)) / stay;
    mean += a;
    var += b - a * a;
    a_prev = a;
    b_prev = b;
  }
  mean += 1.0 / Gamma;
  var += 1.0 / (Gamma * Gamma);

  FirstPassage fp;
  fp.mean = mean;
  fp.variance = var;
  fp.second_moment = var + mean * mean;
  fp.exact_N = mean * mean / var;
  fp.exact_rate = 1.0 / mean;
  return fp;
}

std::vector<double> simulate_tick_times(const LadderRates& lr, const LadderSpec& ladder,
                                        std::size_t n_ticks, std::uint64_t seed, unsigned threads) {
  ladder.validate();
  if (!(lr.p_up > 0.0)) throw Error(Errc::NotReachable, "p_up = 0: the top level is never reached");
  if (n_ticks == 0) throw Error(Errc::InvalidArgument, "need at least one trajectory");
  const double Gamma = emission_rate(lr, ladder);
  std::vector<double> times(n_ticks);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 eng = trajectory_engine(seed, i);
      times[i] = one_tick(lr, ladder.d, Gamma, eng);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n_ticks);
  if (workers == 1) {
    work(0, n_ticks);
    return times;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n_ticks + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n_ticks, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
  for (std::thread& t : pool) t.join();
  return times;
}

TickStatistics tick_statistics(const std::vector<double>& tick_times, std::uint64_t seed) {
  if (tick_times.empty()) throw Error(Errc::InvalidArgument, "no tick times");
  const auto n = static_cast<double>(tick_times.size());
  TickStatistics s;
  s.n_trajectories = tick_times.size();
  s.seed = seed;
  s.mean_tick_time = pairwise_sum(tick_times) / n;
  std::vector<double> sq(tick_times.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double dev = tick_times[i] - s.mean_tick_time;
    sq[i] = dev * dev;
  }
  s.var_tick_time = tick_times.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  s.empirical_accuracy = s.var_tick_time > 0.0
                             ? s.mean_tick_time * s.mean_tick_time / s.var_tick_time
                             : std::numeric_limits<double>::infinity();
  s.empirical_rate = 1.0 / s.mean_tick_time;
  return s;
}

TickStatistics simulate_ticks(const LadderRates& lr, const LadderSpec& ladder, std::size_t n_ticks,
                              std::uint64_t seed, unsigned threads) {
  return tick_statistics(simulate_tick_times(lr, ladder, n_ticks, seed, threads), seed);
}

Histogram tick_histogram(const std::vector<double>& tick_times, std::size_t bins) {
  if (tick_times.empty() || bins == 0) throw Error(Errc::InvalidArgument, "empty histogram");
  const auto [lo, hi] = std::minmax_element(tick_times.begin(), tick_times.end());
  Histogram h;
  h.lo = *lo;
  h.hi = *hi;
  h.counts.assign(bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double t : tick_times) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((t - h.lo) / width) : 0;
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

}  // namespace qclock
