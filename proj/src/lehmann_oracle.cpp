#include "qclock/lehmann_oracle.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

constexpr double kPi = std::numbers::pi;

struct GridMode {
  double k;
  double quadrature;  // 1, or 1/2 on the domain boundary
  double weight;      // W_k
  double eps_f;
  double n_k;
};

// Momenta k = +-(2n+1) pi / L inside |k| <= pi/2, in a fixed order so every sum
// below is bit-reproducible.
std::vector<GridMode> grid_modes(const QuenchSpec& quench, int L) {
  std::vector<GridMode> modes;
  modes.reserve(static_cast<std::size_t>(L / 2) + 2);
  const ModelSpec& fin = quench.final;
  for (int n = 0; n < L / 2; ++n) {
    const int odd = 2 * n + 1;
    // 2 odd <= L  <=>  k <= pi/2, compared in integers
    if (2 * odd > L) break;
    const double kpos = odd * kPi / L;
    const double quad = (2 * odd == L) ? 0.5 : 1.0;
    for (double k : {kpos, -kpos}) {
      const double eps_i = dispersion(quench.initial, k);
      const double eps_f = dispersion(fin, k);
      if (eps_i < kGaplessTolerance || eps_f < kGaplessTolerance) continue;
      const double s2 = std::sin(2.0 * bogoliubov_angle(fin, k));
      double w = s2 * s2;
      if (fin.kind == ModelKind::XXRing) {
        const double sk = std::sin(k);
        w *= fin.t * fin.t * sk * sk;
      }
      const double dth = bogoliubov_angle(fin, k) - bogoliubov_angle(quench.initial, k);
      const double sn = std::sin(dth);
      modes.push_back({k, quad, w, eps_f, sn * sn});
    }
  }
  return modes;
}

void check_lattice(int L) {
  if (L < 64 || L % 2 != 0) throw Error(Errc::InvalidArgument, "oracle lattice must be even and >= 64");
}

void check_broadening(const QuenchSpec& quench, double eta) {
  const BandRange band = band_range(quench.final);
  const double limit = 2.0 * (band.max - band.min) / 10.0;
  if (!(eta > 0.0) || !(eta < limit))
    throw Error(Errc::BadBroadening,
                fmt::format("eta = {} outside (0, {}) for this band", eta, limit));
}

double sum_prefactor(const QubitCoupling& coupling, int L) {
  return 2.0 * coupling.g_obs * coupling.g_obs / (kPi * coupling.L) * (2.0 * kPi / L);
}

double relative_error(double oracle, double closed, double scale) {
  if (closed != 0.0) return std::abs(oracle - closed) / std::abs(closed);
  return scale > 0.0 ? std::abs(oracle) / scale : std::abs(oracle);
}

}  // namespace

BroadeningKernel::BroadeningKernel(KernelShape shape, double eta) : shape_(shape), eta_(eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(Errc::BadBroadening, "eta must be positive");
}

double BroadeningKernel::operator()(double x) const {
  if (shape_ == KernelShape::Lorentzian) return eta_ / kPi / (x * x + eta_ * eta_);
  const double z = x / eta_;
  return std::exp(-0.5 * z * z) / (eta_ * std::sqrt(2.0 * kPi));
}

double BroadeningKernel::cdf(double x) const {
  if (shape_ == KernelShape::Lorentzian) return 0.5 + std::atan(x / eta_) / kPi;
  return 0.5 * std::erfc(-x / (eta_ * std::numbers::sqrt2));
}

OracleReport discrete_rates(const QuenchSpec& quench, const QubitCoupling& coupling, int L,
                            double eta, KernelShape shape) {
  quench.validate();
  coupling.validate();
  check_lattice(L);
  check_broadening(quench, eta);
  const BroadeningKernel kernel(shape, eta);
  const double e0 = coupling.epsilon0;

  double up = 0.0;
  double down = 0.0;
  for (const GridMode& m : grid_modes(quench, L)) {
    const double resonant = kernel(2.0 * m.eps_f - e0);
    const double mirror = kernel(2.0 * m.eps_f + e0);
    const double w = m.quadrature * m.weight;
    up += w * (m.n_k * resonant + (1.0 - m.n_k) * mirror);
    down += w * ((1.0 - m.n_k) * resonant + m.n_k * mirror);
  }
  const double pref = sum_prefactor(coupling, L);

  OracleReport rep;
  rep.gamma_up_oracle = pref * up;
  rep.gamma_down_oracle = pref * down;
  rep.chi2_oracle = rep.gamma_down_oracle - rep.gamma_up_oracle;

  const Rates closed = transition_rates(quench, coupling);
  rep.gamma_up_closed = closed.gamma_up;
  rep.gamma_down_closed = closed.gamma_down;
  const double scale = closed.gamma_sum();
  rep.rel_err_up = relative_error(rep.gamma_up_oracle, closed.gamma_up, scale);
  rep.rel_err_down = relative_error(rep.gamma_down_oracle, closed.gamma_down, scale);
  rep.relative_error_vs_closed_form = std::max(rep.rel_err_up, rep.rel_err_down);
  rep.convergence_table.push_back(
      {L, eta, rep.gamma_up_oracle, rep.gamma_down_oracle, rep.rel_err_up, rep.rel_err_down});
  return rep;
}

std::vector<ConvergenceRow> convergence_ladder(const QuenchSpec& quench,
                                               const QubitCoupling& coupling,
                                               std::span<const std::pair<int, double>> ladder,
                                               KernelShape shape) {
  std::vector<ConvergenceRow> rows;
  rows.reserve(ladder.size());
  for (const auto& [L, eta] : ladder)
    rows.push_back(discrete_rates(quench, coupling, L, eta, shape).convergence_table.front());
  return rows;
}

void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows, int precision) {
  os << "L,eta,gamma_up,gamma_down,rel_err_up,rel_err_down\n";
  for (const ConvergenceRow& r : rows) {
    os << fmt::format("{},{:.{}g},{:.{}g},{:.{}g},{:.{}g},{:.{}g}\n", r.L, r.eta, precision,
                      r.gamma_up, precision, r.gamma_down, precision, r.rel_err_up, precision,
                      r.rel_err_down, precision);
  }
}

SpectralFunction chi_spectrum(const QuenchSpec& quench, const QubitCoupling& coupling, int L,
                              double eta, std::span<const double> omega_grid) {
  quench.validate();
  coupling.validate();
  check_lattice(L);
  check_broadening(quench, eta);
  for (std::size_t i = 1; i < omega_grid.size(); ++i)
    if (!(omega_grid[i] > omega_grid[i - 1]))
      throw Error(Errc::InvalidArgument, "omega grid must be strictly increasing");

  const std::vector<GridMode> modes = grid_modes(quench, L);
  const double pref = sum_prefactor(coupling, L) / kPi;
  const std::complex<double> ieta(0.0, eta);

  SpectralFunction out;
  out.omega_grid.assign(omega_grid.begin(), omega_grid.end());
  out.values.resize(omega_grid.size());
  out.eta = eta;
  out.L = L;
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    const double w = omega_grid[i];
    std::complex<double> acc = 0.0;
    for (const GridMode& m : modes) {
      const double amp = m.quadrature * m.weight * (1.0 - 2.0 * m.n_k);
      acc += amp * (1.0 / (w - 2.0 * m.eps_f + ieta) - 1.0 / (w + 2.0 * m.eps_f + ieta));
    }
    out.values[i] = pref * acc;
  }
  return out;
}

}  // namespace qclock
