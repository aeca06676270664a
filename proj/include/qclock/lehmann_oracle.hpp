#pragma once

// Brute-force check of the closed-form rates: finite-L momentum sums of the
// stationary correlator with the delta function replaced by a broadening kernel,
// plus a dense many-body diagonalization for very small chains.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "qclock/model_spectra.hpp"
#include "qclock/rates.hpp"

namespace qclock {

enum class KernelShape { Lorentzian, Gaussian };

/// Unit-mass broadening of a delta function. eta is the Lorentzian half width or
/// the Gaussian standard deviation.
class BroadeningKernel {
 public:
  BroadeningKernel(KernelShape shape, double eta);

  double operator()(double x) const;
  /// Integral of the kernel over (-inf, x].
  double cdf(double x) const;

  KernelShape shape() const { return shape_; }
  double eta() const { return eta_; }

 private:
  KernelShape shape_;
  double eta_;
};

struct SpectralFunction {
  std::vector<double> omega_grid;
  /// chi_spectrum: broadened response chi(omega), with chi''(omega) = -Im values[i].
  /// dense_ed_correlator: broadened stationary correlator spectrum (real).
  std::vector<std::complex<double>> values;
  double eta = 0.0;
  int L = 0;

  double chi_second(std::size_t i) const { return -values[i].imag(); }
};

struct ConvergenceRow {
  int L = 0;
  double eta = 0.0;
  double gamma_up = 0.0;
  double gamma_down = 0.0;
  double rel_err_up = 0.0;
  double rel_err_down = 0.0;
};

struct OracleReport {
  double gamma_up_oracle = 0.0;
  double gamma_down_oracle = 0.0;
  double chi2_oracle = 0.0;
  double gamma_up_closed = 0.0;
  double gamma_down_closed = 0.0;
  double rel_err_up = 0.0;
  double rel_err_down = 0.0;
  /// max(rel_err_up, rel_err_down); a rate that is exactly zero in closed form
  /// contributes its absolute oracle value relative to the other rate.
  double relative_error_vs_closed_form = 0.0;
  std::vector<ConvergenceRow> convergence_table;
};

/// Finite-L sums over the antiperiodic momenta k = +-(2n+1) pi / L with |k| < pi/2
/// (points at exactly pi/2 carry half weight):
///   gamma_up   = C (2 pi / L) sum_k W_k [ n_k K(2 eps_k - eps0) + (1 - n_k) K(2 eps_k + eps0) ]
///   gamma_down = C (2 pi / L) sum_k W_k [ (1 - n_k) K(2 eps_k - eps0) + n_k K(2 eps_k + eps0) ]
/// with the same C and W_k as the closed form and coupling.L in C, so the two are
/// directly comparable. The second kernel term is the broadened tail of the
/// opposite-frequency line and vanishes as eta -> 0.
/// Throws BadBroadening unless 0 < eta < (transition bandwidth)/10, and
/// InvalidArgument unless L is even and >= 64.
OracleReport discrete_rates(const QuenchSpec& quench, const QubitCoupling& coupling, int L,
                            double eta, KernelShape shape = KernelShape::Lorentzian);

/// discrete_rates at each (L, eta) pair, in order.
std::vector<ConvergenceRow> convergence_ladder(const QuenchSpec& quench,
                                               const QubitCoupling& coupling,
                                               std::span<const std::pair<int, double>> ladder,
                                               KernelShape shape = KernelShape::Lorentzian);

/// Columns: L, eta, gamma_up, gamma_down, rel_err_up, rel_err_down.
void write_convergence_csv(std::ostream& os, std::span<const ConvergenceRow> rows,
                           int precision = 12);

/// Lorentzian-broadened retarded response on the same momentum sums,
///   chi(omega) = (C (2 pi/L) / pi) sum_k W_k cos 2dtheta_k
///                [ 1/(omega - 2 eps_k + i eta) - 1/(omega + 2 eps_k + i eta) ],
/// so chi''(omega) is odd in omega and chi''(eps0) = gamma_down - gamma_up of
/// discrete_rates at the same (L, eta).
SpectralFunction chi_spectrum(const QuenchSpec& quench, const QubitCoupling& coupling, int L,
                              double eta, std::span<const double> omega_grid);

// ---------------------------------------------------------------------------
// Dense many-body check

inline constexpr int kDenseMaxSites = 10;
inline constexpr double kDegeneracyTolerance = 1e-9;

struct SpectralLine {
  double omega = 0.0;   ///< E_n - E_m, energy handed to the probe
  double weight = 0.0;  ///< <psi_n| A P_m A |psi_n>, psi_n = P_n psi_0
};

struct DenseCorrelator {
  int L = 0;
  std::vector<double> energies;      ///< post-quench many-body levels (grouped)
  std::vector<double> populations;   ///< diagonal-ensemble weight of each level
  std::vector<SpectralLine> lines;   ///< sorted by omega, weights > 1e-14
  SpectralFunction spectrum;         ///< Lorentzian-broadened lines on the requested grid

  /// Sum of line weights = Tr[rho_st A^2].
  double total_weight() const;
  /// Broadened S(-omega) - S(omega), proportional to chi''(omega).
  double chi_second(double omega, double eta) const;
};

/// Exact diagonalization of both 2^L-dimensional Hamiltonians on a periodic ring.
/// Initial state: ground state of the initial Hamiltonian (even parity for Ising,
/// half filling for XX when the ground level is degenerate). Stationary state: the
/// diagonal ensemble sum_n P_n |psi_0><psi_0| P_n with levels grouped within
/// kDegeneracyTolerance. Observable: sum_j sz_j (Ising) or the current
/// -i t sum_j (b+_j b_{j+1} - h.c.) (XX). Throws TooLarge for L > kDenseMaxSites.
DenseCorrelator dense_ed_correlator(const QuenchSpec& quench, int L, double eta,
                                    std::span<const double> omega_grid);

/// Same computation from a caller-supplied eigen-decomposition of the final
/// Hamiltonian (columns of `vectors`, row-major dim x dim). Used to check that the
/// result does not depend on the basis chosen inside degenerate levels.
DenseCorrelator dense_correlator_from_eigensystem(const std::vector<double>& energies,
                                                  const std::vector<double>& vectors,
                                                  const std::vector<double>& observable,
                                                  const std::vector<double>& initial_state,
                                                  double eta, std::span<const double> omega_grid);

/// Row-major dense matrices of the many-body Hamiltonian and observable.
std::vector<double> dense_hamiltonian(const ModelSpec& model, int L);
std::vector<double> dense_observable(const ModelSpec& model, int L);

}  // namespace qclock
