#pragma once

// Post-quench qubit transition rates from analytic resolution of
//   gamma_{up,down} = C * int_{|k|<pi/2} dk delta(2 eps_k - eps0) W_k {sin^2, cos^2}(dtheta_k)
// with
//   IsingXY (magnetization coupling):  C = 2 g^2 / (pi L),      W_k = sin^2(2 theta_{k,f})
//   XXRing  (current coupling):        C = 2 t^2 g^2 / (pi L),  W_k = sin^2 k sin^2(2 theta_{k,f})
// The delta function is resolved as sum_{k*} f(k*) / |d(2 eps_k)/dk|_{k*}; each root
// k* > 0 stands for the +-k* pair (kPairFactor). The zero-frequency term is dropped.

#include <vector>

#include "qclock/model_spectra.hpp"

namespace qclock {

struct QubitCoupling {
  double epsilon0 = 1.0;  ///< qubit gap
  double g_obs = 1.0;     ///< g_sigma (Ising) or g_J (XX)
  double L = 100.0;       ///< chain length in the 1/L prefactor

  void validate() const;
  bool operator==(const QubitCoupling&) const = default;
};

struct ResonanceRoot {
  double k = 0.0;         ///< representative of the +-k pair, 0 < k <= pi/2
  double jacobian = 0.0;  ///< |d(2 eps_k)/dk| at k
};

struct ResonanceSet {
  std::vector<ResonanceRoot> roots;
  /// Roots of 2 eps_k = eps0 with pi/2 < k < pi. They solve the resonance but lie
  /// outside the integration domain and do not contribute.
  std::vector<double> excluded;
};

/// Throws DegenerateRoot when a root has |d eps/dk| < kSlopeTolerance.
ResonanceSet resonance_roots(const ModelSpec& model_final, double epsilon0);

struct RootContribution {
  double k = 0.0;
  double jacobian = 0.0;
  double matrix_weight = 0.0;  ///< W_k, occupation factor excluded
  double dtheta = 0.0;
  double cos_2dtheta = 0.0;
  double up = 0.0;    ///< this pair's share of gamma_up
  double down = 0.0;  ///< this pair's share of gamma_down
};

struct Rates {
  double gamma_up = 0.0;
  double gamma_down = 0.0;
  std::vector<RootContribution> roots;
  std::vector<double> excluded_roots;

  bool no_resonance() const { return roots.empty(); }
  bool multi_root() const { return roots.size() > 1; }
  double gamma_sum() const { return gamma_up + gamma_down; }
  bool active() const { return gamma_up > gamma_down; }
  /// True when roots exist but every matrix element vanishes (kappa = 0, V_f = 0).
  bool vanishing_coupling() const;
};

Rates rates_ising(const QuenchSpec& quench, const QubitCoupling& coupling);
Rates rates_xx(const QuenchSpec& quench, const QubitCoupling& coupling);
/// Dispatches on quench.kind().
Rates transition_rates(const QuenchSpec& quench, const QubitCoupling& coupling);

struct RootCondition {
  double k = 0.0;
  double lhs = 0.0;      ///< printed left-hand side; negative predicts gamma_up > gamma_down
  bool defined = true;   ///< false when the Ising denominator is zero or non-real
};

struct BiasCondition {
  std::vector<RootCondition> roots;
  bool active = false;
  bool multi_root = false;
  bool vanishing_coupling = false;
};

/// Sign test for gamma_up > gamma_down.
///   IsingXY: 8[(h_f-u)(h_i-u) + kappa^2(1-u^2)] / [eps0 sqrt(eps0^2/4 - 4(h_f-u)^2 + 4(h_i-u)^2)],
///            u = cos k*, evaluated verbatim;
///   XXRing:  eps0^2/4 - V_f^2 + V_i V_f.
/// With one root pair the verdict is lhs < 0. With several Ising pairs it comes from
/// the summed rates, and the per-root signs are still reported. Throws NoResonance.
BiasCondition bias_condition(const QuenchSpec& quench, double epsilon0);

/// chi''(eps0) = -(gamma_up - gamma_down), negative for states active at resonance.
double chi_second_at(const QuenchSpec& quench, const QubitCoupling& coupling);

}  // namespace qclock
