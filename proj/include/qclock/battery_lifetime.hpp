#pragma once

// Energy stored at the resonant shell of a quenched chain and the resulting clock
// lifetime estimates.

#include "qclock/clock_dynamics.hpp"
#include "qclock/model_spectra.hpp"
#include "qclock/rates.hpp"

namespace qclock {

/// E_av = (L/2pi) eps0 sum_{k*} rho_{k*}(eps0/2) cos^2(dtheta_{k*}), summed over both
/// members of every resonant pair in |k| <= pi/2 with rho_{k*} = |d eps/dk|^-1.
/// Throws NoResonance or VanHoveSingularity.
double available_energy(const QuenchSpec& quench, const QubitCoupling& coupling);

/// T* = -(gamma_sum / chi'') (L/2pi) sum rho cos^2 = -(gamma_sum / chi'') E_av / eps0.
/// Throws PassiveState unless chi'' < 0.
double lifetime_estimate(double gamma_sum, double chi_second, double energy_over_eps0);

struct LifetimeReport {
  double E_av = 0.0;
  double E_ph = 0.0;   ///< (d-1) eps0
  double N_p = 0.0;    ///< E_av / E_ph
  double T_star = 0.0;
  double mean_tick_time = 0.0;
  double T_star_supplementary = 0.0;  ///< E_av tau / E_ph with tau = mean_tick_time
  double ratio = 0.0;                 ///< T_star / T_star_supplementary
  double gamma_up = 0.0;
  double gamma_down = 0.0;
  double chi_second = 0.0;
};

/// Throws PassiveState when gamma_up <= gamma_down, NoResonance without roots.
LifetimeReport lifetime(const QuenchSpec& quench, const QubitCoupling& coupling,
                        const LadderSpec& ladder);

}  // namespace qclock
