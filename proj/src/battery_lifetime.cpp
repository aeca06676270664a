#include "qclock/battery_lifetime.hpp"

#include <cmath>
#include <numbers>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

double shell_weight(const QuenchSpec& quench, const QubitCoupling& coupling) {
  DensityOfStates dos;
  try {
    dos = density_of_states(quench.final, 0.5 * coupling.epsilon0);
  } catch (const Error& e) {
    if (e.code() == Errc::OutOfBand) throw Error(Errc::NoResonance, "no resonant shell at eps0/2");
    throw;
  }
  double acc = 0.0;
  for (const DensityRoot& r : dos.roots) {
    const double c = std::cos(mode_state(quench, r.k).dtheta);
    acc += r.density * c * c;
  }
  return coupling.L / (2.0 * std::numbers::pi) * acc;
}

}  // namespace

double available_energy(const QuenchSpec& quench, const QubitCoupling& coupling) {
  quench.validate();
  coupling.validate();
  return coupling.epsilon0 * shell_weight(quench, coupling);
}

double lifetime_estimate(double gamma_sum, double chi_second, double energy_over_eps0) {
  if (!(chi_second < 0.0)) throw Error(Errc::PassiveState, "chi''(eps0) >= 0: state is passive");
  return -(gamma_sum / chi_second) * energy_over_eps0;
}

LifetimeReport lifetime(const QuenchSpec& quench, const QubitCoupling& coupling,
                        const LadderSpec& ladder) {
  quench.validate();
  coupling.validate();
  ladder.validate();
  const Rates rates = transition_rates(quench, coupling);
  if (rates.no_resonance()) throw Error(Errc::NoResonance, "no resonant momentum");

  LifetimeReport rep;
  rep.gamma_up = rates.gamma_up;
  rep.gamma_down = rates.gamma_down;
  rep.chi_second = rates.gamma_down - rates.gamma_up;
  const double shell = shell_weight(quench, coupling);
  rep.T_star = lifetime_estimate(rates.gamma_sum(), rep.chi_second, shell);
  rep.E_av = coupling.epsilon0 * shell;
  rep.E_ph = (ladder.d - 1) * coupling.epsilon0;
  rep.N_p = rep.E_av / rep.E_ph;
  rep.mean_tick_time = solve_first_passage(ladder_rates(rates, ladder), ladder).mean;
  rep.T_star_supplementary = rep.N_p * rep.mean_tick_time;
  rep.ratio = rep.T_star / rep.T_star_supplementary;
  return rep;
}

}  // namespace qclock
