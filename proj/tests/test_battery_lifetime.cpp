#include <cmath>
#include <numbers>

#include <doctest.h>

#include "qclock/battery_lifetime.hpp"
#include "qclock/errors.hpp"

using namespace qclock;

namespace {

constexpr double kPi = std::numbers::pi;

Errc error_code(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ConfigError;
}

// eps0 (L/2pi) * integral over |k| <= pi/2 of delta_sigma(eps_k - eps0/2) cos^2(dtheta),
// with a Gaussian of width sigma on a uniform grid.
double smeared_energy(const QuenchSpec& q, const QubitCoupling& c, double sigma) {
  const int n = 4'000'000;
  const double dk = kPi / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = -kPi / 2 + (i + 0.5) * dk;
    const double x = (dispersion(q.final, k) - 0.5 * c.epsilon0) / sigma;
    if (std::abs(x) > 12) continue;
    const double cd = std::cos(mode_state(q, k).dtheta);
    acc += std::exp(-0.5 * x * x) / (sigma * std::sqrt(2 * kPi)) * cd * cd * dk;
  }
  return c.epsilon0 * c.L / (2 * kPi) * acc;
}

}  // namespace

TEST_CASE("available energy matches a smeared shell integral") {
  const struct {
    QuenchSpec q;
    double eps0;
  } cases[] = {
      {QuenchSpec::ising(0.5, 2.0, 1.0), 5.0},
      {QuenchSpec::ising(0.3, 1.4, 0.6), 3.1},
      {QuenchSpec::xx(1.0, -1.0, 1.0), 2 * std::sqrt(2.0)},
      {QuenchSpec::xx(1.2, 0.4, -0.8), 2.6},
  };
  for (const auto& c : cases) {
    const QubitCoupling coupling{c.eps0, 1.0, 200.0};
    const double direct = available_energy(c.q, coupling);
    CHECK(direct == doctest::Approx(smeared_energy(c.q, coupling, 2e-4)).epsilon(1e-4));
  }
}

TEST_CASE("XX example composed from the density of states and the mode angles") {
  const QuenchSpec q = QuenchSpec::xx(1.0, -1.0, 1.0);
  const QubitCoupling c{2 * std::sqrt(2.0), 1.0, 100.0};
  const DensityOfStates dos = density_of_states(q.final, std::sqrt(2.0));
  double shell = 0.0;
  for (const DensityRoot& r : dos.roots) {
    const double cd = std::cos(mode_state(q, r.k).dtheta);
    shell += r.density * cd * cd;
  }
  const double expect = c.epsilon0 * c.L / (2 * kPi) * shell;
  CHECK(available_energy(q, c) == doctest::Approx(expect).epsilon(1e-13));
  // k* = pi/3, rho = sqrt(2/3), cos^2(dtheta) = 1/2 on both members of the pair.
  CHECK(available_energy(q, c) == doctest::Approx(c.epsilon0 * c.L / (2 * kPi) * std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("null quench stores the full shell") {
  const QuenchSpec q = QuenchSpec::ising(1.7, 1.7, 1.0);
  const QubitCoupling c{4.6, 1.0, 64.0};
  const DensityOfStates dos = density_of_states(q.final, 2.3);
  double rho = 0.0;
  for (const DensityRoot& r : dos.roots) rho += r.density;
  CHECK(available_energy(q, c) == doctest::Approx(c.epsilon0 * c.L / (2 * kPi) * rho).epsilon(1e-13));
}

TEST_CASE("energy and lifetime are extensive") {
  const QuenchSpec q = QuenchSpec::ising(0.5, 2.0, 1.0);
  LadderSpec lad;
  lad.d = 20;
  const LifetimeReport a = lifetime(q, {5.0, 1.0, 100.0}, lad);
  const LifetimeReport b = lifetime(q, {5.0, 1.0, 200.0}, lad);
  CHECK(b.E_av / a.E_av == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.T_star / a.T_star == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lifetime report fields are consistent") {
  const QuenchSpec q = QuenchSpec::xx(1.0, -1.5, 1.0);
  const QubitCoupling c{2.6, 1.0, 300.0};
  LadderSpec lad;
  lad.d = 12;
  lad.Gamma = 0.5;
  const LifetimeReport r = lifetime(q, c, lad);
  const Rates rates = transition_rates(q, c);
  CHECK(r.gamma_up == rates.gamma_up);
  CHECK(r.chi_second == doctest::Approx(rates.gamma_down - rates.gamma_up).epsilon(1e-15));
  CHECK(r.E_ph == doctest::Approx(11 * c.epsilon0));
  CHECK(r.N_p == doctest::Approx(r.E_av / r.E_ph).epsilon(1e-15));
  CHECK(r.T_star == doctest::Approx(-rates.gamma_sum() / r.chi_second * r.E_av / c.epsilon0).epsilon(1e-13));
  const double tau = solve_first_passage(ladder_rates(rates, lad), lad).mean;
  CHECK(r.mean_tick_time == doctest::Approx(tau).epsilon(1e-15));
  CHECK(r.T_star_supplementary == doctest::Approx(r.N_p * tau).epsilon(1e-14));
  CHECK(r.ratio == doctest::Approx(r.T_star / r.T_star_supplementary).epsilon(1e-14));
}

TEST_CASE("passive and off-resonant states have no lifetime") {
  LadderSpec lad;
  CHECK(error_code([&] { lifetime(QuenchSpec::xx(1.0, 0.5, 1.0), {2.6, 1.0, 100.0}, lad); }) ==
        Errc::PassiveState);
  CHECK(error_code([&] { lifetime(QuenchSpec::ising(0.5, 2.0, 1.0), {0.5, 1.0, 100.0}, lad); }) ==
        Errc::NoResonance);
  CHECK(error_code([] { available_energy(QuenchSpec::ising(0.5, 2.0, 1.0), {20.0, 1.0, 100.0}); }) ==
        Errc::NoResonance);
  CHECK(error_code([] { lifetime_estimate(1.0, 0.0, 1.0); }) == Errc::PassiveState);
  CHECK(error_code([] { lifetime_estimate(1.0, 0.2, 1.0); }) == Errc::PassiveState);
  CHECK(lifetime_estimate(2.0, -0.5, 3.0) == doctest::Approx(12.0));
}

TEST_CASE("lifetime diverges as the bias vanishes") {
  // With t = 1 and V_f = 1 the shell sits at (2 cos k*)^2 = eps0^2/4 - 1 and the
  // rates balance at V_i = -(2 cos k*)^2.
  LadderSpec lad;
  const QubitCoupling c{2.6, 1.0, 100.0};
  const double marginal = -(c.epsilon0 * c.epsilon0 / 4 - 1.0);
  CHECK(std::abs(chi_second_at(QuenchSpec::xx(1.0, marginal, 1.0), c)) < 1e-12);
  double last_T = 0.0;
  double last_chi = -1e300;
  for (double delta : {0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const LifetimeReport r = lifetime(QuenchSpec::xx(1.0, marginal - delta, 1.0), c, lad);
    CHECK(r.chi_second < 0.0);
    CHECK(r.chi_second > last_chi);
    CHECK(r.T_star > last_T);
    last_T = r.T_star;
    last_chi = r.chi_second;
  }
  CHECK(last_T > 1e6);
  CHECK(error_code([&] { lifetime(QuenchSpec::xx(1.0, marginal + 1e-3, 1.0), c, lad); }) ==
        Errc::PassiveState);
}
