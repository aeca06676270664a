#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "qclock/errors.hpp"
#include "qclock/rates.hpp"

using namespace qclock;
using std::numbers::pi;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 eng(77031);
  return eng;
}

double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

Errc error_code(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ConfigError;
}

// Continuum integral with the delta function replaced by a narrow Gaussian and a
// fine midpoint rule in k; shares nothing with the root-based evaluation.
std::pair<double, double> smeared_rates(const QuenchSpec& q, const QubitCoupling& c, double sigma) {
  const int n = 4'000'000;
  const double dk = pi / n;
  double up = 0.0;
  double down = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = -pi / 2 + (i + 0.5) * dk;
    const double x = 2 * dispersion(q.final, k) - c.epsilon0;
    if (std::abs(x) > 12 * sigma) continue;
    const double g = std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2 * pi));
    const double s2 = std::sin(2 * bogoliubov_angle(q.final, k));
    double w = s2 * s2;
    if (q.kind() == ModelKind::XXRing) w *= q.final.t * q.final.t * std::sin(k) * std::sin(k);
    const double dth = bogoliubov_angle(q.final, k) - bogoliubov_angle(q.initial, k);
    up += g * w * std::sin(dth) * std::sin(dth);
    down += g * w * std::cos(dth) * std::cos(dth);
  }
  const double pref = 2 * c.g_obs * c.g_obs / (pi * c.L) * dk;
  return {pref * up, pref * down};
}

}  // namespace

TEST_CASE("XX resonance root from the closed form") {
  const auto set = resonance_roots(ModelSpec::xx(1.0, 1.0), 2 * std::sqrt(2.0));
  REQUIRE(set.roots.size() == 1);
  CHECK(set.roots[0].k == doctest::Approx(pi / 3).epsilon(1e-13));
  CHECK(2 * dispersion(ModelSpec::xx(1.0, 1.0), set.roots[0].k) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(resonance_roots(ModelSpec::xx(1.0, 1.0), 1.0).roots.empty());
}

TEST_CASE("Ising unit-anisotropy root and jacobian") {
  const ModelSpec m = ModelSpec::ising(1.5, 1.0);
  const double eps0 = 2 * dispersion(m, 0.8);
  const auto set = resonance_roots(m, eps0);
  REQUIRE(set.roots.size() == 1);
  const double u = (1.5 * 1.5 + 1 - eps0 * eps0 / 16) / 3.0;
  CHECK(std::cos(set.roots[0].k) == doctest::Approx(u).epsilon(1e-12));
  const double h = 1e-6;
  const double fd = (dispersion(m, 0.8 + h) - dispersion(m, 0.8 - h)) / h;
  CHECK(set.roots[0].jacobian == doctest::Approx(std::abs(fd)).epsilon(1e-7));
}

TEST_CASE("roots outside the integration domain are reported, not used") {
  // h_f = 0.2: eps at k = 2.0 lies on the branch with cos k < 0.
  const ModelSpec m = ModelSpec::ising(0.2, 1.0);
  const double eps0 = 2 * dispersion(m, 2.0);
  const auto set = resonance_roots(m, eps0);
  CHECK(set.roots.empty());
  REQUIRE(set.excluded.size() == 1);
  CHECK(set.excluded[0] == doctest::Approx(2.0).epsilon(1e-12));
  const Rates r = rates_ising(QuenchSpec::ising(0.5, 0.2, 1.0), {eps0, 1.0, 100.0});
  CHECK(r.no_resonance());
  CHECK(r.gamma_up == 0.0);
  CHECK(r.excluded_roots.size() == 1);
}

TEST_CASE("band-edge resonances are rejected") {
  CHECK(error_code([] { resonance_roots(ModelSpec::ising(2.0, 1.0), 4.0); }) == Errc::DegenerateRoot);
  CHECK(error_code([] { rates_xx(QuenchSpec::xx(1.0, 0.5, 1.0), {2.0, 1.0, 10.0}); }) ==
        Errc::DegenerateRoot);
}

TEST_CASE("closed form agrees with a smeared continuum integral") {
  struct Case {
    QuenchSpec q;
    double eps0;
  };
  const Case cases[] = {
      {QuenchSpec::xx(1.0, 1.0, -1.0), 2 * std::sqrt(2.0)},
      {QuenchSpec::xx(1.3, -0.4, 0.9), 2 * dispersion(ModelSpec::xx(1.3, 0.9), 0.7)},
      {QuenchSpec::ising(0.5, 1.5, 1.0), 2 * dispersion(ModelSpec::ising(1.5, 1.0), 1.1)},
      {QuenchSpec::ising(0.3, 1.8, 0.6), 2 * dispersion(ModelSpec::ising(1.8, 0.6), 0.5)},
  };
  for (const Case& c : cases) {
    const QubitCoupling cp{c.eps0, 0.7, 50.0};
    const Rates r = transition_rates(c.q, cp);
    const auto [up, down] = smeared_rates(c.q, cp, 2e-4);
    CHECK(up == doctest::Approx(r.gamma_up).epsilon(1e-4));
    CHECK(down == doctest::Approx(r.gamma_down).epsilon(1e-4));
  }
}

TEST_CASE("rates scale as g^2 and 1/L") {
  for (int i = 0; i < 200; ++i) {
    const QuenchSpec q = (i % 2) ? QuenchSpec::ising(uniform(0, 2), uniform(0.2, 2.5), uniform(0.3, 1.5))
                                 : QuenchSpec::xx(1.0, uniform(-2, 2), uniform(-2, 2));
    const double eps0 = 2 * dispersion(q.final, uniform(0.1, pi / 2 - 0.1));
    Rates a;
    try {
      a = transition_rates(q, {eps0, 0.3, 40.0});
    } catch (const Error&) {
      continue;
    }
    const Rates g2 = transition_rates(q, {eps0, 0.6, 40.0});
    const Rates l2 = transition_rates(q, {eps0, 0.3, 80.0});
    if (a.gamma_down > 0) {
      CHECK(g2.gamma_down / a.gamma_down == doctest::Approx(4.0).epsilon(1e-12));
      CHECK(l2.gamma_down / a.gamma_down == doctest::Approx(0.5).epsilon(1e-12));
    }
    if (a.gamma_up > 0) {
      CHECK(g2.gamma_up / a.gamma_up == doctest::Approx(4.0).epsilon(1e-12));
      CHECK(l2.gamma_up / a.gamma_up == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(a.gamma_up >= 0.0);
    CHECK(a.gamma_down >= 0.0);
  }
}

TEST_CASE("null quench never pumps") {
  for (int i = 0; i < 200; ++i) {
    const double p = uniform(0.2, 2.0);
    const QuenchSpec q = (i % 2) ? QuenchSpec::ising(p, p, uniform(0.3, 1.5)) : QuenchSpec::xx(1.0, p, p);
    const double eps0 = 2 * dispersion(q.final, uniform(0.1, pi / 2 - 0.1));
    Rates r;
    try {
      r = transition_rates(q, {eps0, 1.0, 10.0});
    } catch (const Error&) {
      continue;
    }
    CHECK(r.gamma_up == 0.0);
    CHECK(r.gamma_down > 0.0);
    CHECK(chi_second_at(q, {eps0, 1.0, 10.0}) == r.gamma_down);
  }
}

TEST_CASE("chi'' is minus the rate difference") {
  for (int i = 0; i < 300; ++i) {
    const QuenchSpec q = (i % 2) ? QuenchSpec::ising(uniform(0, 2), uniform(0.2, 2.5), uniform(0.3, 1.5))
                                 : QuenchSpec::xx(1.0, uniform(-2, 2), uniform(-2, 2));
    const QubitCoupling c{2 * dispersion(q.final, uniform(0.1, 1.4)), uniform(0.1, 2), 64.0};
    try {
      const Rates r = transition_rates(q, c);
      CHECK(std::abs((r.gamma_up - r.gamma_down) + chi_second_at(q, c)) <= 1e-15);
    } catch (const Error&) {
    }
  }
}

TEST_CASE("bias condition agrees with the rates on single-pair configurations") {
  int single = 0;
  int multi = 0;
  for (int i = 0; i < 4000; ++i) {
    const QuenchSpec q = (i % 2) ? QuenchSpec::ising(uniform(-2, 2), uniform(-2.5, 2.5), uniform(0.2, 1.6))
                                 : QuenchSpec::xx(uniform(0.5, 1.5), uniform(-2, 2), uniform(-2, 2));
    const double eps0 = uniform(0.1, 7.0);
    BiasCondition bc;
    Rates r;
    try {
      r = transition_rates(q, {eps0, 1.0, 10.0});
      bc = bias_condition(q, eps0);
    } catch (const Error&) {
      continue;
    }
    if (bc.vanishing_coupling) continue;
    if (std::abs(r.gamma_up - r.gamma_down) < 1e-12 * r.gamma_sum()) continue;
    CHECK(bc.active == r.active());
    if (bc.multi_root) {
      ++multi;
      CHECK(bc.roots.size() == r.roots.size());
    } else {
      ++single;
      CHECK(bc.roots.front().defined);
      CHECK((bc.roots.front().lhs < 0.0) == r.active());
    }
  }
  CHECK(single > 500);
  CHECK(multi > 0);
}

TEST_CASE("printed Ising condition equals cos 2 dtheta at the root") {
  for (int i = 0; i < 500; ++i) {
    const QuenchSpec q = QuenchSpec::ising(uniform(-2, 2), uniform(-2.5, 2.5), uniform(0.2, 1.6));
    const double eps0 = 2 * dispersion(q.final, uniform(0.05, pi / 2 - 0.05));
    try {
      for (const RootCondition& rc : bias_condition(q, eps0).roots)
        CHECK(rc.lhs == doctest::Approx(cos_two_dtheta(q, rc.k)).epsilon(1e-9));
    } catch (const Error&) {
    }
  }
}

TEST_CASE("XX bias condition values") {
  const double eps0 = std::sqrt(6.0);  // eps0^2/4 = 1.5
  const BiasCondition a = bias_condition(QuenchSpec::xx(1.0, 1.0, -1.0), eps0);
  CHECK(a.roots.front().lhs == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(a.active);
  const BiasCondition b = bias_condition(QuenchSpec::xx(1.0, 1.0, 1.0), eps0);
  CHECK(b.roots.front().lhs == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_FALSE(b.active);
  CHECK(error_code([] { bias_condition(QuenchSpec::xx(1.0, 1.0, 1.0), 1.0); }) == Errc::NoResonance);
}

TEST_CASE("XX quench without sign change is never active") {
  const QuenchSpec q = QuenchSpec::xx(1.0, 0.5, 1.0);
  for (int i = 1; i < 200; ++i) {
    const double eps0 = 2.0 + (2 * std::hypot(2.0, 1.0) - 2.0) * i / 200.0;
    const Rates r = rates_xx(q, {eps0, 1.0, 10.0});
    CHECK(r.gamma_up <= r.gamma_down);
  }
}

TEST_CASE("Ising activity requires crossing into the paramagnet") {
  for (double hi : {0.2, 0.5, 0.8}) {
    for (int j = 0; j < 60; ++j) {
      const double hf = 0.1 + 2.9 * j / 59.0;
      for (int e = 1; e < 40; ++e) {
        const double eps0 = 0.2 * e;
        try {
          const Rates r = rates_ising(QuenchSpec::ising(hi, hf, 1.0), {eps0, 1.0, 10.0});
          if (r.active()) CHECK(hf > 1.0);
        } catch (const Error&) {
        }
      }
    }
  }
}

TEST_CASE("vanishing matrix elements") {
  const Rates r = rates_ising(QuenchSpec::ising(0.3, 1.2, 0.0), {2 * 0.5, 1.0, 10.0});
  CHECK_FALSE(r.no_resonance());
  CHECK(r.vanishing_coupling());
  CHECK(r.gamma_sum() == 0.0);
  CHECK_FALSE(bias_condition(QuenchSpec::ising(0.3, 1.2, 0.0), 1.0).active);
}

TEST_CASE("argument checks") {
  CHECK(error_code([] { rates_xx(QuenchSpec::ising(0.5, 1.5, 1.0), {}); }) == Errc::InvalidArgument);
  CHECK(error_code([] { rates_ising(QuenchSpec::ising(0.5, 1.5, 1.0), {-1.0, 1.0, 10.0}); }) ==
        Errc::InvalidArgument);
  CHECK(error_code([] { rates_ising(QuenchSpec::ising(0.5, 1.5, 1.0), {1.0, 1.0, 1.0}); }) ==
        Errc::InvalidArgument);
  QuenchSpec flux{ModelSpec::xx(1.0, 0.5, 0.3), ModelSpec::xx(1.0, -0.5, 0.3)};
  CHECK(error_code([&] { rates_xx(flux, {2.0, 1.0, 10.0}); }) == Errc::InvalidArgument);
}
