#include "qclock/rates.hpp"

#include <cmath>
#include <numbers>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

constexpr double kPi = std::numbers::pi;

void require_kind(const QuenchSpec& quench, ModelKind kind, const char* who) {
  quench.validate();
  if (quench.kind() != kind) throw Error(Errc::InvalidArgument, std::string(who) + ": wrong model");
}

double matrix_weight(const ModelSpec& final_model, double k) {
  const double s2 = std::sin(2.0 * bogoliubov_angle(final_model, k));
  if (final_model.kind == ModelKind::IsingXY) return s2 * s2;
  const double sk = std::sin(k);
  return final_model.t * final_model.t * sk * sk * s2 * s2;
}

double rate_prefactor(const QubitCoupling& coupling) {
  return 2.0 * coupling.g_obs * coupling.g_obs / (kPi * coupling.L);
}

Rates resolve(const QuenchSpec& quench, const QubitCoupling& coupling) {
  coupling.validate();
  ResonanceSet set = resonance_roots(quench.final, coupling.epsilon0);
  Rates r;
  r.excluded_roots = std::move(set.excluded);
  const double pref = rate_prefactor(coupling);
  for (const ResonanceRoot& root : set.roots) {
    const ModeState m = mode_state(quench, root.k);
    RootContribution c;
    c.k = root.k;
    c.jacobian = root.jacobian;
    c.matrix_weight = matrix_weight(quench.final, root.k);
    c.dtheta = m.dtheta;
    c.cos_2dtheta = std::cos(2.0 * m.dtheta);
    const double sn = std::sin(m.dtheta);
    const double cs = std::cos(m.dtheta);
    const double base = pref * kPairFactor * c.matrix_weight / c.jacobian;
    c.up = base * sn * sn;
    c.down = base * cs * cs;
    r.gamma_up += c.up;
    r.gamma_down += c.down;
    r.roots.push_back(c);
  }
  return r;
}

}  // namespace

void QubitCoupling::validate() const {
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0))
    throw Error(Errc::InvalidArgument, "epsilon0 must be positive");
  if (!std::isfinite(g_obs)) throw Error(Errc::InvalidArgument, "coupling must be finite");
  if (!(L >= 2.0) || !std::isfinite(L)) throw Error(Errc::InvalidArgument, "L must be >= 2");
}

bool Rates::vanishing_coupling() const {
  if (roots.empty()) return false;
  for (const auto& c : roots)
    if (c.matrix_weight > 0.0) return false;
  return true;
}

ResonanceSet resonance_roots(const ModelSpec& model_final, double epsilon0) {
  if (!(epsilon0 > 0.0)) throw Error(Errc::InvalidArgument, "epsilon0 must be positive");
  ResonanceSet set;
  for (const LevelCrossing& c : level_crossings(model_final, 0.5 * epsilon0)) {
    if (!c.in_domain) {
      set.excluded.push_back(c.k);
      continue;
    }
    const double jac = 2.0 * std::abs(dispersion_slope(model_final, c.k));
    if (jac < 2.0 * kSlopeTolerance)
      throw Error(Errc::DegenerateRoot, "resonance at a band edge (van Hove divergence)");
    set.roots.push_back({c.k, jac});
  }
  return set;
}

Rates rates_ising(const QuenchSpec& quench, const QubitCoupling& coupling) {
  require_kind(quench, ModelKind::IsingXY, "rates_ising");
  return resolve(quench, coupling);
}

Rates rates_xx(const QuenchSpec& quench, const QubitCoupling& coupling) {
  require_kind(quench, ModelKind::XXRing, "rates_xx");
  if (quench.final.phi != 0.0)
    throw Error(Errc::InvalidArgument, "rates are defined at zero flux");
  return resolve(quench, coupling);
}

Rates transition_rates(const QuenchSpec& quench, const QubitCoupling& coupling) {
  return quench.kind() == ModelKind::IsingXY ? rates_ising(quench, coupling)
                                             : rates_xx(quench, coupling);
}

BiasCondition bias_condition(const QuenchSpec& quench, double epsilon0) {
  quench.validate();
  const Rates rates = transition_rates(quench, QubitCoupling{epsilon0, 1.0, 2.0});
  if (rates.no_resonance()) throw Error(Errc::NoResonance, "no resonant momentum");

  BiasCondition out;
  out.multi_root = rates.multi_root();
  out.vanishing_coupling = rates.vanishing_coupling();
  for (const RootContribution& c : rates.roots) {
    RootCondition rc;
    rc.k = c.k;
    if (quench.kind() == ModelKind::IsingXY) {
      const double u = std::cos(c.k);
      const double hi = quench.initial.h;
      const double hf = quench.final.h;
      const double kap = quench.final.kappa;
      const double num = 8.0 * ((hf - u) * (hi - u) + kap * kap * (1.0 - u * u));
      const double rad = epsilon0 * epsilon0 / 4.0 - 4.0 * (hf - u) * (hf - u) + 4.0 * (hi - u) * (hi - u);
      const double den = epsilon0 * std::sqrt(rad);
      rc.defined = rad > 0.0 && std::isfinite(den) && den > 0.0;
      rc.lhs = rc.defined ? num / den : std::nan("");
    } else {
      const double vi = quench.initial.V;
      const double vf = quench.final.V;
      rc.lhs = epsilon0 * epsilon0 / 4.0 - vf * vf + vi * vf;
    }
    out.roots.push_back(rc);
  }

  if (out.vanishing_coupling) {
    out.active = false;
  } else if (!out.multi_root && out.roots.front().defined) {
    out.active = out.roots.front().lhs < 0.0;
  } else {
    out.active = rates.active();
  }
  return out;
}

double chi_second_at(const QuenchSpec& quench, const QubitCoupling& coupling) {
  const Rates r = transition_rates(quench, coupling);
  return -(r.gamma_up - r.gamma_down);
}

}  // namespace qclock
