#include "qclock/model_spectra.hpp"

#include <algorithm>
#include <cmath>

#include "qclock/errors.hpp"

namespace qclock {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCrossingResidual = 1e-13;

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// Bisection polish of a crossing produced by a closed form. The closed forms
// are already accurate to a few ulps away from band edges; this only kicks in
// when cancellation inside the square roots costs digits.
double polish_crossing(const ModelSpec& model, double eps, double k) {
  auto residual = [&](double q) { return dispersion(model, q) - eps; };
  double r = residual(k);
  if (std::abs(r) <= kCrossingResidual) return k;

  const double slope = dispersion_slope(model, k);
  if (std::abs(slope) < kSlopeTolerance) return k;

  double step = 4.0 * std::abs(r / slope) + 1e-14;
  for (int attempt = 0; attempt < 40; ++attempt, step *= 2.0) {
    double lo = std::max(0.0, k - step);
    double hi = std::min(kPi, k + step);
    double r_lo = residual(lo);
    double r_hi = residual(hi);
    if (r_lo * r_hi > 0.0) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      double mid = 0.5 * (lo + hi);
      double r_mid = residual(mid);
      if (std::abs(r_mid) <= kCrossingResidual) return mid;
      if ((r_mid < 0.0) == (r_lo < 0.0)) {
        lo = mid;
        r_lo = r_mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
  return k;
}

std::vector<double> ising_cosines(double h, double kappa, double eps) {
  // (h - u)^2 + kappa^2 (1 - u^2) = eps^2 / 4  with u = cos k
  const double a = 1.0 - kappa * kappa;
  const double b = -2.0 * h;
  const double c = h * h + kappa * kappa - 0.25 * eps * eps;
  std::vector<double> us;
  if (std::abs(a) < 1e-12) {
    // |kappa| = 1: the quadratic degenerates to 2 h u = h^2 + kappa^2 - eps^2/4.
    if (h != 0.0) us.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return us;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q != 0.0) {
      us.push_back(q / a);
      us.push_back(c / q);
    } else {
      us.push_back(0.0);
    }
  }
  std::vector<double> inside;
  for (double u : us) {
    // Accept roots that sit at the zone boundary up to rounding.
    if (u > 1.0 && u < 1.0 + 1e-12) u = 1.0;
    if (u < -1.0 && u > -1.0 - 1e-12) u = -1.0;
    if (u >= -1.0 && u <= 1.0) inside.push_back(u);
  }
  std::sort(inside.begin(), inside.end());
  inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
  return inside;
}

}  // namespace

ModelSpec ModelSpec::ising(double h, double kappa) {
  ModelSpec m;
  m.kind = ModelKind::IsingXY;
  m.h = h;
  m.kappa = kappa;
  return m;
}

ModelSpec ModelSpec::xx(double t, double V, double phi) {
  ModelSpec m;
  m.kind = ModelKind::XXRing;
  m.t = t;
  m.V = V;
  m.phi = phi;
  return m;
}

void ModelSpec::validate() const {
  if (!finite_all({h, kappa, t, V, phi}))
    throw Error(Errc::InvalidArgument, "model parameters must be finite");
  if (kind == ModelKind::XXRing && !(t > 0.0))
    throw Error(Errc::InvalidArgument, "XX ring hopping t must be positive");
}

QuenchSpec QuenchSpec::ising(double h_i, double h_f, double kappa) {
  return {ModelSpec::ising(h_i, kappa), ModelSpec::ising(h_f, kappa)};
}

QuenchSpec QuenchSpec::xx(double t, double V_i, double V_f) {
  return {ModelSpec::xx(t, V_i), ModelSpec::xx(t, V_f)};
}

void QuenchSpec::validate() const {
  initial.validate();
  final.validate();
  if (initial.kind != final.kind)
    throw Error(Errc::InvalidArgument, "quench endpoints must be the same model");
  if (initial.kind == ModelKind::IsingXY) {
    if (initial.kappa != final.kappa)
      throw Error(Errc::InvalidArgument, "only h may be quenched in the Ising chain");
  } else if (initial.t != final.t || initial.phi != final.phi) {
    throw Error(Errc::InvalidArgument, "only V may be quenched in the XX ring");
  }
}

double dispersion(const ModelSpec& model, double k) {
  if (model.kind == ModelKind::IsingXY) {
    const double a = model.h - std::cos(k);
    const double b = model.kappa * std::sin(k);
    return 2.0 * std::hypot(a, b);
  }
  return std::hypot(2.0 * model.t * std::cos(k - model.phi), model.V);
}

double dispersion_slope(const ModelSpec& model, double k) {
  const double eps = dispersion(model, k);
  if (eps < kGaplessTolerance) return 0.0;
  if (model.kind == ModelKind::IsingXY) {
    const double s = std::sin(k);
    const double c = std::cos(k);
    // eps = 2 sqrt(D), D' = 2 (h - cos k) sin k + 2 kappa^2 sin k cos k
    const double dD = 2.0 * (model.h - c) * s + 2.0 * model.kappa * model.kappa * s * c;
    return 2.0 * dD / eps;
  }
  const double q = k - model.phi;
  return -4.0 * model.t * model.t * std::cos(q) * std::sin(q) / eps;
}

double bogoliubov_angle(const ModelSpec& model, double k) {
  if (dispersion(model, k) < kGaplessTolerance)
    throw Error(Errc::GaplessMode, "Bogoliubov angle undefined at a gapless momentum");
  if (model.kind == ModelKind::IsingXY)
    return 0.5 * std::atan2(model.kappa * std::sin(k), model.h - std::cos(k));
  return 0.5 * std::atan2(model.V, 2.0 * model.t * std::cos(k - model.phi));
}

ModeState mode_state(const QuenchSpec& quench, double k) {
  ModeState s;
  s.k = k;
  s.eps_i = dispersion(quench.initial, k);
  s.eps_f = dispersion(quench.final, k);
  s.theta_i = bogoliubov_angle(quench.initial, k);
  s.theta_f = bogoliubov_angle(quench.final, k);
  s.dtheta = s.theta_f - s.theta_i;
  const double sn = std::sin(s.dtheta);
  s.n_k = sn * sn;
  return s;
}

double cos_two_dtheta(const QuenchSpec& quench, double k) {
  const double eps_i = dispersion(quench.initial, k);
  const double eps_f = dispersion(quench.final, k);
  if (eps_i < kGaplessTolerance || eps_f < kGaplessTolerance)
    throw Error(Errc::GaplessMode, "angle difference undefined at a gapless momentum");
  if (quench.kind() == ModelKind::IsingXY) {
    const double c = std::cos(k);
    const double ks = 2.0 * quench.final.kappa * std::sin(k);
    return (4.0 * (quench.initial.h - c) * (quench.final.h - c) + ks * ks) / (eps_i * eps_f);
  }
  const double tc = 2.0 * quench.final.t * std::cos(k);
  return (tc * tc + quench.initial.V * quench.final.V) / (eps_i * eps_f);
}

std::vector<LevelCrossing> level_crossings(const ModelSpec& model, double eps) {
  std::vector<LevelCrossing> out;
  if (!(eps >= 0.0) || !std::isfinite(eps)) return out;
  if (model.kind == ModelKind::IsingXY) {
    for (double u : ising_cosines(model.h, model.kappa, eps)) {
      const double k = polish_crossing(model, eps, std::acos(u));
      out.push_back({k, k <= kDomainHalfWidth});
    }
    std::sort(out.begin(), out.end(),
              [](const LevelCrossing& a, const LevelCrossing& b) { return a.k < b.k; });
    return out;
  }
  const ModelSpec folded = ModelSpec::xx(model.t, model.V, 0.0);
  const double c2 = (eps * eps - model.V * model.V) / (4.0 * model.t * model.t);
  if (c2 < 0.0 || c2 > 1.0) return out;
  const double k = polish_crossing(folded, eps, std::acos(std::sqrt(c2)));
  out.push_back({k, true});
  return out;
}

DensityOfStates density_of_states(const ModelSpec& model, double eps) {
  DensityOfStates dos;
  for (const LevelCrossing& c : level_crossings(model, eps)) {
    if (!c.in_domain) continue;
    const double slope = dispersion_slope(model, c.k);
    if (std::abs(slope) < kSlopeTolerance)
      throw Error(Errc::VanHoveSingularity, "zero group velocity at the requested energy");
    const double rho = 1.0 / std::abs(slope);
    dos.roots.push_back({c.k, slope, rho});
    dos.roots.push_back({-c.k, -slope, rho});
    dos.total += 2.0 * rho;
  }
  if (dos.roots.empty()) throw Error(Errc::OutOfBand, "energy outside the band");
  return dos;
}

BandRange band_range(const ModelSpec& model) {
  if (model.kind == ModelKind::XXRing) {
    return {std::abs(model.V), std::hypot(2.0 * model.t, model.V)};
  }
  // eps^2/4 = (1 - kappa^2) u^2 - 2 h u + h^2 + kappa^2 over u = cos k in [0, 1]
  const double a = 1.0 - model.kappa * model.kappa;
  auto f = [&](double u) {
    return std::max(0.0, a * u * u - 2.0 * model.h * u + model.h * model.h +
                             model.kappa * model.kappa);
  };
  double lo = std::min(f(0.0), f(1.0));
  double hi = std::max(f(0.0), f(1.0));
  if (a != 0.0) {
    const double vertex = model.h / a;
    if (vertex > 0.0 && vertex < 1.0) {
      lo = std::min(lo, f(vertex));
      hi = std::max(hi, f(vertex));
    }
  }
  return {2.0 * std::sqrt(lo), 2.0 * std::sqrt(hi)};
}

}  // namespace qclock
