#pragma once

// Single-mode physics of the two free-fermion battery models.
//
// IsingXY:  H = -sum_j (Jx sx sx + Jy sy sy) - h sum_j sz,  Jx,y = (1 +- kappa)/2, J = 1.
//           eps_k = 2 sqrt((h - cos k)^2 + kappa^2 sin^2 k),  tan 2theta = kappa sin k / (h - cos k)
// XXRing:   hard-core bosons, H = t sum (e^{i phi} b+_j b_{j+1} + h.c.) + V sum (-1)^j n_j
//           eps_k = sqrt((2t cos(k - phi))^2 + V^2),       tan 2theta = V / (2t cos k)
//
// Units: hbar = k_B = 1, Ising energies in units of J.

#include <numbers>
#include <vector>

namespace qclock {

enum class ModelKind { IsingXY, XXRing };

struct ModelSpec {
  ModelKind kind = ModelKind::IsingXY;
  // IsingXY
  double h = 0.0;
  double kappa = 1.0;
  // XXRing
  double t = 1.0;
  double V = 0.0;
  double phi = 0.0;

  static ModelSpec ising(double h, double kappa);
  static ModelSpec xx(double t, double V, double phi = 0.0);

  /// Throws Errc::InvalidArgument on non-finite parameters or t <= 0.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

/// Charging protocol. Only h (IsingXY) or V (XXRing) may differ between the two ends.
struct QuenchSpec {
  ModelSpec initial;
  ModelSpec final;

  static QuenchSpec ising(double h_i, double h_f, double kappa);
  static QuenchSpec xx(double t, double V_i, double V_f);

  void validate() const;
  ModelKind kind() const { return final.kind; }

  bool operator==(const QuenchSpec&) const = default;
};

struct ModeState {
  double k = 0.0;
  double eps_i = 0.0;
  double eps_f = 0.0;
  double theta_i = 0.0;
  double theta_f = 0.0;
  double dtheta = 0.0;
  double n_k = 0.0;  ///< sin^2(dtheta), occupation of the upper post-quench branch
};

/// Modes with eps_k below this are gapless and carry no Bogoliubov angle.
inline constexpr double kGaplessTolerance = 1e-10;
/// Group velocities below this mark a band edge (van Hove point).
inline constexpr double kSlopeTolerance = 1e-6;

/// Half-width of the momentum domain used by every continuum formula. Both
/// models integrate over |k| < pi/2 and count the +-k pair with kPairFactor.
inline constexpr double kDomainHalfWidth = std::numbers::pi / 2;
inline constexpr double kPairFactor = 2.0;

double dispersion(const ModelSpec& model, double k);

/// d eps_k / dk. Returns 0 at a gapless point, where the slope is a cusp.
double dispersion_slope(const ModelSpec& model, double k);

/// Theta_k with 2 theta = atan2(numerator, denominator), so cos 2theta and sin 2theta
/// both carry their closed-form signs. Throws GaplessMode when eps_k < kGaplessTolerance.
double bogoliubov_angle(const ModelSpec& model, double k);

ModeState mode_state(const QuenchSpec& quench, double k);

/// Closed form of cos 2 dtheta_k from the pre/post-quench numerators, without
/// going through the angles.
double cos_two_dtheta(const QuenchSpec& quench, double k);

/// A momentum 0 <= k <= pi with eps_k equal to the requested energy.
struct LevelCrossing {
  double k = 0.0;
  bool in_domain = true;  ///< false when |k| > pi/2, outside the integration domain
};

/// All k in [0, pi] with eps_k == eps, from the closed-form quadratic (IsingXY)
/// or arccos (XXRing) solution, each polished by bisection to |eps_k - eps| <= 1e-13.
/// XXRing only has crossings in [0, pi/2] because the ring is folded into the
/// reduced zone. phi is ignored (treated as 0).
std::vector<LevelCrossing> level_crossings(const ModelSpec& model, double eps);

struct DensityRoot {
  double k = 0.0;
  double slope = 0.0;    ///< d eps/dk at k
  double density = 0.0;  ///< 1/|slope|
};

struct DensityOfStates {
  std::vector<DensityRoot> roots;  ///< both members of each +-k pair
  double total = 0.0;
};

/// rho(eps) = sum over roots in |k| <= pi/2 of |d eps/dk|^-1.
/// Throws OutOfBand without roots and VanHoveSingularity at a band edge.
DensityOfStates density_of_states(const ModelSpec& model, double eps);

/// Minimum and maximum of eps_k over the integration domain (sampled plus edges).
struct BandRange {
  double min = 0.0;
  double max = 0.0;
};
BandRange band_range(const ModelSpec& model);

}  // namespace qclock
