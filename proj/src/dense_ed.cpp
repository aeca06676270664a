#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "qclock/errors.hpp"
#include "qclock/lehmann_oracle.hpp"

namespace qclock {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

constexpr double kLineCutoff = 1e-14;

// Bit j of a basis index is spin up (Ising) or an occupied site (XX).
bool bit(std::size_t s, int j) { return (s >> j) & 1u; }

Matrix ising_hamiltonian(const ModelSpec& m, int L) {
  const std::size_t dim = std::size_t{1} << L;
  const double jx = 0.5 * (1.0 + m.kappa);
  const double jy = 0.5 * (1.0 - m.kappa);
  Matrix H = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s) {
    for (int j = 0; j < L; ++j) {
      H(s, s) -= m.h * (bit(s, j) ? 1.0 : -1.0);
      const int nb = (j + 1) % L;
      const std::size_t flipped = s ^ (std::size_t{1} << j) ^ (std::size_t{1} << nb);
      // sy sy flips both spins with amplitude -1 for parallel and +1 for antiparallel pairs.
      const double yy = (bit(s, j) == bit(s, nb)) ? -1.0 : 1.0;
      H(flipped, s) -= jx + jy * yy;
    }
  }
  return H;
}

Matrix xx_hamiltonian(const ModelSpec& m, int L) {
  const std::size_t dim = std::size_t{1} << L;
  Matrix H = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s) {
    for (int j = 0; j < L; ++j) {
      // site index j + 1 in the 1-based convention of the staggered term (-1)^j n_j
      if (bit(s, j)) H(s, s) += m.V * ((j % 2 == 0) ? -1.0 : 1.0);
      const int nb = (j + 1) % L;
      if (bit(s, j) != bit(s, nb)) {
        const std::size_t moved = s ^ (std::size_t{1} << j) ^ (std::size_t{1} << nb);
        H(moved, s) += m.t;
      }
    }
  }
  return H;
}

// Ising: sum_j sz_j. XX: K = t sum_j (b+_j b_{j+1} - h.c.), with J = -i K; K is
// real antisymmetric and has the same |matrix elements| as J.
Matrix observable(const ModelSpec& m, int L) {
  const std::size_t dim = std::size_t{1} << L;
  Matrix A = Matrix::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s) {
    if (m.kind == ModelKind::IsingXY) {
      const int up = std::popcount(s);
      A(s, s) = 2.0 * up - L;
      continue;
    }
    for (int j = 0; j < L; ++j) {
      const int nb = (j + 1) % L;
      if (bit(s, nb) && !bit(s, j)) {
        // b+_j b_{j+1}: particle hops from j+1 to j
        A(s ^ (std::size_t{1} << j) ^ (std::size_t{1} << nb), s) += m.t;
      } else if (bit(s, j) && !bit(s, nb)) {
        A(s ^ (std::size_t{1} << j) ^ (std::size_t{1} << nb), s) -= m.t;
      }
    }
  }
  return A;
}

Matrix hamiltonian(const ModelSpec& m, int L) {
  return m.kind == ModelKind::IsingXY ? ising_hamiltonian(m, L) : xx_hamiltonian(m, L);
}

// Symmetry label used to break ground-state degeneracies: fermion parity for Ising,
// distance from half filling for XX.
bool preferred_sector(const ModelSpec& m, std::size_t s, int L) {
  const int pop = std::popcount(s);
  if (m.kind == ModelKind::IsingXY) return ((L - pop) % 2) == 0;
  return 2 * pop == L;
}

Vector initial_state(const ModelSpec& m, int L) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian(m, L));
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();
  Eigen::Index ground = 1;
  while (ground < evals.size() && evals(ground) - evals(0) < kDegeneracyTolerance) ++ground;
  if (ground == 1) return evecs.col(0);
  for (Eigen::Index c = 0; c < ground; ++c) {
    Vector v = evecs.col(c);
    for (Eigen::Index s = 0; s < v.size(); ++s)
      if (!preferred_sector(m, static_cast<std::size_t>(s), L)) v(s) = 0.0;
    if (v.norm() > 1e-6) return v / v.norm();
  }
  return evecs.col(0);
}

std::vector<double> flatten(const Matrix& M) {
  return std::vector<double>(M.data(), M.data() + M.size());
}

}  // namespace

double DenseCorrelator::total_weight() const {
  double acc = 0.0;
  for (const SpectralLine& l : lines) acc += l.weight;
  return acc;
}

double DenseCorrelator::chi_second(double omega, double eta) const {
  const BroadeningKernel K(KernelShape::Lorentzian, eta);
  double acc = 0.0;
  for (const SpectralLine& l : lines) acc += l.weight * (K(-omega - l.omega) - K(omega - l.omega));
  return acc;
}

std::vector<double> dense_hamiltonian(const ModelSpec& model, int L) {
  return flatten(hamiltonian(model, L));
}

std::vector<double> dense_observable(const ModelSpec& model, int L) {
  return flatten(observable(model, L));
}

DenseCorrelator dense_correlator_from_eigensystem(const std::vector<double>& energies,
                                                  const std::vector<double>& vectors,
                                                  const std::vector<double>& obs,
                                                  const std::vector<double>& psi0,
                                                  double eta, std::span<const double> omega_grid) {
  const auto dim = static_cast<Eigen::Index>(energies.size());
  if (static_cast<Eigen::Index>(vectors.size()) != dim * dim ||
      static_cast<Eigen::Index>(obs.size()) != dim * dim ||
      static_cast<Eigen::Index>(psi0.size()) != dim)
    throw Error(Errc::InvalidArgument, "eigensystem dimensions do not match");

  const Eigen::Map<const Matrix> V(vectors.data(), dim, dim);
  const Eigen::Map<const Matrix> A(obs.data(), dim, dim);
  const Eigen::Map<const Vector> psi(psi0.data(), dim);

  // Observable and initial state in the eigenbasis.
  const Matrix At = V.transpose() * A * V;
  const Vector c = V.transpose() * psi;

  // Group levels; energies are expected in ascending order.
  std::vector<Eigen::Index> start{0};
  for (Eigen::Index a = 1; a < dim; ++a)
    if (energies[a] - energies[a - 1] > kDegeneracyTolerance) start.push_back(a);
  start.push_back(dim);
  const std::size_t nlev = start.size() - 1;

  DenseCorrelator out;
  out.energies.resize(nlev);
  out.populations.resize(nlev);
  for (std::size_t n = 0; n < nlev; ++n) {
    out.energies[n] = energies[start[n]];
    out.populations[n] = c.segment(start[n], start[n + 1] - start[n]).squaredNorm();
  }

  for (std::size_t n = 0; n < nlev; ++n) {
    if (out.populations[n] < kLineCutoff) continue;
    const Eigen::Index b0 = start[n];
    const Eigen::Index nb = start[n + 1] - b0;
    // y = A P_n psi0 expressed in the eigenbasis
    const Vector y = At.middleCols(b0, nb) * c.segment(b0, nb);
    for (std::size_t m = 0; m < nlev; ++m) {
      const double w = y.segment(start[m], start[m + 1] - start[m]).squaredNorm();
      if (w > kLineCutoff) out.lines.push_back({out.energies[n] - out.energies[m], w});
    }
  }
  std::sort(out.lines.begin(), out.lines.end(),
            [](const SpectralLine& a, const SpectralLine& b) { return a.omega < b.omega; });

  out.spectrum.omega_grid.assign(omega_grid.begin(), omega_grid.end());
  out.spectrum.values.assign(omega_grid.size(), 0.0);
  out.spectrum.eta = eta;
  const BroadeningKernel K(KernelShape::Lorentzian, eta);
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    double acc = 0.0;
    for (const SpectralLine& l : out.lines) acc += l.weight * K(omega_grid[i] - l.omega);
    out.spectrum.values[i] = acc;
  }
  return out;
}

DenseCorrelator dense_ed_correlator(const QuenchSpec& quench, int L, double eta,
                                    std::span<const double> omega_grid) {
  quench.validate();
  if (L > kDenseMaxSites) throw Error(Errc::TooLarge, "dense diagonalization limited to L <= 10");
  if (L < 2) throw Error(Errc::InvalidArgument, "need at least two sites");

  const Vector psi = initial_state(quench.initial, L);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian(quench.final, L));
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Matrix evecs = solver.eigenvectors();

  DenseCorrelator out = dense_correlator_from_eigensystem(
      std::vector<double>(evals.data(), evals.data() + evals.size()), flatten(evecs),
      flatten(observable(quench.final, L)), std::vector<double>(psi.data(), psi.data() + psi.size()),
      eta, omega_grid);
  out.L = L;
  out.spectrum.L = L;
  return out;
}

}  // namespace qclock
