#pragma once

// Spin-1 quadrupole Stark Hamiltonian with the field in the 1-2 plane:
//
//   H = (lambda r^2 / 2) [[1, 0, e^{-2i theta}], [0, 2, 0], [e^{2i theta}, 0, 1]]
//
// Levels E_1 = 0 (simple) and E_2 = lambda r^2 (double). The Sigma matrices
// are the Pauli matrices in the (0 + 1/2) representation spanned by the t = 0
// eigenvectors; for theta_0 = 0 they are the plain matrices below.

#include "adiaprod/oracle.hpp"

#include <utility>
#include <vector>

namespace adiaprod::stark {

struct Scenario {
  double lambda = 1.0;
  RealSignal r;
  RealSignal theta;  // unwrapped
};

/// In-plane field components (E_1, E_2) = r (sin theta, cos theta).
std::pair<double, double> polar_to_field(double r, double theta);
std::pair<double, double> field_to_polar(double e1, double e2);

/// Sigma_i conjugated by diag(1, 1, e^{2i theta0}).
Matrix sigma(int i, double theta0 = 0.0);

/// Throws ZeroField when r(t) <= 0.
Matrix build_hamiltonian(const Scenario& s, double t);
HamiltonianSignal hamiltonian(const Scenario& s);

/// Closed-form orthonormal eigenvectors, level 0 first.
BiorthoEigensystem eigensystem(const Scenario& s, double t);

/// rho(t) = lambda int_0^t r^2 on the grid.
std::vector<double> rho(const Scenario& s);

struct KFactors {
  std::vector<Complex> k1;
  std::vector<Matrix> k2;
};

KFactors dynamical_factors(const Scenario& s);

PropagatorTable adiabatic_propagator(const Scenario& s);

/// H^(1) = -theta_dot (sin rho Sigma_2 + cos rho Sigma_3).
HamiltonianSignal h1(const Scenario& s);

/// H^(1)' = (lambda r^2 / 2) Sigma_1 - theta_dot Sigma_3, reached with the
/// gauge exp(-i rho Sigma_1 / 2).
HamiltonianSignal rotating_frame(const Scenario& s);

/// exp(i rho Sigma_1 / 2): U of H^(1) = this * U of H^(1)'.
PropagatorTable rotating_gauge_inverse(const Scenario& s);

inline constexpr double kDefaultExactTol = 1e-10;

/// c = theta_dot(0) / r(0)^2.
double estimate_c(const Scenario& s);

/// sup |theta_dot - c r^2| / sup r^2.
double condition_residual(const Scenario& s, double c);

/// U = U^(0) exp(i rho Sigma_1/2) exp(-i (lambda Sigma_1/2 - c Sigma_3) int r^2).
/// Throws ConditionViolated unless theta_dot = c r^2 within eps_exact.
PropagatorTable exact_solve(const Scenario& s, double c, double eps_exact = kDefaultExactTol);
/// exact_solve with c = estimate_c(s).
PropagatorTable exact_solve_estimated(const Scenario& s, double eps_exact = kDefaultExactTol);

}  // namespace adiaprod::stark
