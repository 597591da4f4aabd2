#pragma once

// x'' + omega(t)^2 x = 0 as the Class-3 two-level system
// a = 0, b = i, c = -i omega^2 acting on (x, v).

#include "adiaprod/oracle.hpp"
#include "adiaprod/twolevel.hpp"

#include <vector>

namespace adiaprod::oscillator {

struct Scenario {
  RealSignal omega;
  double x0 = 1.0;
  double v0 = 0.0;
};

/// Throws NonpositiveFrequency unless omega > 0 on the grid.
twolevel::Coeffs to_twolevel(const Scenario& s);

struct Method {
  enum class Kind { Product, Oracle, Dyson };
  Kind kind = Kind::Oracle;
  int order = 2;  // factors for Product, terms for Dyson
};

struct Trajectory {
  PropagatorTable propagator;
  std::vector<double> x, v;
};

Trajectory solve_trajectory(const Scenario& s, const Method& m, const oracle::OracleConfig& cfg = {});

/// Applies U(t) to (x0, v0).
Trajectory trajectory_from(const PropagatorTable& u, double x0, double v0);

/// H^(1) of the omega_0 = 1 normalised system in the eta variable:
/// H~(eta) = (i omega'/2 omega)(sin eta sigma_1 + cos eta sigma_3),
/// omega' = d omega/d eta = omega_dot / (2 omega).
struct EtaHamiltonian {
  Grid grid;                     // underlying t grid
  std::vector<double> eta;       // 2 int omega, strictly increasing
  std::vector<double> omega_prime;
  std::vector<Matrix> h_tilde;   // per grid point, in the eta variable
  std::vector<Matrix> h1;        // H~ * d eta/dt, in the t variable
  double omega0 = 1.0;
};

EtaHamiltonian eta_hamiltonian(const Scenario& s);

/// Closed-form U^(0) of the oscillator system.
PropagatorTable adiabatic_propagator(const Scenario& s);

/// Time-ordered series for H~: T_0 = 1, T_k(eta) = -i int_0^eta H~ T_{k-1}.
/// Returns sum_{k<=n} T_k at every grid point (normalised frame).
std::vector<Matrix> dyson_series(const EtaHamiltonian& e, int n);

inline constexpr int kMaxDysonTerms = 6;

/// U^(0) times the n-term Dyson propagator of H^(1), in the physical frame.
PropagatorTable dyson_propagator(const Scenario& s, int n);

/// X = int |H~| d eta.
double dyson_generator_norm(const EtaHamiltonian& e);

/// Bound e^X X^(n+1) / (n+1)! on the truncated tail.
double dyson_remainder_bound(const EtaHamiltonian& e, int n);

}  // namespace adiaprod::oscillator
