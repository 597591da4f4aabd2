#pragma once

// Generalized adiabatic product expansion on a uniform grid.
//
// Pipeline for one adiabatic canonical transformation:
//   track_levels  -> eigen-data along the grid with a continuous level order
//                    and gauge-aligned bases
//   coupling_matrices -> A^{nm}_{cd}(t) = i <phi_n,c| d/dt |psi_m,d>
//   dynamical_factor  -> K^n(t) = exp(-i int E_n) * T exp(i int A^{nn})
//   adiabatic_propagator -> U^(0)(t) and its inverse
//   adiabatic_step    -> (U^(0), H^(1))
// expand() iterates adiabatic_step until the transformed Hamiltonian
// vanishes, repeats an earlier iterate, or the factor cap is reached.

#include "adiaprod/linops.hpp"
#include "adiaprod/signal.hpp"

#include <string>
#include <vector>

namespace adiaprod {

/// Time-indexed table of evolution-operator values; values[0] is the identity.
struct PropagatorTable {
  Grid grid;
  std::vector<Matrix> values;

  PropagatorTable(const Grid& g, std::vector<Matrix> v) : grid(g), values(std::move(v)) {}

  int dim() const { return static_cast<int>(values.front().rows()); }
  const Matrix& operator[](int k) const { return values[k]; }

  static PropagatorTable identity(const Grid& g, int dim);
  PropagatorTable inverse() const;
};

/// Pointwise product a(t_k) * b(t_k).
PropagatorTable operator*(const PropagatorTable& a, const PropagatorTable& b);

struct LevelTrack {
  Grid grid;
  std::vector<BiorthoEigensystem> points;

  int level_count() const { return static_cast<int>(points.front().levels.size()); }
  int degeneracy(int n) const { return points.front().levels[n].degeneracy(); }
  int dim() const { return points.front().dim(); }
};

/// Throws LevelCrossing when two levels merge, DegeneracyChange when a level
/// changes multiplicity.
LevelTrack track_levels(const HamiltonianSignal& h, double eps_deg = kDefaultDegeneracyTol);

/// blocks[n][m] is the N_n x N_m matrix A^{nm}(t).
struct Couplings {
  std::vector<std::vector<Matrix>> blocks;
};

/// Couplings from finite differences of the aligned track.
Couplings coupling_matrices(const LevelTrack& track, int k);
std::vector<Couplings> coupling_matrices(const LevelTrack& track);

/// Inter-level couplings from the derivative of the Hamiltonian:
/// A^{nm} = i <phi_n|dH/dt|psi_m> / (E_m - E_n), n != m. Diagonal blocks are
/// left empty.
Couplings derivative_couplings(const LevelTrack& track, const HamiltonianSignal& h, int k);

/// K^n(t_k) for one level.
std::vector<Matrix> dynamical_factor(const LevelTrack& track, const std::vector<Couplings>& couplings, int level);

struct AdiabaticPropagator {
  PropagatorTable forward;
  PropagatorTable inverse;
};

/// U^(0)(t) = sum_n sum_ab K^n_ab |psi_n,a;t><phi_n,b;0| and the inverse
/// built from K^n^-1. k_factors[n][k] is K^n(t_k).
AdiabaticPropagator adiabatic_propagator(const LevelTrack& track, const std::vector<std::vector<Matrix>>& k_factors);

/// H'(t) = g H g^-1 - i g d/dt g^-1 on the grid, with d/dt g^-1 from finite
/// differences of the tabulated inverse.
HamiltonianSignal canonical_transform(const HamiltonianSignal& h, const PropagatorTable& g);
HamiltonianSignal canonical_transform(const HamiltonianSignal& h, const PropagatorTable& g,
                                      const PropagatorTable& g_inverse);

struct ExpansionOptions {
  double eps_deg = kDefaultDegeneracyTol;
  // Relative to 1 + sup_t ||H^(0)(t)||_F.
  double eps_trunc = 1e-9;
  double eps_cycle = 1e-7;
  int max_factors = 6;
  int cycle_depth = 4;
  // Relative residual below which H(t) = s(t) M counts as a fixed direction.
  double eps_direction = 1e-9;
};

struct StepResult {
  PropagatorTable propagator;
  PropagatorTable inverse;
  HamiltonianSignal next;
  // sup_t of || sum-formula H' - canonical_transform H' ||_F
  double route_discrepancy = 0.0;
  bool fixed_direction = false;
};

StepResult adiabatic_step(const HamiltonianSignal& h, const ExpansionOptions& opts = {});

struct ExpansionStatus {
  enum class Kind { Terminated, Truncated, Cyclic };
  Kind kind = Kind::Truncated;
  int value = 0;

  std::string to_string() const;
  friend bool operator==(const ExpansionStatus&, const ExpansionStatus&) = default;
};

struct ProductExpansion {
  std::vector<PropagatorTable> factors;
  // residual_norms[l] = sup_t ||H^(l+1)(t)||_F, one per factor.
  std::vector<double> residual_norms;
  ExpansionStatus status;
  // H^(0), H^(1), ... in computation order.
  std::vector<HamiltonianSignal> hamiltonians;
  std::vector<double> route_discrepancies;
};

ProductExpansion expand(const HamiltonianSignal& h, const ExpansionOptions& opts = {});

/// U^(0)(t) U^(1)(t) ... for the first `factors` factors (all when negative).
Matrix assemble(const ProductExpansion& e, double t, int factors = -1);
PropagatorTable assemble(const ProductExpansion& e, int factors = -1);

/// Largest || i dU/dt - H U ||_F over the grid, dU/dt by finite differences.
double schrodinger_residual(const HamiltonianSignal& h, const PropagatorTable& u);

}  // namespace adiaprod
