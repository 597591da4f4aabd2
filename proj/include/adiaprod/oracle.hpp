#pragma once

// Brute-force reference propagator: classical RK4 on i dU/dt = H U with
// several substeps per grid step, plus table comparison helpers.

#include "adiaprod/expansion.hpp"

#include <vector>

namespace adiaprod::oracle {

struct OracleConfig {
  int substeps = 4;
};

/// U(t_k) for every grid point, U(0) = identity. Off-grid values of H come
/// from value_at (cubic interpolation for tabulated signals).
PropagatorTable propagate(const HamiltonianSignal& h, const OracleConfig& cfg = {});

struct Comparison {
  double sup_fro = 0.0;
  double final_fro = 0.0;
  std::vector<double> per_t;
};

/// Throws GridMismatch when the tables live on different grids.
Comparison compare(const PropagatorTable& a, const PropagatorTable& b);

struct ConvergenceReport {
  double order = 0.0;
  // sup ||U_s - U_2s|| / sup ||U_2s - U_4s||
  double ratio = 0.0;
  double coarse_error = 0.0;
  double fine_error = 0.0;
  // Both differences at rounding level: the integrator is exact here.
  bool exact = false;
};

/// Self-Richardson estimate from substep counts s, 2s, 4s.
ConvergenceReport convergence_order(const HamiltonianSignal& h, const OracleConfig& cfg = {});

}  // namespace adiaprod::oracle
