#pragma once

// Closed-form machinery for traceless two-level Hamiltonians
//
//   H(t) = [[a, b], [c, -a]],   E = sqrt(a^2 + b c).
//
// Eigenbasis chart: psi_1 = (-b, a+E) for -E, psi_2 = (a+E, c) for +E, with
// duals normalised by N = 2E(a+E). All time integrals use the fourth-order
// cumulative rule on the coefficient grid.

#include "adiaprod/expansion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace adiaprod::twolevel {

const Matrix& pauli(int i);

/// exp(-i phi sigma_i) sigma_j exp(i phi sigma_i), i != j, 1-based indices.
Matrix pauli_conjugate(int i, int j, Complex phi);

struct Coeffs {
  ScalarSignal a, b, c;

  const Grid& grid() const { return a.grid(); }
  Matrix matrix(int k) const;
  /// Analytic when all three coefficients are, tabulated otherwise.
  HamiltonianSignal hamiltonian() const;

  static Coeffs tabulated(const Grid& g, std::vector<Complex> a, std::vector<Complex> b, std::vector<Complex> c);
};

inline constexpr double kDefaultChartTol = 1e-8;
inline constexpr double kDefaultClassTol = 1e-8;

/// E on the grid: principal root at t = 0 (Re >= 0, ties Im >= 0), then the
/// sign closest to the previous point. Throws LevelCrossing when |E| drops
/// below eps_deg.
std::vector<Complex> energy(const Coeffs& c, double eps_deg = kDefaultDegeneracyTol);

struct Detraced {
  Coeffs coeffs;
  // exp(i int_0^t tr H / 2); U_H = phase^-1 * U_traceless
  std::vector<Complex> phase;
};

Detraced detrace(const HamiltonianSignal& h);

struct EigenData {
  Complex energy;
  Vector psi1, psi2, phi1, phi2;
  Complex norm;
};

/// Chart eigenvectors at one point; throws ChartSingularity if
/// |a + E| <= eps_chart |E|.
EigenData eigendata(Complex a, Complex b, Complex c, Complex e, double eps_chart = kDefaultChartTol);
EigenData eigendata(const Coeffs& c, const std::vector<Complex>& e, int k, double eps_chart = kDefaultChartTol);

struct Dynamical {
  std::vector<Complex> e;      // E
  std::vector<Complex> e_dot;  // dE/dt
  std::vector<Complex> eta;    // 2 int E
  std::vector<Complex> alpha;
  std::vector<Complex> k1, k2;
};

Dynamical dynamical_data(const Coeffs& c, double eps_chart = kDefaultChartTol);

struct XiZeta {
  std::vector<Complex> xi, zeta;
};

XiZeta xi_zeta(const Coeffs& c, const Dynamical& d);

/// Coefficients of H^(1) from the t = 0 data and xi, zeta.
Coeffs transformed_coeffs(const Coeffs& c, const Dynamical& d, const XiZeta& xz);

/// U^(0) from the chart eigenvectors and K^1, K^2.
AdiabaticPropagator adiabatic_propagator(const Coeffs& c, const Dynamical& d);

struct ClassTag {
  enum class Kind { Class1, Class2, Class3, Generic };
  Kind kind = Kind::Generic;
  Complex parameter{0.0, 0.0};  // mu for Class1, nu for Class2

  std::string to_string() const;
};

ClassTag classify(const Coeffs& c, double eps_class = kDefaultClassTol);

struct Class3Step {
  std::vector<Complex> f;     // i E / b
  Complex f0;
  std::vector<Complex> eta;   // 2 int E
  std::vector<Complex> e1;    // E^(1) = i f' / (2 f)
  Coeffs h1;                  // a1 = E1 cos eta, b1 = E1 sin eta / f0, c1 = f0 E1 sin eta
  // b(0) == c(0): H^(1) = E1 exp(i eta sigma_1/2) sigma_3 exp(-i eta sigma_1/2)
  bool pauli_form = false;
};

/// Throws VanishingOffDiagonal when b or c vanishes on the grid,
/// std::invalid_argument when a is not identically zero.
Class3Step class3_step(const Coeffs& c, double eps_deg = kDefaultDegeneracyTol);

struct Rephased {
  Coeffs coeffs;               // zero diagonal
  std::vector<Complex> gamma;  // 2 int a^(1)
  PropagatorTable gauge;       // exp(i int a^(1) sigma_3)
};

Rephased rephase_to_class3(const Coeffs& h1);

struct ModifiedExpansion {
  // U_0, g_1^-1, U_1, g_2^-1, ..., U_{L-1}
  std::vector<PropagatorTable> factors;
  PropagatorTable product;
  // eta_j for j = 0..L-1 and h_l for l = 1..L
  std::vector<std::vector<Complex>> eta;
  std::vector<std::vector<Complex>> h;
  std::vector<double> sup_h;
};

/// L >= 1 factors of the modified (rephased) expansion of a Class-3 input.
ModifiedExpansion modified_expansion(const Coeffs& c, int factors);

struct Reduction {
  Coeffs class3;                  // H'' = [[0, a' e^{i eta'}], [a' e^{-i eta'}, 0]]
  std::vector<Complex> beta;      // int alpha_2
  std::vector<Complex> eta_prime; // 2 int a'
  std::vector<Complex> trace_phase;
  PropagatorTable g1;             // exp(i beta sigma_2)
  PropagatorTable g2;             // exp(i eta' sigma_3 / 2)

  /// U of the original Hamiltonian from U of H''.
  PropagatorTable reassemble(const PropagatorTable& u_class3) const;
};

Reduction reduce_to_class3(const HamiltonianSignal& h);

}  // namespace adiaprod::twolevel
