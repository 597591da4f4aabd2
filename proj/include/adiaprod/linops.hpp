#pragma once

// Small dense complex linear algebra: Frobenius norm, matrix exponential and
// the biorthonormal eigendecomposition of a diagonalizable matrix.

#include "adiaprod/core.hpp"

#include <vector>

namespace adiaprod {

template <typename Derived>
double fro_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

Matrix matrix_exp(const Matrix& m);

/// One eigenvalue level. Columns of `right` are psi_{n,a}, columns of `left`
/// are phi_{n,a}; <phi_{n,a}|psi_{n,b}> = delta_ab.
struct Level {
  Complex eigenvalue;
  Matrix right;
  Matrix left;

  int degeneracy() const noexcept { return static_cast<int>(right.cols()); }
};

struct BiorthoEigensystem {
  std::vector<Level> levels;

  int dim() const noexcept { return levels.empty() ? 0 : static_cast<int>(levels.front().right.rows()); }

  /// All right (resp. left) vectors as columns, level by level.
  Matrix right_matrix() const;
  Matrix left_matrix() const;

  /// sum_n E_n sum_a |psi_n,a><phi_n,a|
  Matrix reconstruct() const;
  /// max |<phi_m,b|psi_n,a> - delta|
  double biorthonormality_error() const;
  /// || sum |psi><phi| - 1 ||_F
  double completeness_error() const;
};

inline constexpr double kDefaultDegeneracyTol = 1e-8;
inline constexpr double kDefaultBiorthoTol = 1e-9;

/// Eigenvalues closer than eps_deg * max(1, |E|) are grouped into one level.
/// Throws DefectiveMatrix when a group has fewer independent eigenvectors than
/// its multiplicity, NonConvergence when the Schur iteration fails.
BiorthoEigensystem bi_eigensystem(const Matrix& m, double eps_deg = kDefaultDegeneracyTol);

/// Unitary factor W of the polar decomposition m = W P.
Matrix polar_unitary(const Matrix& m);

}  // namespace adiaprod
