#include "adiaprod/linops.hpp"
#include "adiaprod/signal.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adiaprod {

std::string_view failure_name(Failure f) noexcept {
  switch (f) {
    case Failure::DefectiveMatrix: return "DefectiveMatrix";
    case Failure::NonConvergence: return "NonConvergence";
    case Failure::LevelCrossing: return "LevelCrossing";
    case Failure::DegeneracyChange: return "DegeneracyChange";
    case Failure::SingularK: return "SingularK";
    case Failure::SingularTransform: return "SingularTransform";
    case Failure::ChartSingularity: return "ChartSingularity";
    case Failure::VanishingOffDiagonal: return "VanishingOffDiagonal";
    case Failure::NonpositiveFrequency: return "NonpositiveFrequency";
    case Failure::ZeroField: return "ZeroField";
    case Failure::ConditionViolated: return "ConditionViolated";
    case Failure::GridMismatch: return "GridMismatch";
    case Failure::InconsistentDerivative: return "InconsistentDerivative";
    case Failure::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

Grid::Grid(double tau, int steps) : tau_(tau), steps_(steps) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("grid horizon must be positive");
  if (steps < 2) throw ConfigError("grid needs at least 3 points");
}

int Grid::index_of(double t) const noexcept {
  const double x = t / dt();
  const double k = std::round(x);
  if (k < 0 || k > steps_ || std::abs(x - k) > 1e-9) return -1;
  return static_cast<int>(k);
}

double sup_norm(const HamiltonianSignal& h) {
  double s = 0.0;
  for (const auto& m : h.samples()) s = std::max(s, m.norm());
  return s;
}

Matrix matrix_exp(const Matrix& m) {
  if (!m.allFinite()) throw std::invalid_argument("matrix_exp: non-finite entries");
  return m.exp();
}

Matrix polar_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Matrix BiorthoEigensystem::right_matrix() const {
  Matrix r(dim(), dim());
  int col = 0;
  for (const auto& lv : levels) {
    r.middleCols(col, lv.degeneracy()) = lv.right;
    col += lv.degeneracy();
  }
  return r;
}

Matrix BiorthoEigensystem::left_matrix() const {
  Matrix l(dim(), dim());
  int col = 0;
  for (const auto& lv : levels) {
    l.middleCols(col, lv.degeneracy()) = lv.left;
    col += lv.degeneracy();
  }
  return l;
}

Matrix BiorthoEigensystem::reconstruct() const {
  Matrix m = Matrix::Zero(dim(), dim());
  for (const auto& lv : levels) m += lv.eigenvalue * lv.right * lv.left.adjoint();
  return m;
}

double BiorthoEigensystem::biorthonormality_error() const {
  const Matrix overlap = left_matrix().adjoint() * right_matrix();
  return (overlap - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

double BiorthoEigensystem::completeness_error() const {
  return (right_matrix() * left_matrix().adjoint() - Matrix::Identity(dim(), dim())).norm();
}

namespace {

bool close(Complex a, Complex b, double eps) { return std::abs(a - b) <= eps * std::max(1.0, std::abs(a)); }

// Roots of det(m - x) for 2x2, polished by one Newton step.
std::vector<Complex> quadratic_eigenvalues(const Matrix& m) {
  const Complex tr = m.trace();
  const Complex det = m.determinant();
  const Complex half = 0.5 * tr;
  const Complex disc = std::sqrt(0.25 * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(1, 0));
  std::vector<Complex> roots{half - disc, half + disc};
  for (auto& x : roots) {
    const Complex p = x * x - tr * x + det;
    const Complex dp = 2.0 * x - tr;
    if (std::abs(dp) > 1e-8 * std::max(1.0, std::abs(x))) x -= p / dp;
  }
  return roots;
}

Vector quadratic_eigenvector(const Matrix& m, Complex x) {
  Vector u(2), v(2);
  u << m(0, 1), x - m(0, 0);
  v << x - m(1, 1), m(1, 0);
  Vector w = u.norm() >= v.norm() ? u : v;
  return w / w.norm();
}

// Orthonormal basis of ker(m - x) of the requested dimension.
Matrix null_space(const Matrix& m, Complex x, int dim, double scale) {
  const int n = static_cast<int>(m.rows());
  Eigen::JacobiSVD<Matrix> svd(m - x * Matrix::Identity(n, n), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();  // descending
  const double tol = 1e-7 * scale;
  if (sv(n - dim) > tol)
    throw NumericalError(Failure::DefectiveMatrix, "eigenspace dimension below multiplicity");
  return svd.matrixV().rightCols(dim);
}

}  // namespace

BiorthoEigensystem bi_eigensystem(const Matrix& m, double eps_deg) {
  if (m.rows() != m.cols() || m.rows() < 1) throw std::invalid_argument("bi_eigensystem: square matrix required");
  if (!m.allFinite()) throw std::invalid_argument("bi_eigensystem: non-finite entries");
  if (!(eps_deg > 0.0)) throw std::invalid_argument("bi_eigensystem: eps_deg must be positive");
  const int n = static_cast<int>(m.rows());
  const double scale = std::max(1.0, m.norm());

  std::vector<Complex> values;
  if (n == 2) {
    values = quadratic_eigenvalues(m);
  } else if (n == 1) {
    values = {m(0, 0)};
  } else {
    Eigen::ComplexEigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) throw NumericalError(Failure::NonConvergence, "Schur iteration failed");
    values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  }
  std::sort(values.begin(), values.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  // Single-linkage clustering of the sorted eigenvalues.
  std::vector<int> group(n);
  std::iota(group.begin(), group.end(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (close(values[i], values[j], eps_deg)) {
        const int from = group[j], to = group[i];
        for (auto& g : group)
          if (g == from) g = to;
      }

  BiorthoEigensystem sys;
  Matrix right(n, n);
  int col = 0;
  std::vector<bool> done(n, false);
  for (int i = 0; i < n; ++i) {
    if (done[i]) continue;
    Complex mean = 0.0;
    int count = 0;
    for (int j = 0; j < n; ++j)
      if (group[j] == group[i]) {
        mean += values[j];
        done[j] = true;
        ++count;
      }
    mean /= static_cast<double>(count);

    Matrix vecs;
    if (n == 2 && count == 1) {
      vecs = quadratic_eigenvector(m, mean);
    } else if (n == 2) {
      if ((m - mean * Matrix::Identity(2, 2)).norm() > 1e-7 * scale)
        throw NumericalError(Failure::DefectiveMatrix, "2x2 degenerate eigenvalue with one eigenvector");
      vecs = Matrix::Identity(2, 2);
    } else {
      vecs = null_space(m, mean, count, scale);
    }
    right.middleCols(col, count) = vecs;
    sys.levels.push_back(Level{mean, vecs, Matrix()});
    col += count;
  }

  Eigen::FullPivLU<Matrix> lu(right);
  if (lu.rank() < n || std::abs(lu.determinant()) < 1e-10)
    throw NumericalError(Failure::DefectiveMatrix, "eigenvectors are not independent");
  const Matrix left = lu.inverse().adjoint();
  col = 0;
  for (auto& lv : sys.levels) {
    lv.left = left.middleCols(col, lv.degeneracy());
    col += lv.degeneracy();
  }
  return sys;
}

}  // namespace adiaprod
