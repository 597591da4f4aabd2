#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adiaprod {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Named numerical failures. The CLI prints failure_name() on standard error.
enum class Failure {
  DefectiveMatrix,
  NonConvergence,
  LevelCrossing,
  DegeneracyChange,
  SingularK,
  SingularTransform,
  ChartSingularity,
  VanishingOffDiagonal,
  NonpositiveFrequency,
  ZeroField,
  ConditionViolated,
  GridMismatch,
  InconsistentDerivative,
  InvariantViolation,
};

std::string_view failure_name(Failure f) noexcept;

class NumericalError : public std::runtime_error {
 public:
  NumericalError(Failure f, const std::string& what)
      : std::runtime_error(std::string(failure_name(f)) + ": " + what), failure_(f) {}

  Failure failure() const noexcept { return failure_; }

 private:
  Failure failure_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform time grid t_k = k * tau / steps, k = 0..steps.
class Grid {
 public:
  Grid(double tau, int steps);

  double tau() const noexcept { return tau_; }
  int steps() const noexcept { return steps_; }
  int size() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return tau_ / steps_; }
  double operator[](int k) const noexcept { return k == steps_ ? tau_ : k * dt(); }

  // Index of t if it lies on the grid (within 1e-9 dt), otherwise -1.
  int index_of(double t) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.steps_ == b.steps_ && a.tau_ == b.tau_;
  }

 private:
  double tau_;
  int steps_;
};

}  // namespace adiaprod
