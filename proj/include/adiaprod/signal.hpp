#pragma once

// Time signals sampled on a uniform grid.
//
// A Signal<T> is either analytic (callable value and, optionally, derivative)
// or tabulated (grid samples only). Off-grid evaluation of tabulated signals
// uses four-point Lagrange interpolation; grid derivatives of tabulated
// signals use fourth-order finite-difference stencils. T is double, Complex,
// or Matrix.

#include "adiaprod/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace adiaprod {

/// Fourth-order derivative of uniformly sampled values. Falls back to
/// second order on grids with fewer than five points.
template <typename T>
std::vector<T> grid_derivative(const std::vector<T>& f, double dt) {
  const int n = static_cast<int>(f.size());
  std::vector<T> d;
  d.reserve(n);
  if (n < 5) {
    for (int k = 0; k < n; ++k) {
      if (k == 0)
        d.push_back(T((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt)));
      else if (k == n - 1)
        d.push_back(T((3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * dt)));
      else
        d.push_back(T((f[k + 1] - f[k - 1]) / (2.0 * dt)));
    }
    return d;
  }
  const double h = 12.0 * dt;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      d.push_back(T((-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / h));
    } else if (k == 1) {
      d.push_back(T((-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / h));
    } else if (k == n - 2) {
      d.push_back(T((3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / h));
    } else if (k == n - 1) {
      d.push_back(T((25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / h));
    } else {
      d.push_back(T((f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / h));
    }
  }
  return d;
}

/// Running integral I_k = int_0^{t_k} f, fourth order (piecewise cubic).
template <typename T>
std::vector<T> cumulative_integral(const std::vector<T>& f, double dt) {
  const int n = static_cast<int>(f.size());
  std::vector<T> out;
  out.reserve(n);
  out.push_back(T(0.0 * f[0]));
  if (n < 4) {
    for (int k = 1; k < n; ++k) out.push_back(T(out.back() + 0.5 * dt * (f[k - 1] + f[k])));
    return out;
  }
  const double w = dt / 24.0;
  for (int k = 0; k + 1 < n; ++k) {
    T step;
    if (k == 0)
      step = T(w * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]));
    else if (k == n - 2)
      step = T(w * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]));
    else
      step = T(w * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]));
    out.push_back(T(out.back() + step));
  }
  return out;
}

/// Four-point Lagrange interpolation of grid samples at an arbitrary time.
template <typename T>
T interpolate(const std::vector<T>& f, const Grid& grid, double t) {
  const int n = static_cast<int>(f.size());
  const double x = t / grid.dt();
  if (n < 4) {
    const int k = std::clamp(static_cast<int>(x), 0, n - 2);
    const double s = x - k;
    return T((1.0 - s) * f[k] + s * f[k + 1]);
  }
  const int k0 = std::clamp(static_cast<int>(std::floor(x)) - 1, 0, n - 4);
  const double s = x - k0;  // nodes at s = 0,1,2,3
  const double l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  const double l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
  const double l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
  const double l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
  return T(l0 * f[k0] + l1 * f[k0 + 1] + l2 * f[k0 + 2] + l3 * f[k0 + 3]);
}

template <typename T>
class Signal {
 public:
  using Fn = std::function<T(double)>;

  /// Analytic signal. Without a derivative callable, derivative_at uses a
  /// five-point central difference of value_at.
  static Signal analytic(const Grid& grid, Fn value, Fn derivative = {}) {
    Signal s(grid);
    s.value_fn_ = std::move(value);
    s.derivative_fn_ = std::move(derivative);
    s.samples_.reserve(grid.size());
    for (int k = 0; k < grid.size(); ++k) s.samples_.push_back(s.value_fn_(grid[k]));
    s.derivatives_.reserve(grid.size());
    for (int k = 0; k < grid.size(); ++k) s.derivatives_.push_back(s.derivative_at(grid[k]));
    return s;
  }

  static Signal tabulated(const Grid& grid, std::vector<T> samples) {
    if (static_cast<int>(samples.size()) != grid.size())
      throw NumericalError(Failure::GridMismatch, "sample count does not match grid");
    Signal s(grid);
    s.derivatives_ = grid_derivative(samples, grid.dt());
    s.samples_ = std::move(samples);
    return s;
  }

  static Signal tabulated(const Grid& grid, std::vector<T> samples, std::vector<T> derivatives) {
    if (static_cast<int>(samples.size()) != grid.size() ||
        static_cast<int>(derivatives.size()) != grid.size())
      throw NumericalError(Failure::GridMismatch, "sample count does not match grid");
    Signal s(grid);
    s.samples_ = std::move(samples);
    s.derivatives_ = std::move(derivatives);
    return s;
  }

  const Grid& grid() const noexcept { return grid_; }
  bool is_tabulated() const noexcept { return !value_fn_; }

  const T& sample(int k) const { return samples_[k]; }
  const T& derivative_sample(int k) const { return derivatives_[k]; }
  const std::vector<T>& samples() const noexcept { return samples_; }
  const std::vector<T>& derivative_samples() const noexcept { return derivatives_; }

  T value_at(double t) const {
    if (value_fn_) return value_fn_(t);
    const int k = grid_.index_of(t);
    if (k >= 0) return samples_[k];
    return interpolate(samples_, grid_, t);
  }

  T derivative_at(double t) const {
    if (derivative_fn_) return derivative_fn_(t);
    if (value_fn_) {
      const double h = 1e-3;
      return T((value_fn_(t - 2 * h) - 8.0 * value_fn_(t - h) + 8.0 * value_fn_(t + h) -
                value_fn_(t + 2 * h)) /
               (12.0 * h));
    }
    const int k = grid_.index_of(t);
    if (k >= 0) return derivatives_[k];
    return interpolate(derivatives_, grid_, t);
  }

  /// Largest central-difference mismatch against the supplied derivative on
  /// interior grid points (zero when no derivative was supplied).
  double derivative_consistency() const;

 private:
  explicit Signal(const Grid& grid) : grid_(grid) {}

  Grid grid_;
  Fn value_fn_;
  Fn derivative_fn_;
  std::vector<T> samples_;
  std::vector<T> derivatives_;
};

namespace detail {
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
inline double magnitude(const Matrix& v) { return v.norm(); }
}  // namespace detail

template <typename T>
double Signal<T>::derivative_consistency() const {
  if (!derivative_fn_ || !value_fn_) return 0.0;
  const double h = grid_.dt();
  double worst = 0.0;
  for (int k = 1; k + 1 < grid_.size(); ++k) {
    const T fd = T((value_fn_(grid_[k] + h) - value_fn_(grid_[k] - h)) / (2.0 * h));
    worst = std::max(worst, detail::magnitude(T(fd - derivatives_[k])));
  }
  return worst;
}

using HamiltonianSignal = Signal<Matrix>;
using ScalarSignal = Signal<Complex>;
using RealSignal = Signal<double>;

/// Throws InconsistentDerivative when a user-supplied derivative disagrees
/// with central differences by more than max(abs_tol, c * dt^2).
template <typename T>
void validate_derivative(const Signal<T>& s, double abs_tol = 1e-6, double c = 10.0) {
  const double dt = s.grid().dt();
  const double bound = std::max(abs_tol, c * dt * dt);
  const double mismatch = s.derivative_consistency();
  if (mismatch > bound)
    throw NumericalError(Failure::InconsistentDerivative,
                         "derivative disagrees with central differences by " + std::to_string(mismatch));
}

/// Supremum over the grid of the Frobenius norm.
double sup_norm(const HamiltonianSignal& h);

}  // namespace adiaprod
