#include "adiaprod/stark.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adiaprod::stark {

namespace {

Matrix frame(double theta0) {
  Matrix d = Matrix::Identity(3, 3);
  d(2, 2) = std::exp(2.0 * kI * theta0);
  return d;
}

Matrix plain_sigma(int i) {
  Matrix m = Matrix::Zero(3, 3);
  switch (i) {
    case 1:
      m(0, 2) = 1.0;
      m(2, 0) = 1.0;
      break;
    case 2:
      m(0, 2) = -kI;
      m(2, 0) = kI;
      break;
    case 3:
      m(0, 0) = 1.0;
      m(2, 2) = -1.0;
      break;
    default: throw std::invalid_argument("Sigma index must be 1, 2 or 3");
  }
  return m;
}

Matrix shape(double theta) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 2.0;
  m(2, 2) = 1.0;
  m(0, 2) = std::exp(-2.0 * kI * theta);
  m(2, 0) = std::exp(2.0 * kI * theta);
  return m;
}

Matrix shape_derivative(double theta, double theta_dot) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 2) = -2.0 * kI * theta_dot * std::exp(-2.0 * kI * theta);
  m(2, 0) = 2.0 * kI * theta_dot * std::exp(2.0 * kI * theta);
  return m;
}

void check_field(double r, double t) {
  if (!(r > 0.0)) throw NumericalError(Failure::ZeroField, "field magnitude vanishes at t=" + std::to_string(t));
}

void check_field(const Scenario& s) {
  for (int k = 0; k < s.r.grid().size(); ++k) check_field(s.r.sample(k), s.r.grid()[k]);
}

}  // namespace

std::pair<double, double> polar_to_field(double r, double theta) { return {r * std::sin(theta), r * std::cos(theta)}; }

std::pair<double, double> field_to_polar(double e1, double e2) { return {std::hypot(e1, e2), std::atan2(e1, e2)}; }

Matrix sigma(int i, double theta0) {
  const Matrix d = frame(theta0);
  return d * plain_sigma(i) * d.adjoint();
}

Matrix build_hamiltonian(const Scenario& s, double t) {
  const double r = s.r.value_at(t);
  check_field(r, t);
  return 0.5 * s.lambda * r * r * shape(s.theta.value_at(t));
}

HamiltonianSignal hamiltonian(const Scenario& s) {
  const Grid& g = s.r.grid();
  check_field(s);
  if (!s.r.is_tabulated() && !s.theta.is_tabulated()) {
    auto value = [s](double t) { return build_hamiltonian(s, t); };
    auto deriv = [s](double t) {
      const double r = s.r.value_at(t), dr = s.r.derivative_at(t), th = s.theta.value_at(t);
      return Matrix(s.lambda * r * dr * shape(th) + 0.5 * s.lambda * r * r * shape_derivative(th, s.theta.derivative_at(t)));
    };
    return HamiltonianSignal::analytic(g, value, deriv);
  }
  std::vector<Matrix> v(g.size()), d(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double r = s.r.sample(k), dr = s.r.derivative_sample(k), th = s.theta.sample(k);
    v[k] = 0.5 * s.lambda * r * r * shape(th);
    d[k] = s.lambda * r * dr * shape(th) + 0.5 * s.lambda * r * r * shape_derivative(th, s.theta.derivative_sample(k));
  }
  return HamiltonianSignal::tabulated(g, std::move(v), std::move(d));
}

BiorthoEigensystem eigensystem(const Scenario& s, double t) {
  const double r = s.r.value_at(t);
  check_field(r, t);
  const Complex ph = std::exp(2.0 * kI * s.theta.value_at(t));
  const double root = 1.0 / std::sqrt(2.0);
  Matrix psi1(3, 1), psi2 = Matrix::Zero(3, 2);
  psi1 << -root, 0.0, root * ph;
  psi2(0, 0) = root;
  psi2(2, 0) = root * ph;
  psi2(1, 1) = 1.0;
  BiorthoEigensystem sys;
  sys.levels.push_back(Level{0.0, psi1, psi1});
  sys.levels.push_back(Level{s.lambda * r * r, psi2, psi2});
  return sys;
}

std::vector<double> rho(const Scenario& s) {
  const Grid& g = s.r.grid();
  std::vector<double> r2(g.size());
  for (int k = 0; k < g.size(); ++k) r2[k] = s.lambda * s.r.sample(k) * s.r.sample(k);
  return cumulative_integral(r2, g.dt());
}

KFactors dynamical_factors(const Scenario& s) {
  const Grid& g = s.r.grid();
  const std::vector<double> p = rho(s);
  const double theta0 = s.theta.sample(0);
  KFactors kf;
  for (int k = 0; k < g.size(); ++k) {
    const Complex turn = std::exp(-kI * (s.theta.sample(k) - theta0));
    kf.k1.push_back(turn);
    Matrix k2 = Matrix::Zero(2, 2);
    k2(0, 0) = turn;
    k2(1, 1) = 1.0;
    kf.k2.push_back(std::exp(-kI * p[k]) * k2);
  }
  return kf;
}

PropagatorTable adiabatic_propagator(const Scenario& s) {
  check_field(s);
  const Grid& g = s.r.grid();
  const std::vector<double> p = rho(s);
  const double theta0 = s.theta.sample(0);
  std::vector<Matrix> u(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double th = s.theta.sample(k);
    const Complex dyn = std::exp(-kI * p[k]);
    const Complex minus = std::exp(-kI * (th - theta0));
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 0.5 * (1.0 + dyn) * minus;
    m(0, 2) = 0.5 * (-1.0 + dyn) * std::exp(-kI * (th + theta0));
    m(1, 1) = dyn;
    m(2, 0) = 0.5 * (-1.0 + dyn) * std::exp(kI * (th + theta0));
    m(2, 2) = 0.5 * (1.0 + dyn) * std::conj(minus);
    u[k] = m;
  }
  u[0] = Matrix::Identity(3, 3);
  return PropagatorTable(g, std::move(u));
}

HamiltonianSignal h1(const Scenario& s) {
  const Grid& g = s.r.grid();
  const std::vector<double> p = rho(s);
  const double theta0 = s.theta.sample(0);
  const Matrix s2 = sigma(2, theta0), s3 = sigma(3, theta0);
  std::vector<Matrix> v(g.size());
  for (int k = 0; k < g.size(); ++k)
    v[k] = -s.theta.derivative_sample(k) * (std::sin(p[k]) * s2 + std::cos(p[k]) * s3);
  return HamiltonianSignal::tabulated(g, std::move(v));
}

HamiltonianSignal rotating_frame(const Scenario& s) {
  const Grid& g = s.r.grid();
  const double theta0 = s.theta.sample(0);
  const Matrix s1 = sigma(1, theta0), s3 = sigma(3, theta0);
  std::vector<Matrix> v(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double r = s.r.sample(k);
    v[k] = 0.5 * s.lambda * r * r * s1 - s.theta.derivative_sample(k) * s3;
  }
  return HamiltonianSignal::tabulated(g, std::move(v));
}

PropagatorTable rotating_gauge_inverse(const Scenario& s) {
  const Grid& g = s.r.grid();
  const std::vector<double> p = rho(s);
  const Matrix s1 = sigma(1, s.theta.sample(0));
  std::vector<Matrix> v(g.size());
  for (int k = 0; k < g.size(); ++k) v[k] = matrix_exp(0.5 * kI * p[k] * s1);
  v[0] = Matrix::Identity(3, 3);
  return PropagatorTable(g, std::move(v));
}

double estimate_c(const Scenario& s) {
  const double r0 = s.r.sample(0);
  check_field(r0, 0.0);
  return s.theta.derivative_sample(0) / (r0 * r0);
}

double condition_residual(const Scenario& s, double c) {
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < s.r.grid().size(); ++k) {
    const double r2 = s.r.sample(k) * s.r.sample(k);
    worst = std::max(worst, std::abs(s.theta.derivative_sample(k) - c * r2));
    scale = std::max(scale, r2);
  }
  return worst / scale;
}

PropagatorTable exact_solve(const Scenario& s, double c, double eps_exact) {
  check_field(s);
  const double residual = condition_residual(s, c);
  if (!(residual < eps_exact))
    throw NumericalError(Failure::ConditionViolated,
                         "theta_dot is not proportional to r^2 (relative residual " + std::to_string(residual) + ")");
  const Grid& g = s.r.grid();
  std::vector<double> r2(g.size());
  for (int k = 0; k < g.size(); ++k) r2[k] = s.r.sample(k) * s.r.sample(k);
  const std::vector<double> area = cumulative_integral(r2, g.dt());
  const double theta0 = s.theta.sample(0);
  const Matrix gen = 0.5 * s.lambda * sigma(1, theta0) - c * sigma(3, theta0);
  const PropagatorTable u0 = adiabatic_propagator(s);
  const PropagatorTable gauge = rotating_gauge_inverse(s);
  std::vector<Matrix> u(g.size());
  for (int k = 0; k < g.size(); ++k) u[k] = u0[k] * gauge[k] * matrix_exp(-kI * area[k] * gen);
  u[0] = Matrix::Identity(3, 3);
  return PropagatorTable(g, std::move(u));
}

PropagatorTable exact_solve_estimated(const Scenario& s, double eps_exact) {
  return exact_solve(s, estimate_c(s), eps_exact);
}

}  // namespace adiaprod::stark
