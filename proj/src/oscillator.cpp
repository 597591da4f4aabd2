#include "adiaprod/oscillator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adiaprod::oscillator {

namespace {

void check_frequency(const Scenario& s) {
  const Grid& g = s.omega.grid();
  for (int k = 0; k < g.size(); ++k)
    if (!(s.omega.sample(k) > 0.0))
      throw NumericalError(Failure::NonpositiveFrequency, "omega <= 0 at t=" + std::to_string(g[k]));
}

Matrix mat2(Complex m00, Complex m01, Complex m10, Complex m11) {
  Matrix m(2, 2);
  m << m00, m01, m10, m11;
  return m;
}

}  // namespace

twolevel::Coeffs to_twolevel(const Scenario& s) {
  check_frequency(s);
  const Grid& g = s.omega.grid();
  auto zero = [](double) { return Complex(0.0); };
  auto w = s.omega;
  if (!w.is_tabulated()) {
    return twolevel::Coeffs{
        ScalarSignal::analytic(g, zero, zero), ScalarSignal::analytic(g, [](double) { return kI; }, zero),
        ScalarSignal::analytic(
            g, [w](double t) { return -kI * w.value_at(t) * w.value_at(t); },
            [w](double t) { return -2.0 * kI * w.value_at(t) * w.derivative_at(t); })};
  }
  std::vector<Complex> a(g.size(), 0.0), b(g.size(), kI), c(g.size()), dc(g.size());
  for (int k = 0; k < g.size(); ++k) {
    c[k] = -kI * w.sample(k) * w.sample(k);
    dc[k] = -2.0 * kI * w.sample(k) * w.derivative_sample(k);
  }
  return twolevel::Coeffs{ScalarSignal::tabulated(g, a, a), ScalarSignal::tabulated(g, b, a),
                          ScalarSignal::tabulated(g, std::move(c), std::move(dc))};
}

Trajectory trajectory_from(const PropagatorTable& u, double x0, double v0) {
  Trajectory tr{u, {}, {}};
  Vector s0(2);
  s0 << x0, v0;
  for (const auto& m : u.values) {
    const Vector s = m * s0;
    tr.x.push_back(s(0).real());
    tr.v.push_back(s(1).real());
  }
  return tr;
}

PropagatorTable adiabatic_propagator(const Scenario& s) {
  check_frequency(s);
  const Grid& g = s.omega.grid();
  std::vector<double> w(s.omega.samples());
  const std::vector<double> phase = cumulative_integral(w, g.dt());  // eta / 2
  const double w0 = w.front();
  std::vector<Matrix> u(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const double ch = std::cos(phase[k]), sh = std::sin(phase[k]);
    u[k] = std::sqrt(w0 / w[k]) * mat2(ch, sh / w0, -w[k] * sh, (w[k] / w0) * ch);
  }
  u[0] = Matrix::Identity(2, 2);
  return PropagatorTable(g, std::move(u));
}

EtaHamiltonian eta_hamiltonian(const Scenario& s) {
  check_frequency(s);
  const Grid& g = s.omega.grid();
  const int n = g.size();
  EtaHamiltonian e{g, {}, std::vector<double>(n), std::vector<Matrix>(n), std::vector<Matrix>(n), s.omega.sample(0)};
  e.eta = cumulative_integral(s.omega.samples(), g.dt());
  for (auto& x : e.eta) x *= 2.0;
  const Matrix& s1 = twolevel::pauli(1);
  const Matrix& s3 = twolevel::pauli(3);
  for (int k = 0; k < n; ++k) {
    const double w = s.omega.sample(k);
    const double wp = s.omega.derivative_sample(k) / (2.0 * w);
    e.omega_prime[k] = wp;
    e.h_tilde[k] = (kI * wp / (2.0 * w)) * (std::sin(e.eta[k]) * s1 + std::cos(e.eta[k]) * s3);
    e.h1[k] = 2.0 * w * e.h_tilde[k];
  }
  return e;
}

std::vector<Matrix> dyson_series(const EtaHamiltonian& e, int n) {
  if (n < 0 || n > kMaxDysonTerms) throw std::invalid_argument("Dyson term count must be in [0, 6]");
  const int npts = e.grid.size();
  std::vector<Matrix> term(npts, Matrix::Identity(2, 2));
  std::vector<Matrix> sum = term;
  // int H~ d eta = int H^(1) dt on the uniform t grid.
  for (int j = 1; j <= n; ++j) {
    std::vector<Matrix> integrand(npts);
    for (int k = 0; k < npts; ++k) integrand[k] = -kI * e.h1[k] * term[k];
    term = cumulative_integral(integrand, e.grid.dt());
    for (int k = 0; k < npts; ++k) sum[k] += term[k];
  }
  return sum;
}

PropagatorTable dyson_propagator(const Scenario& s, int n) {
  const EtaHamiltonian e = eta_hamiltonian(s);
  const std::vector<Matrix> series = dyson_series(e, n);
  const PropagatorTable u0 = adiabatic_propagator(s);
  // Normalised frame: D H^(1) D^-1 with D = diag(1, 1/omega_0).
  Matrix d = Matrix::Identity(2, 2), d_inv = Matrix::Identity(2, 2);
  d(1, 1) = 1.0 / e.omega0;
  d_inv(1, 1) = e.omega0;
  std::vector<Matrix> out(e.grid.size());
  for (int k = 0; k < e.grid.size(); ++k) out[k] = u0[k] * d_inv * series[k] * d;
  out[0] = Matrix::Identity(2, 2);
  return PropagatorTable(e.grid, std::move(out));
}

double dyson_generator_norm(const EtaHamiltonian& e) {
  std::vector<double> norms(e.grid.size());
  for (int k = 0; k < e.grid.size(); ++k) norms[k] = e.h1[k].norm();
  return cumulative_integral(norms, e.grid.dt()).back();
}

double dyson_remainder_bound(const EtaHamiltonian& e, int n) {
  const double total = dyson_generator_norm(e);
  return std::exp(total) * std::pow(total, n + 1) / std::tgamma(n + 2.0);
}

Trajectory solve_trajectory(const Scenario& s, const Method& m, const oracle::OracleConfig& cfg) {
  switch (m.kind) {
    case Method::Kind::Oracle:
      return trajectory_from(oracle::propagate(to_twolevel(s).hamiltonian(), cfg), s.x0, s.v0);
    case Method::Kind::Product:
      return trajectory_from(twolevel::modified_expansion(to_twolevel(s), m.order).product, s.x0, s.v0);
    case Method::Kind::Dyson: return trajectory_from(dyson_propagator(s, m.order), s.x0, s.v0);
  }
  throw std::invalid_argument("unknown oscillator method");
}

}  // namespace adiaprod::oscillator
