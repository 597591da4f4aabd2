#include "adiaprod/twolevel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace adiaprod::twolevel {

namespace {

using CVec = std::vector<Complex>;

Matrix mat2(Complex m00, Complex m01, Complex m10, Complex m11) {
  Matrix m(2, 2);
  m << m00, m01, m10, m11;
  return m;
}

Vector vec2(Complex x, Complex y) {
  Vector v(2);
  v << x, y;
  return v;
}

CVec integral(const CVec& f, const Grid& g) { return cumulative_integral(f, g.dt()); }

double sup_abs(const CVec& v) {
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, std::abs(x));
  return s;
}

Matrix inverse2(const Matrix& m) {
  const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return mat2(m(1, 1), -m(0, 1), -m(1, 0), m(0, 0)) / det;
}

// Square root continued from the principal value at index 0.
CVec continuous_sqrt(const CVec& z) {
  CVec out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    Complex r = std::sqrt(z[k]);
    if (k == 0) {
      if (r.real() == 0.0 && r.imag() < 0.0) r = -r;
    } else if (std::abs(r - out[k - 1]) > std::abs(r + out[k - 1])) {
      r = -r;
    }
    out[k] = r;
  }
  return out;
}

}  // namespace

const Matrix& pauli(int i) {
  static const Matrix s1 = mat2(0.0, 1.0, 1.0, 0.0);
  static const Matrix s2 = mat2(0.0, -kI, kI, 0.0);
  static const Matrix s3 = mat2(1.0, 0.0, 0.0, -1.0);
  switch (i) {
    case 1: return s1;
    case 2: return s2;
    case 3: return s3;
  }
  throw std::invalid_argument("pauli index must be 1, 2 or 3");
}

Matrix pauli_conjugate(int i, int j, Complex phi) {
  if (i == j) throw std::invalid_argument("pauli_conjugate needs i != j");
  const int k = 6 - i - j;
  // epsilon_ijk for a permutation of (1,2,3)
  const double eps = ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
  return std::cos(2.0 * phi) * pauli(j) + eps * std::sin(2.0 * phi) * pauli(k);
}

Matrix Coeffs::matrix(int k) const { return mat2(a.sample(k), b.sample(k), c.sample(k), -a.sample(k)); }

HamiltonianSignal Coeffs::hamiltonian() const {
  const Grid& g = grid();
  if (!a.is_tabulated() && !b.is_tabulated() && !c.is_tabulated()) {
    auto value = [a = a, b = b, c = c](double t) {
      const Complex av = a.value_at(t);
      return mat2(av, b.value_at(t), c.value_at(t), -av);
    };
    auto deriv = [a = a, b = b, c = c](double t) {
      const Complex ad = a.derivative_at(t);
      return mat2(ad, b.derivative_at(t), c.derivative_at(t), -ad);
    };
    return HamiltonianSignal::analytic(g, value, deriv);
  }
  std::vector<Matrix> v(g.size()), d(g.size());
  for (int k = 0; k < g.size(); ++k) {
    v[k] = matrix(k);
    d[k] = mat2(a.derivative_sample(k), b.derivative_sample(k), c.derivative_sample(k), -a.derivative_sample(k));
  }
  return HamiltonianSignal::tabulated(g, std::move(v), std::move(d));
}

Coeffs Coeffs::tabulated(const Grid& g, CVec a, CVec b, CVec c) {
  return Coeffs{ScalarSignal::tabulated(g, std::move(a)), ScalarSignal::tabulated(g, std::move(b)),
                ScalarSignal::tabulated(g, std::move(c))};
}

CVec energy(const Coeffs& c, double eps_deg) {
  const Grid& g = c.grid();
  CVec z(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Complex a = c.a.sample(k);
    z[k] = a * a + c.b.sample(k) * c.c.sample(k);
  }
  CVec e = continuous_sqrt(z);
  for (int k = 0; k < g.size(); ++k)
    if (std::abs(e[k]) <= eps_deg)
      throw NumericalError(Failure::LevelCrossing, "E vanishes at t=" + std::to_string(g[k]));
  return e;
}

Detraced detrace(const HamiltonianSignal& h) {
  const Grid& g = h.grid();
  if (h.sample(0).rows() != 2 || h.sample(0).cols() != 2) throw std::invalid_argument("detrace needs a 2x2 Hamiltonian");
  CVec a(g.size()), b(g.size()), c(g.size()), da(g.size()), db(g.size()), dc(g.size()), tr(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Matrix& m = h.sample(k);
    const Matrix& d = h.derivative_sample(k);
    a[k] = 0.5 * (m(0, 0) - m(1, 1));
    b[k] = m(0, 1);
    c[k] = m(1, 0);
    da[k] = 0.5 * (d(0, 0) - d(1, 1));
    db[k] = d(0, 1);
    dc[k] = d(1, 0);
    tr[k] = 0.5 * (m(0, 0) + m(1, 1));
  }
  const CVec half_trace = integral(tr, g);
  CVec phase(g.size());
  for (int k = 0; k < g.size(); ++k) phase[k] = std::exp(kI * half_trace[k]);
  return Detraced{Coeffs{ScalarSignal::tabulated(g, std::move(a), std::move(da)),
                         ScalarSignal::tabulated(g, std::move(b), std::move(db)),
                         ScalarSignal::tabulated(g, std::move(c), std::move(dc))},
                  std::move(phase)};
}

EigenData eigendata(Complex a, Complex b, Complex c, Complex e, double eps_chart) {
  const Complex ae = a + e;
  if (std::abs(ae) <= eps_chart * std::abs(e)) throw NumericalError(Failure::ChartSingularity, "a + E vanishes");
  EigenData d;
  d.energy = e;
  d.norm = 2.0 * e * ae;
  d.psi1 = vec2(-b, ae);
  d.psi2 = vec2(ae, c);
  const Complex n = std::conj(d.norm);
  d.phi1 = vec2(-std::conj(c), std::conj(ae)) / n;
  d.phi2 = vec2(std::conj(ae), std::conj(b)) / n;
  return d;
}

EigenData eigendata(const Coeffs& c, const CVec& e, int k, double eps_chart) {
  return eigendata(c.a.sample(k), c.b.sample(k), c.c.sample(k), e[k], eps_chart);
}

Dynamical dynamical_data(const Coeffs& c, double eps_chart) {
  const Grid& g = c.grid();
  const int n = g.size();
  Dynamical d;
  d.e = energy(c);
  d.e_dot.resize(n);
  CVec e_half(n), w1(n), w2(n), wa(n);
  for (int k = 0; k < n; ++k) {
    const Complex a = c.a.sample(k), b = c.b.sample(k), cc = c.c.sample(k);
    const Complex da = c.a.derivative_sample(k), db = c.b.derivative_sample(k), dc = c.c.derivative_sample(k);
    const Complex e = d.e[k];
    const Complex ae = a + e;
    if (std::abs(ae) <= eps_chart * std::abs(e))
      throw NumericalError(Failure::ChartSingularity, "a + E vanishes at t=" + std::to_string(g[k]));
    const Complex de = (a * da + 0.5 * (db * cc + b * dc)) / e;
    d.e_dot[k] = de;
    w1[k] = (da + de + cc * db / ae) / (2.0 * e);
    w2[k] = (da + de + b * dc / ae) / (2.0 * e);
    wa[k] = (cc * db - b * dc) / (e * ae);
  }
  d.eta = integral(d.e, g);
  for (auto& x : d.eta) x *= 2.0;
  const CVec i1 = integral(w1, g), i2 = integral(w2, g), ia = integral(wa, g);
  d.alpha.resize(n);
  d.k1.resize(n);
  d.k2.resize(n);
  for (int k = 0; k < n; ++k) {
    d.alpha[k] = 0.5 * d.eta[k] + 0.25 * kI * ia[k];
    d.k1[k] = std::exp(0.5 * kI * d.eta[k] - i1[k]);
    d.k2[k] = std::exp(-0.5 * kI * d.eta[k] - i2[k]);
  }
  return d;
}

XiZeta xi_zeta(const Coeffs& c, const Dynamical& d) {
  const int n = c.grid().size();
  XiZeta xz;
  xz.xi.resize(n);
  xz.zeta.resize(n);
  for (int k = 0; k < n; ++k) {
    const Complex a = c.a.sample(k), b = c.b.sample(k), cc = c.c.sample(k);
    const Complex da = c.a.derivative_sample(k), db = c.b.derivative_sample(k), dc = c.c.derivative_sample(k);
    const Complex e = d.e[k], ae = a + e, dae = da + d.e_dot[k];
    const Complex dc_ratio = (dc * ae - cc * dae) / (ae * ae);
    const Complex db_ratio = (db * ae - b * dae) / (ae * ae);
    const Complex weight = 1.0 + a / e;
    xz.xi[k] = -0.5 * kI * std::exp(-2.0 * kI * d.alpha[k]) * weight * dc_ratio;
    xz.zeta[k] = 0.5 * kI * std::exp(2.0 * kI * d.alpha[k]) * weight * db_ratio;
  }
  return xz;
}

Coeffs transformed_coeffs(const Coeffs& c, const Dynamical& d, const XiZeta& xz) {
  const Grid& g = c.grid();
  const Complex a0 = c.a.sample(0), b0 = c.b.sample(0), c0 = c.c.sample(0), e0 = d.e[0];
  const Complex ae0 = a0 + e0;
  if (std::abs(ae0) <= kDefaultChartTol * std::abs(e0))
    throw NumericalError(Failure::ChartSingularity, "a + E vanishes at t=0");
  const Complex n0 = 2.0 * e0 * ae0;
  CVec a1(g.size()), b1(g.size()), c1(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Complex xi = xz.xi[k], zeta = xz.zeta[k];
    a1[k] = -(b0 * xi + c0 * zeta) / (2.0 * e0);
    b1[k] = -(b0 * b0 * xi - ae0 * ae0 * zeta) / n0;
    c1[k] = -(-ae0 * ae0 * xi + c0 * c0 * zeta) / n0;
  }
  return Coeffs::tabulated(g, std::move(a1), std::move(b1), std::move(c1));
}

AdiabaticPropagator adiabatic_propagator(const Coeffs& c, const Dynamical& d) {
  const Grid& g = c.grid();
  const EigenData start = eigendata(c, d.e, 0);
  std::vector<Matrix> fwd(g.size()), inv(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const EigenData now = eigendata(c, d.e, k);
    fwd[k] = d.k1[k] * now.psi1 * start.phi1.adjoint() + d.k2[k] * now.psi2 * start.phi2.adjoint();
    inv[k] = start.psi1 * now.phi1.adjoint() / d.k1[k] + start.psi2 * now.phi2.adjoint() / d.k2[k];
  }
  fwd[0] = Matrix::Identity(2, 2);
  inv[0] = Matrix::Identity(2, 2);
  return {PropagatorTable(g, std::move(fwd)), PropagatorTable(g, std::move(inv))};
}

std::string ClassTag::to_string() const {
  auto param = [this] {
    char buf[64];
    if (parameter.imag() == 0.0)
      std::snprintf(buf, sizeof buf, "%.10g", parameter.real());
    else
      std::snprintf(buf, sizeof buf, "%.10g%+.10gi", parameter.real(), parameter.imag());
    return std::string(buf);
  };
  switch (kind) {
    case Kind::Class1: return "Class1(" + param() + ")";
    case Kind::Class2: return "Class2(" + param() + ")";
    case Kind::Class3: return "Class3";
    case Kind::Generic: return "Generic";
  }
  return "Generic";
}

namespace {

double coeff_scale(const Coeffs& c) {
  double s = 1.0;
  for (int k = 0; k < c.grid().size(); ++k)
    s = std::max({s, std::abs(c.a.sample(k)), std::abs(c.b.sample(k)), std::abs(c.c.sample(k))});
  return s;
}

bool constant_ratio(const CVec& r, double eps) {
  double dev = 0.0;
  for (const auto& x : r) dev = std::max(dev, std::abs(x - r.front()));
  return dev <= eps * std::abs(r.front());
}

}  // namespace

ClassTag classify(const Coeffs& c, double eps_class) {
  const Grid& g = c.grid();
  const double scale = coeff_scale(c);
  double sup_a = 0.0;
  for (int k = 0; k < g.size(); ++k) sup_a = std::max(sup_a, std::abs(c.a.sample(k)));
  if (sup_a < eps_class * scale) return {ClassTag::Kind::Class3, 0.0};

  CVec e;
  try {
    e = energy(c);
  } catch (const NumericalError&) {
    return {};
  }
  CVec mu(g.size()), nu(g.size());
  for (int k = 0; k < g.size(); ++k) {
    const Complex ae = c.a.sample(k) + e[k];
    if (std::abs(ae) <= kDefaultChartTol * std::abs(e[k])) return {};
    mu[k] = c.c.sample(k) / ae;
    nu[k] = c.b.sample(k) / ae;
  }
  if (constant_ratio(mu, eps_class)) return {ClassTag::Kind::Class1, mu.front()};
  if (constant_ratio(nu, eps_class)) return {ClassTag::Kind::Class2, nu.front()};
  return {};
}

Class3Step class3_step(const Coeffs& c, double eps_deg) {
  const Grid& g = c.grid();
  const int n = g.size();
  const double scale = coeff_scale(c);
  for (int k = 0; k < n; ++k) {
    if (std::abs(c.a.sample(k)) >= kDefaultClassTol * scale)
      throw std::invalid_argument("class3_step needs a = 0");
    if (std::abs(c.b.sample(k)) < 1e-12 * scale || std::abs(c.c.sample(k)) < 1e-12 * scale)
      throw NumericalError(Failure::VanishingOffDiagonal, "off-diagonal entry vanishes at t=" + std::to_string(g[k]));
  }
  const CVec e = energy(c, eps_deg);
  CVec f(n), e1(n);
  for (int k = 0; k < n; ++k) {
    const Complex b = c.b.sample(k), cc = c.c.sample(k);
    const Complex de = 0.5 * (c.b.derivative_sample(k) * cc + b * c.c.derivative_sample(k)) / e[k];
    f[k] = kI * e[k] / b;
    e1[k] = 0.5 * kI * (de / e[k] - c.b.derivative_sample(k) / b);
  }
  const Complex f0 = f.front();
  CVec eta = integral(e, g);
  for (auto& x : eta) x *= 2.0;
  CVec a1(n), b1(n), c1(n);
  for (int k = 0; k < n; ++k) {
    a1[k] = e1[k] * std::cos(eta[k]);
    b1[k] = e1[k] * std::sin(eta[k]) / f0;
    c1[k] = f0 * e1[k] * std::sin(eta[k]);
  }
  const bool pauli_form = std::abs(c.b.sample(0) - c.c.sample(0)) <= 1e-12 * scale;
  return Class3Step{std::move(f), f0, std::move(eta), std::move(e1),
                    Coeffs::tabulated(g, std::move(a1), std::move(b1), std::move(c1)), pauli_form};
}

namespace {

Matrix diag_phase(Complex half) { return mat2(std::exp(kI * half), 0.0, 0.0, std::exp(-kI * half)); }

}  // namespace

Rephased rephase_to_class3(const Coeffs& h1) {
  const Grid& g = h1.grid();
  const int n = g.size();
  CVec a(n);
  for (int k = 0; k < n; ++k) a[k] = h1.a.sample(k);
  CVec gamma = integral(a, g);
  for (auto& x : gamma) x *= 2.0;
  CVec zero(n, 0.0), b(n), c(n), db(n), dc(n);
  std::vector<Matrix> gauge(n);
  for (int k = 0; k < n; ++k) {
    const Complex ph = std::exp(kI * gamma[k]);
    const Complex dgamma = 2.0 * a[k];
    b[k] = h1.b.sample(k) * ph;
    c[k] = h1.c.sample(k) / ph;
    db[k] = (h1.b.derivative_sample(k) + kI * dgamma * h1.b.sample(k)) * ph;
    dc[k] = (h1.c.derivative_sample(k) - kI * dgamma * h1.c.sample(k)) / ph;
    gauge[k] = diag_phase(0.5 * gamma[k]);
  }
  Coeffs out{ScalarSignal::tabulated(g, zero, zero), ScalarSignal::tabulated(g, std::move(b), std::move(db)),
             ScalarSignal::tabulated(g, std::move(c), std::move(dc))};
  return Rephased{std::move(out), std::move(gamma), PropagatorTable(g, std::move(gauge))};
}

namespace {

// Adiabatic propagator of [[0, b], [c, 0]] in the f = iE/b parameterisation;
// root = sqrt(f0 / f) on a continuous branch.
Matrix class3_factor(Complex root, Complex f, Complex f0, Complex eta) {
  const Complex ch = std::cos(0.5 * eta), sh = std::sin(0.5 * eta);
  return root * mat2(ch, sh / f0, -f * sh, (f / f0) * ch);
}

}  // namespace

ModifiedExpansion modified_expansion(const Coeffs& c, int factors) {
  if (factors < 1) throw std::invalid_argument("modified expansion needs at least one factor");
  const Grid& g = c.grid();
  const int n = g.size();
  const Class3Step s0 = class3_step(c);

  ModifiedExpansion m{{}, PropagatorTable::identity(g, 2), {}, {}, {}};
  CVec ratio(n);
  for (int k = 0; k < n; ++k) ratio[k] = s0.f0 / s0.f[k];
  const CVec root = continuous_sqrt(ratio);
  std::vector<Matrix> u0(n);
  for (int k = 0; k < n; ++k) u0[k] = class3_factor(root[k], s0.f[k], s0.f0, s0.eta[k]);
  u0[0] = Matrix::Identity(2, 2);
  m.factors.emplace_back(g, std::move(u0));
  m.eta.push_back(s0.eta);

  CVec h_prev = s0.e1;
  CVec eta_prev = s0.eta;
  Complex f0 = s0.f0;
  for (int l = 1; l <= factors; ++l) {
    CVec h(n), e(n);
    for (int k = 0; k < n; ++k) {
      h[k] = h_prev[k] * std::cos(eta_prev[k]);
      e[k] = h_prev[k] * std::sin(eta_prev[k]);
    }
    m.h.push_back(h);
    m.sup_h.push_back(sup_abs(h));
    if (l == factors) break;

    CVec gamma = integral(h, g), eta = integral(e, g);
    for (int k = 0; k < n; ++k) {
      gamma[k] *= 2.0;
      eta[k] *= 2.0;
    }
    f0 = kI * f0;
    std::vector<Matrix> gauge_inv(n), u(n);
    for (int k = 0; k < n; ++k) {
      const Complex f = f0 * std::exp(-kI * gamma[k]);
      gauge_inv[k] = diag_phase(-0.5 * gamma[k]);
      u[k] = class3_factor(std::exp(0.5 * kI * gamma[k]), f, f0, eta[k]);
    }
    gauge_inv[0] = Matrix::Identity(2, 2);
    u[0] = Matrix::Identity(2, 2);
    m.factors.emplace_back(g, std::move(gauge_inv));
    m.factors.emplace_back(g, std::move(u));
    m.eta.push_back(eta);
    h_prev = std::move(h);
    eta_prev = std::move(eta);
  }
  PropagatorTable product = m.factors.front();
  for (std::size_t i = 1; i < m.factors.size(); ++i) product = product * m.factors[i];
  m.product = std::move(product);
  return m;
}

Reduction reduce_to_class3(const HamiltonianSignal& h) {
  const Grid& g = h.grid();
  const int n = g.size();
  Detraced dt = detrace(h);
  const Coeffs& c = dt.coeffs;
  CVec alpha2(n);
  for (int k = 0; k < n; ++k) alpha2[k] = 0.5 * kI * (c.b.sample(k) - c.c.sample(k));
  const CVec beta = integral(alpha2, g);
  CVec ap(n), dap(n), apr(n);
  for (int k = 0; k < n; ++k) {
    const Complex a = c.a.sample(k), da = c.a.derivative_sample(k);
    const Complex al1 = 0.5 * (c.b.sample(k) + c.c.sample(k));
    const Complex dal1 = 0.5 * (c.b.derivative_sample(k) + c.c.derivative_sample(k));
    const Complex cs = std::cos(2.0 * beta[k]), sn = std::sin(2.0 * beta[k]);
    const Complex db2 = 2.0 * alpha2[k];
    ap[k] = al1 * cs - a * sn;
    dap[k] = dal1 * cs - al1 * sn * db2 - da * sn - a * cs * db2;
    apr[k] = al1 * sn + a * cs;
  }
  CVec eta = integral(apr, g);
  for (auto& x : eta) x *= 2.0;
  CVec zero(n, 0.0), b(n), cc(n), db(n), dc(n);
  std::vector<Matrix> g1(n), g2(n);
  for (int k = 0; k < n; ++k) {
    const Complex ph = std::exp(kI * eta[k]);
    const Complex deta = 2.0 * apr[k];
    b[k] = ap[k] * ph;
    cc[k] = ap[k] / ph;
    db[k] = (dap[k] + kI * deta * ap[k]) * ph;
    dc[k] = (dap[k] - kI * deta * ap[k]) / ph;
    g1[k] = std::cos(beta[k]) * Matrix::Identity(2, 2) + kI * std::sin(beta[k]) * pauli(2);
    g2[k] = diag_phase(0.5 * eta[k]);
  }
  g1[0] = Matrix::Identity(2, 2);
  g2[0] = Matrix::Identity(2, 2);
  Coeffs out{ScalarSignal::tabulated(g, zero, zero), ScalarSignal::tabulated(g, std::move(b), std::move(db)),
             ScalarSignal::tabulated(g, std::move(cc), std::move(dc))};
  return Reduction{std::move(out), beta, std::move(eta), std::move(dt.phase), PropagatorTable(g, std::move(g1)),
                   PropagatorTable(g, std::move(g2))};
}

PropagatorTable Reduction::reassemble(const PropagatorTable& u_class3) const {
  const Grid& g = u_class3.grid;
  std::vector<Matrix> out(g.size());
  for (int k = 0; k < g.size(); ++k)
    out[k] = inverse2(g1[k]) * inverse2(g2[k]) * u_class3[k] / trace_phase[k];
  return PropagatorTable(g, std::move(out));
}

}  // namespace adiaprod::twolevel
