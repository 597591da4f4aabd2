#include "adiaprod/oracle.hpp"
#include "adiaprod/twolevel.hpp"

#include "scenarios.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

using namespace adiaprod;
using namespace adiaprod::testing;
using twolevel::ClassTag;
using twolevel::Coeffs;

namespace {

Coeffs constant_coeffs(const Grid& g, Complex a, Complex b, Complex c) {
  return {scalar(g, [a](double) { return a; }, [](double) { return Complex(0.0); }),
          scalar(g, [b](double) { return b; }, [](double) { return Complex(0.0); }),
          scalar(g, [c](double) { return c; }, [](double) { return Complex(0.0); })};
}

Coeffs oscillator_coeffs(const Grid& g, std::function<double(double)> w, std::function<double(double)> dw) {
  return oscillator::to_twolevel({real(g, std::move(w), std::move(dw)), 1.0, 0.0});
}

double sup_abs(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, std::abs(x));
  return s;
}

template <typename F>
double gk(F f, double t) {
  if (t == 0.0) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 10, 1e-14);
}

}  // namespace

TEST_CASE("Pauli conjugation") {
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      if (i == j) continue;
      CHECK((twolevel::pauli_conjugate(i, j, 0.0) - twolevel::pauli(j)).norm() < 1e-15);
      for (Complex phi : {Complex(std::numbers::pi / 4, 0.0), Complex(0.0, 1.0), Complex(0.3, -0.2)}) {
        const Matrix ref = matrix_exp(-kI * phi * twolevel::pauli(i)) * twolevel::pauli(j) *
                           matrix_exp(kI * phi * twolevel::pauli(i));
        CHECK((twolevel::pauli_conjugate(i, j, phi) - ref).norm() < 1e-12 * std::max(1.0, ref.norm()));
      }
    }
  // exp(-i pi/4 s1) s3 exp(i pi/4 s1) = eps_{132} s2 = -s2
  CHECK((twolevel::pauli_conjugate(1, 3, std::numbers::pi / 4) + twolevel::pauli(2)).norm() < 1e-15);
}

TEST_CASE("eigendata at single points") {
  const auto d = twolevel::eigendata(1.0, 0.0, 0.0, 1.0);
  CHECK(std::abs(d.energy - 1.0) < 1e-15);
  CHECK((d.psi1 - Vector::Map(std::vector<Complex>{0.0, 2.0}.data(), 2)).norm() < 1e-15);
  CHECK((d.psi2 - Vector::Map(std::vector<Complex>{2.0, 0.0}.data(), 2)).norm() < 1e-15);
  CHECK(std::abs(d.norm - 4.0) < 1e-15);

  const auto o = twolevel::eigendata(0.0, kI, -4.0 * kI, 2.0);
  CHECK((o.psi1 - Vector::Map(std::vector<Complex>{-kI, 2.0}.data(), 2)).norm() < 1e-15);
  CHECK((o.psi2 - Vector::Map(std::vector<Complex>{2.0, -4.0 * kI}.data(), 2)).norm() < 1e-15);

  try {
    twolevel::eigendata(-1.0, 0.0, 0.0, 1.0);
    FAIL("expected ChartSingularity");
  } catch (const NumericalError& e) {
    CHECK(e.failure() == Failure::ChartSingularity);
  }
}

TEST_CASE("random eigendata is biorthonormal and reconstructs H") {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    const Complex a(n(gen), n(gen)), b(n(gen), n(gen)), c(n(gen), n(gen));
    Complex e = std::sqrt(a * a + b * c);
    const auto d = twolevel::eigendata(a, b, c, e, 1e-6);
    Matrix h(2, 2);
    h << a, b, c, -a;
    const Matrix rebuilt = -e * d.psi1 * d.phi1.adjoint() + e * d.psi2 * d.phi2.adjoint();
    CHECK((rebuilt - h).norm() < 1e-10 * h.norm());
    CHECK(std::abs(d.phi1.dot(d.psi1) - 1.0) < 1e-10);
    CHECK(std::abs(d.phi2.dot(d.psi2) - 1.0) < 1e-10);
    CHECK(std::abs(d.phi1.dot(d.psi2)) < 1e-10);
    CHECK(std::abs(d.phi2.dot(d.psi1)) < 1e-10);
  }
}

TEST_CASE("energy follows a continuous branch and reports crossings") {
  const Grid g(4.0, 400);
  const auto e = twolevel::energy(oscillator_coeffs(g, [](double t) { return 1.0 + 0.5 * std::sin(t); },
                                                    [](double t) { return 0.5 * std::cos(t); }));
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(e[k] - (1.0 + 0.5 * std::sin(g[k]))) < 1e-12);

  const Grid h(2.0, 200);
  const Coeffs crossing{scalar(h, [](double t) { return Complex(t - 1.0); }, [](double) { return Complex(1.0); }),
                        scalar(h, [](double) { return Complex(0.0); }, [](double) { return Complex(0.0); }),
                        scalar(h, [](double) { return Complex(0.0); }, [](double) { return Complex(0.0); })};
  try {
    twolevel::energy(crossing);
    FAIL("expected LevelCrossing");
  } catch (const NumericalError& err) {
    CHECK(err.failure() == Failure::LevelCrossing);
  }
}

TEST_CASE("removing the trace") {
  const Grid g(2.0, 400);
  const auto c = class1(g, 0.7);
  const auto dt = twolevel::detrace(c.hamiltonian());
  CHECK(sup_abs(dt.phase) == doctest::Approx(1.0));
  for (int k = 0; k < g.size(); ++k) {
    CHECK(std::abs(dt.phase[k] - 1.0) < 1e-15);
    CHECK(std::abs(dt.coeffs.a.sample(k) - c.a.sample(k)) < 1e-15);
  }

  const auto id = twolevel::detrace(HamiltonianSignal::analytic(g, [](double) { return Matrix(Matrix::Identity(2, 2)); }));
  for (int k = 0; k < g.size(); ++k) {
    CHECK(id.coeffs.matrix(k).norm() < 1e-15);
    CHECK(std::abs(id.phase[k] - std::exp(kI * g[k])) < 1e-12);
  }

  Matrix d20(2, 2), s3(2, 2);
  d20 << 2, 0, 0, 0;
  s3 << 1, 0, 0, -1;
  const auto ub = oracle::propagate(HamiltonianSignal::analytic(g, [d20](double) { return d20; }));
  const auto us = oracle::propagate(HamiltonianSignal::analytic(g, [s3](double) { return s3; }));
  for (int k = 0; k < g.size(); ++k) CHECK((ub[k] - std::exp(-kI * g[k]) * us[k]).norm() < 1e-10);
}

TEST_CASE("dynamical data for constant coefficients") {
  const Grid g(3.0, 300);
  const auto c = constant_coeffs(g, 0.4, Complex(0.3, 0.2), Complex(0.3, -0.2));
  const auto d = twolevel::dynamical_data(c);
  const Complex e = d.e[0];
  for (int k = 0; k < g.size(); ++k) {
    const Complex eta = 2.0 * e * g[k];
    CHECK(std::abs(d.eta[k] - eta) < 1e-12);
    CHECK(std::abs(d.k1[k] - std::exp(kI * eta / 2.0)) < 1e-12);
    CHECK(std::abs(d.k2[k] - std::exp(-kI * eta / 2.0)) < 1e-12);
  }
}

TEST_CASE("dynamical data for the oscillator") {
  const Grid g(5.0, 1000);
  const auto d1 = twolevel::dynamical_data(oscillator_coeffs(g, [](double) { return 1.0; }, [](double) { return 0.0; }));
  for (int k = 0; k < g.size(); ++k) {
    CHECK(std::abs(d1.eta[k] - 2.0 * g[k]) < 1e-12);
    CHECK(std::abs(d1.alpha[k] - g[k]) < 1e-12);
  }

  auto w = [](double t) { return 1.0 + 0.1 * t; };
  const auto d = twolevel::dynamical_data(oscillator_coeffs(g, w, [](double) { return 0.1; }));
  for (int k = 0; k < g.size(); k += 50) {
    const double t = g[k];
    const double eta = 2.0 * gk(w, t);
    // (i/4) (c db - b dc) / (E (E + a)) = -(i/2) omega_dot / omega
    const double geo = gk([&](double s) { return 0.1 / w(s); }, t);
    CHECK(std::abs(d.eta[k] - eta) < 1e-9);
    CHECK(std::abs(d.alpha[k] - Complex(eta / 2.0, -0.5 * geo)) < 1e-9);
  }
}

TEST_CASE("xi and zeta") {
  const Grid g(1.0, 2000);
  {
    const auto c = class1(g, 0.7);
    const auto xz = twolevel::xi_zeta(c, twolevel::dynamical_data(c));
    CHECK(sup_abs(xz.xi) < 1e-9);
    CHECK(sup_abs(xz.zeta) > 1e-3);
  }
  {
    const auto c = class2(g, 0.5);
    const auto xz = twolevel::xi_zeta(c, twolevel::dynamical_data(c));
    CHECK(sup_abs(xz.zeta) < 1e-9);
    CHECK(sup_abs(xz.xi) > 1e-3);
  }
  {
    const Grid h(10.0, 4000);
    const auto s = oscillator_scenario(h, 0.1, 1.0);
    const auto c = oscillator::to_twolevel(s);
    const auto d = twolevel::dynamical_data(c);
    const auto xz = twolevel::xi_zeta(c, d);
    const double f0 = s.omega.sample(0);
    for (int k = 0; k < h.size(); k += 100) {
      const double f = s.omega.sample(k), fdot = s.omega.derivative_sample(k);
      CHECK(std::abs(xz.xi[k] - (-f0 * fdot * std::exp(-kI * d.eta[k]) / (2.0 * f))) < 1e-8);
      CHECK(std::abs(xz.zeta[k] - fdot * std::exp(kI * d.eta[k]) / (2.0 * f0 * f)) < 1e-8);
    }
  }
}

TEST_CASE("transformed coefficients") {
  const Grid g(1.0, 2000);
  {
    const auto c = constant_coeffs(g, 0.4, 1.0, 0.5);
    const auto d = twolevel::dynamical_data(c);
    const auto h1 = twolevel::transformed_coeffs(c, d, twolevel::xi_zeta(c, d));
    for (int k = 0; k < g.size(); ++k) CHECK(h1.matrix(k).norm() < 1e-12);
  }
  {
    const Grid h(10.0, 4000);
    const auto c = oscillator::to_twolevel(oscillator_scenario(h, 0.1, 1.0));
    const auto d = twolevel::dynamical_data(c);
    const auto h1 = twolevel::transformed_coeffs(c, d, twolevel::xi_zeta(c, d));
    const auto closed = twolevel::class3_step(c).h1;
    for (int k = 0; k < h.size(); ++k) {
      CHECK((h1.matrix(k) - closed.matrix(k)).norm() < 1e-8);
      CHECK(std::abs(h1.matrix(k).trace()) == 0.0);
    }
  }
  {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 5; ++trial) {
      const auto c = random_smooth(g, gen);
      const auto d = twolevel::dynamical_data(c);
      const auto h1 = twolevel::transformed_coeffs(c, d, twolevel::xi_zeta(c, d));
      CHECK(sup_distance(h1.hamiltonian(), adiabatic_step(c.hamiltonian()).next) < 1e-7);
    }
  }
}

TEST_CASE("closed-form adiabatic propagator matches the generic engine") {
  const Grid g(1.0, 2000);
  std::mt19937_64 gen(5);
  const auto c = random_smooth(g, gen);
  const auto closed = twolevel::adiabatic_propagator(c, twolevel::dynamical_data(c));
  const auto generic = adiabatic_step(c.hamiltonian());
  CHECK(oracle::compare(closed.forward, generic.propagator).sup_fro < 1e-8);
  CHECK(oracle::compare(closed.inverse, generic.inverse).sup_fro < 1e-8);
}

TEST_CASE("classification") {
  const Grid g(1.0, 1000);
  const auto osc = oscillator::to_twolevel(oscillator_scenario(g, 0.1, 1.0));
  CHECK(twolevel::classify(osc).to_string() == "Class3");

  const ClassTag t1 = twolevel::classify(class1(g, 0.7));
  CHECK(t1.kind == ClassTag::Kind::Class1);
  CHECK(std::abs(t1.parameter - 0.7) < 1e-10);
  CHECK(t1.to_string() == "Class1(0.7)");

  const ClassTag t2 = twolevel::classify(class2(g, 0.5));
  CHECK(t2.kind == ClassTag::Kind::Class2);
  CHECK(std::abs(t2.parameter - 0.5) < 1e-10);

  const Coeffs generic{scalar(g, [](double t) { return Complex(std::sin(t)); },
                              [](double t) { return Complex(std::cos(t)); }),
                       scalar(g, [](double) { return Complex(1.0); }, [](double) { return Complex(0.0); }),
                       scalar(g, [](double) { return Complex(1.0); }, [](double) { return Complex(0.0); })};
  CHECK(twolevel::classify(generic).to_string() == "Generic");

  // c = mu (mu b + sqrt(4a^2 + mu^2 b^2)) / 2 makes c/E constant, not c/(a+E)
  const double mu = 0.7;
  const Coeffs printed{scalar(g, a_profile, a_profile_dot), scalar(g, b_profile, b_profile_dot),
                       scalar(
                           g,
                           [mu](double t) {
                             const Complex a = a_profile(t), b = b_profile(t);
                             return mu * (mu * b + std::sqrt(4.0 * a * a + mu * mu * b * b)) / 2.0;
                           },
                           {})};
  CHECK(twolevel::classify(printed).kind == ClassTag::Kind::Generic);
}

TEST_CASE("Class 3 step") {
  const Grid g(10.0, 4000);
  {
    const auto flat = twolevel::class3_step(constant_coeffs(g, 0.0, 0.8, 0.8));
    for (int k = 0; k < g.size(); ++k) CHECK(flat.h1.matrix(k).norm() < 1e-12);
    CHECK(flat.pauli_form);
  }
  const auto s = oscillator_scenario(g, 0.1, 1.0);
  const auto c = oscillator::to_twolevel(s);
  const auto step = twolevel::class3_step(c);
  CHECK(!step.pauli_form);
  const double w0 = s.omega.sample(0);
  CHECK(std::abs(step.f0 - w0) < 1e-14);
  for (int k = 0; k < g.size(); k += 40) {
    const double w = s.omega.sample(k), wdot = s.omega.derivative_sample(k);
    CHECK(std::abs(step.f[k] - w) < 1e-12);
    const Complex eta = step.eta[k];
    Matrix ref(2, 2);
    ref << std::cos(eta), std::sin(eta) / w0, w0 * std::sin(eta), -std::cos(eta);
    ref *= kI * wdot / (2.0 * w);
    CHECK((step.h1.matrix(k) - ref).norm() < 1e-8);
  }

  ExpansionOptions opts;
  opts.max_factors = 2;
  const auto e = expand(c.hamiltonian(), opts);
  CHECK(sup_distance(e.hamiltonians.at(2), c.hamiltonian()) < 1e-8);

  CHECK_THROWS_AS(twolevel::class3_step(class1(g, 0.7)), std::invalid_argument);
  const Coeffs vanishing{scalar(g, [](double) { return Complex(0.0); }, [](double) { return Complex(0.0); }),
                         scalar(g, [](double t) { return Complex(t - 5.0); }, [](double) { return Complex(1.0); }),
                         scalar(g, [](double) { return Complex(1.0); }, [](double) { return Complex(0.0); })};
  try {
    twolevel::class3_step(vanishing);
    FAIL("expected VanishingOffDiagonal");
  } catch (const NumericalError& err) {
    CHECK(err.failure() == Failure::VanishingOffDiagonal);
  }
}

TEST_CASE("Pauli form of the first transformed Hamiltonian when b(0) = c(0)") {
  const Grid g(5.0, 2000);
  const Coeffs c{scalar(g, [](double) { return Complex(0.0); }, [](double) { return Complex(0.0); }),
                 scalar(g, [](double t) { return Complex(1.0 + 0.1 * std::sin(t)); },
                        [](double t) { return Complex(0.1 * std::cos(t)); }),
                 scalar(g, [](double t) { return Complex(1.0 + 0.2 * std::sin(t)); },
                        [](double t) { return Complex(0.2 * std::cos(t)); })};
  const auto step = twolevel::class3_step(c);
  REQUIRE(step.pauli_form);
  for (int k = 0; k < g.size(); k += 50) {
    const Matrix ref = step.e1[k] * twolevel::pauli_conjugate(1, 3, -step.eta[k] / 2.0);
    CHECK((step.h1.matrix(k) - ref).norm() < 1e-10);
  }
}

TEST_CASE("rephasing to zero diagonal") {
  const Grid g(10.0, 4000);
  {
    const auto c = constant_coeffs(g, 0.0, 0.7, 1.1);
    const auto r = twolevel::rephase_to_class3(c);
    for (int k = 0; k < g.size(); ++k) {
      CHECK((r.gauge[k] - Matrix::Identity(2, 2)).norm() < 1e-15);
      CHECK((r.coeffs.matrix(k) - c.matrix(k)).norm() < 1e-15);
    }
  }
  const auto s = oscillator_scenario(g, 0.1, 1.0);
  const auto step = twolevel::class3_step(oscillator::to_twolevel(s));
  const auto r = twolevel::rephase_to_class3(step.h1);
  const Complex f0 = step.f0;
  for (int k = 1; k < g.size(); k += 40) {
    CHECK(std::abs(r.coeffs.a.sample(k)) == 0.0);
    const Complex b = r.coeffs.b.sample(k), c = r.coeffs.c.sample(k);
    if (std::abs(b) < 1e-6) continue;
    // f_1 = i sqrt(c/b) = i f0 e^{-i gamma}, up to the sign of the root
    const Complex f1 = kI * std::sqrt(c / b), expected = kI * f0 * std::exp(-kI * r.gamma[k]);
    CHECK(std::min(std::abs(f1 - expected), std::abs(f1 + expected)) < 1e-8 * std::abs(expected));
  }

  const auto u_h1 = oracle::propagate(step.h1.hamiltonian(), {8});
  const auto u_r = oracle::propagate(r.coeffs.hamiltonian(), {8});
  CHECK(oracle::compare(r.gauge.inverse() * u_r, u_h1).sup_fro < 1e-7);
}

TEST_CASE("modified expansion basics") {
  const Grid g(20.0, 4000);
  {
    const auto c = oscillator::to_twolevel(oscillator_scenario(g, 0.0, 0.1));
    const auto m = twolevel::modified_expansion(c, 3);
    REQUIRE(m.factors.size() == 5);
    for (std::size_t i = 1; i < m.factors.size(); ++i)
      for (int k = 0; k < g.size(); k += 100) CHECK((m.factors[i][k] - Matrix::Identity(2, 2)).norm() < 1e-12);
  }
  const auto s = oscillator_scenario(g, 0.05, 0.1);
  const auto c = oscillator::to_twolevel(s);
  const auto m1 = twolevel::modified_expansion(c, 1);
  CHECK(m1.factors.size() == 1);
  CHECK(oracle::compare(m1.product, oscillator::adiabatic_propagator(s)).sup_fro < 1e-8);
  CHECK(oracle::compare(m1.product, adiabatic_step(c.hamiltonian()).propagator).sup_fro < 1e-8);
}

TEST_CASE("modified expansion: validity gauges shrink in the slow regime") {
  const Grid g(20.0, 4000);
  const auto c = oscillator::to_twolevel(oscillator_scenario(g, 0.05, 0.1));
  const auto m = twolevel::modified_expansion(c, 3);
  REQUIRE(m.sup_h.size() == 3);
  MESSAGE("sup|h_l| = " << m.sup_h[0] << ", " << m.sup_h[1] << ", " << m.sup_h[2]);
  CHECK(m.sup_h[1] < m.sup_h[0]);
  CHECK(m.sup_h[2] < m.sup_h[1]);
}

TEST_CASE("reduction to Class 3") {
  const Grid g(2.0, 2000);
  {
    const auto c = constant_coeffs(g, 0.0, 0.9, 0.9);
    const auto red = twolevel::reduce_to_class3(c.hamiltonian());
    CHECK(sup_abs(red.beta) == 0.0);
    for (int k = 0; k < g.size(); ++k) CHECK((red.g1[k] - Matrix::Identity(2, 2)).norm() == 0.0);
  }
  {
    Matrix s3(2, 2);
    s3 << 1, 0, 0, -1;
    const auto red = twolevel::reduce_to_class3(HamiltonianSignal::analytic(g, [s3](double) { return s3; }));
    for (int k = 0; k < g.size(); ++k) CHECK(red.class3.matrix(k).norm() < 1e-15);
    CHECK(oracle::compare(red.reassemble(PropagatorTable::identity(g, 2)),
                          oracle::propagate(HamiltonianSignal::analytic(g, [s3](double) { return s3; })))
              .sup_fro < 1e-10);
  }
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = random_smooth(g, gen).hamiltonian();
    const auto red = twolevel::reduce_to_class3(h);
    CHECK(std::abs(red.class3.b.sample(0) - red.class3.c.sample(0)) < 1e-14);
    const auto u = red.reassemble(oracle::propagate(red.class3.hamiltonian(), {8}));
    CHECK(oracle::compare(u, oracle::propagate(h, {8})).sup_fro < 1e-7);
  }
}
