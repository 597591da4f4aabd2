// Property-based acceptance suite. One PASS/FAIL line per criterion; the exit
// status is the number of failed criteria.

#include "adiaprod/exprparse.hpp"
#include "adiaprod/oracle.hpp"
#include "adiaprod/stark.hpp"

#include "random_expr.hpp"
#include "scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace adiaprod;
using namespace adiaprod::testing;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double sup_error(const PropagatorTable& a, const PropagatorTable& b) { return oracle::compare(a, b).sup_fro; }

HamiltonianSignal constant(const Grid& g, const Matrix& m) {
  return HamiltonianSignal::analytic(
      g, [m](double) { return m; }, [m](double) { return Matrix(Matrix::Zero(m.rows(), m.cols())); });
}

Matrix random_matrix(std::mt19937_64& gen, int dim, bool hermitian) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(n(gen), n(gen));
  if (hermitian) m = (0.5 * (m + m.adjoint())).eval();
  return m;
}

stark::Scenario rotating_stark(const Grid& g, double rate) {
  return {1.0, real(g, [](double) { return 1.0; }, [](double) { return 0.0; }),
          real(g, [rate](double t) { return rate * t; }, [rate](double) { return rate; })};
}

std::vector<double> hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  std::sort(v.begin(), v.end());
  return v;
}

Verdict oracle_order() {
  const Grid g(1.0, 10);
  const auto h = HamiltonianSignal::analytic(g, [](double t) {
    Matrix m(2, 2);
    m << std::sin(t), 1, 1, -std::sin(t);
    return m;
  });
  const auto report = oracle::convergence_order(h, {1});
  return {!report.exact && report.ratio >= 12.0 && report.ratio <= 20.0, "ratio " + fmt(report.ratio)};
}

Verdict constant_termination() {
  std::mt19937_64 gen(101);
  const Grid g(2.0, 400);
  double worst = 0.0;
  bool terminated = true;
  for (int dim : {2, 3})
    for (bool hermitian : {true, false}) {
      const Matrix m = random_matrix(gen, dim, hermitian);
      const auto e = expand(constant(g, m));
      terminated = terminated && e.status == ExpansionStatus{ExpansionStatus::Kind::Terminated, 0};
      const auto u0 = assemble(e, 1);
      for (int k = 0; k < g.size(); ++k) worst = std::max(worst, (u0[k] - matrix_exp(-kI * m * g[k])).norm());
    }
  return {terminated && worst < 1e-9, "sup error " + fmt(worst)};
}

Verdict two_factor_exactness(const twolevel::Coeffs& c, twolevel::ClassTag::Kind expected) {
  const auto h = c.hamiltonian();
  ExpansionOptions opts;
  opts.max_factors = 2;
  const auto e = expand(h, opts);
  const double scale = 1.0 + sup_norm(h);
  const double h2 = e.hamiltonians.size() > 2 ? sup_norm(e.hamiltonians[2]) : 0.0;
  const double err = sup_error(assemble(e, 2), oracle::propagate(h));
  const bool tagged = twolevel::classify(c).kind == expected;
  return {tagged && h2 < 1e-8 * scale && err < 1e-6,
          e.status.to_string() + ", sup|H2| " + fmt(h2) + ", sup error " + fmt(err)};
}

Verdict class3_recurrence() {
  const Grid g(10.0, 4000);
  const auto h = oscillator::to_twolevel(oscillator_scenario(g, 0.1, 1.0)).hamiltonian();
  const auto e = expand(h);
  const double d = e.hamiltonians.size() > 2 ? sup_distance(e.hamiltonians[2], h) : 1e300;
  return {d < 1e-8 && e.status == ExpansionStatus{ExpansionStatus::Kind::Cyclic, 2},
          e.status.to_string() + ", sup|H2 - H| " + fmt(d)};
}

Verdict modified_improvement() {
  const Grid g(20.0, 4000);
  const auto c = oscillator::to_twolevel(oscillator_scenario(g, 0.05, 0.1));
  const auto reference = oracle::propagate(c.hamiltonian(), {8});
  std::vector<double> err;
  for (int l = 1; l <= 3; ++l) err.push_back(sup_error(twolevel::modified_expansion(c, l).product, reference));
  const auto sup_h = twolevel::modified_expansion(c, 3).sup_h;
  const bool errors = err[1] < err[0] && err[2] < err[1];
  const bool gauges = sup_h[1] < sup_h[0] && sup_h[2] < sup_h[1];
  return {errors && gauges, "errors " + fmt(err[0]) + " " + fmt(err[1]) + " " + fmt(err[2]) + ", sup|h| " +
                                fmt(sup_h[0]) + " " + fmt(sup_h[1]) + " " + fmt(sup_h[2])};
}

Verdict reduction_equivalence() {
  const Grid g(2.0, 2000);
  std::mt19937_64 gen(77);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = random_smooth(g, gen).hamiltonian();
    const auto red = twolevel::reduce_to_class3(h);
    const auto u = red.reassemble(oracle::propagate(red.class3.hamiltonian(), {8}));
    worst = std::max(worst, sup_error(u, oracle::propagate(h, {8})));
  }
  return {worst < 1e-7, "worst sup error " + fmt(worst)};
}

Verdict stark_closed_forms() {
  const Grid g(kTwoPi, 2000);
  const auto s = rotating_stark(g, 0.3);
  const auto ev = hermitian_eigenvalues(stark::build_hamiltonian(s, 0.7));
  const double spectrum = std::max({std::abs(ev[0]), std::abs(ev[1] - 1.0), std::abs(ev[2] - 1.0)});

  const auto closed = stark::adiabatic_propagator(s);
  const auto generic = adiabatic_step(stark::hamiltonian(s)).propagator;
  double entry = 0.0;
  for (int k = 0; k < g.size(); ++k) entry = std::max(entry, (closed[k] - generic[k]).cwiseAbs().maxCoeff());

  const auto h1 = stark::h1(s);
  double h1_spectrum = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const auto e = hermitian_eigenvalues(h1.sample(k));
    h1_spectrum = std::max({h1_spectrum, std::abs(e[0] + 0.3), std::abs(e[1]), std::abs(e[2] - 0.3)});
  }

  const double exact = sup_error(stark::exact_solve_estimated(s), oracle::propagate(stark::hamiltonian(s), {8}));
  return {spectrum < 1e-12 && entry < 1e-8 && h1_spectrum < 1e-10 && exact < 1e-8,
          "spectrum " + fmt(spectrum) + ", U0 entries " + fmt(entry) + ", H1 spectrum " + fmt(h1_spectrum) +
              ", exact " + fmt(exact)};
}

Verdict degeneracy_lifting() {
  const Grid g(kTwoPi, 1000);
  std::vector<stark::Scenario> suite{rotating_stark(g, 0.3), rotating_stark(g, -0.8)};
  suite.push_back({0.7, real(g, [](double t) { return 1.0 + 0.3 * std::cos(t); },
                             [](double t) { return -0.3 * std::sin(t); }),
                   real(g, [](double t) { return 0.5 * t + 0.2 * std::sin(t); },
                        [](double t) { return 0.5 + 0.2 * std::cos(t); })});
  suite.push_back({1.4, real(g, [](double t) { return 0.6 + 0.1 * t; }, [](double) { return 0.1; }),
                   real(g, [](double t) { return 0.2 - 0.4 * t + 0.05 * t * t; },
                        [](double t) { return -0.4 + 0.1 * t; })});
  double worst = 1e300;
  for (const auto& s : suite) {
    const auto h1 = stark::h1(s);
    for (int k = 0; k < g.size(); ++k) {
      const double rate = std::abs(s.theta.derivative_sample(k));
      if (rate == 0.0) continue;
      const auto e = hermitian_eigenvalues(h1.sample(k));
      worst = std::min(worst, std::min(e[1] - e[0], e[2] - e[1]) / rate);
    }
  }
  return {worst >= 0.9, "min gap / rate " + fmt(worst)};
}

struct Case {
  std::string name;
  HamiltonianSignal h;
  bool hermitian;
};

double invariant_violation(const Case& c, const PropagatorTable& u, std::string& where) {
  const Grid& g = c.h.grid();
  const int dim = u.dim();
  std::vector<Complex> tr(g.size());
  for (int k = 0; k < g.size(); ++k) tr[k] = c.h.sample(k).trace();
  const auto integral = cumulative_integral(tr, g.dt());
  double worst = 0.0;
  auto note = [&](double v, const char* what) {
    if (v > worst) {
      worst = v;
      where = c.name + " " + what;
    }
  };
  note((u[0] - Matrix::Identity(dim, dim)).norm() == 0.0 ? 0.0 : 1.0, "U(0)");
  for (int k = 0; k < g.size(); ++k) {
    note(std::abs(u[k].determinant() - std::exp(-kI * integral[k])) / 1e-8, "det");
    if (c.hermitian) note((u[k].adjoint() * u[k] - Matrix::Identity(dim, dim)).norm() / 1e-8, "unitarity");
  }
  return worst;
}

Verdict structural_invariants() {
  std::vector<Case> suite;
  {
    const Grid g(1.0, 2000);
    suite.push_back({"class1", class1(g, 0.7).hamiltonian(), false});
    suite.push_back({"class2", class2(g, 0.5).hamiltonian(), false});
    std::mt19937_64 gen(5);
    for (int i = 0; i < 3; ++i) suite.push_back({"random" + std::to_string(i), random_smooth(g, gen).hamiltonian(), false});
    std::mt19937_64 mgen(9);
    suite.push_back({"constant3", constant(g, random_matrix(mgen, 3, true)), true});
    const auto base = random_smooth(g, gen).hamiltonian();
    suite.push_back({"traced", HamiltonianSignal::analytic(g, [base](double t) {
                       return Matrix(base.value_at(t) + Complex(0.3 * std::cos(t), -0.05) * Matrix::Identity(2, 2));
                     }),
                     false});
  }
  {
    const Grid g(10.0, 4000);
    suite.push_back({"oscillator", oscillator::to_twolevel(oscillator_scenario(g, 0.1, 1.0)).hamiltonian(), false});
  }
  {
    const Grid g(kTwoPi, 2000);
    suite.push_back({"stark", stark::hamiltonian(rotating_stark(g, 0.3)), true});
  }

  double worst = 0.0, bio = 0.0;
  std::string where = "none";
  ExpansionOptions opts;
  opts.max_factors = 2;
  for (const auto& c : suite) {
    for (const auto& u : {oracle::propagate(c.h), assemble(expand(c.h, opts))}) {
      std::string w;
      const double v = invariant_violation(c, u, w);
      if (v > worst) {
        worst = v;
        where = w;
      }
    }
    const auto track = track_levels(c.h);
    for (const auto& p : track.points) bio = std::max({bio, p.biorthonormality_error(), p.completeness_error()});
  }
  return {worst < 1.0 && bio < 1e-9,
          std::to_string(suite.size()) + " scenarios, worst relative violation " + fmt(worst) + " (" + where +
              "), biorthonormality " + fmt(bio)};
}

Verdict dyson_monotonicity() {
  const Grid g(5.0, 2000);
  const oscillator::Scenario s{real(g, [](double t) { return 1.0 + 0.02 * t; }, [](double) { return 0.02; }), 1.0,
                               0.0};
  const auto reference = oracle::propagate(oscillator::to_twolevel(s).hamiltonian(), {8});
  std::vector<double> err;
  for (int n = 1; n <= 4; ++n) err.push_back(sup_error(oscillator::dyson_propagator(s, n), reference));
  bool ok = true;
  for (std::size_t i = 1; i < err.size(); ++i) ok = ok && err[i] <= err[i - 1];
  return {ok, "errors " + fmt(err[0]) + " " + fmt(err[1]) + " " + fmt(err[2]) + " " + fmt(err[3])};
}

Verdict expression_layer() {
  using namespace adiaprod::expr;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> pick_t(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Expr e = Expr::parse(random_expr(gen, 4));
    for (int j = 0; j < 10; ++j) {
      const double t = pick_t(gen), h = 1e-5;
      const double fd = (e.eval(t - 2 * h) - 8 * e.eval(t - h) + 8 * e.eval(t + h) - e.eval(t + 2 * h)) / (12 * h);
      const double exact = e.eval_derivative(t);
      worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
    }
  }
  struct Bad {
    const char* src;
    std::size_t offset;
  };
  int rejected = 0;
  const Bad bad[] = {{"", 0}, {"1 +", 3}, {"(t", 2}, {"t)", 1}, {"2 ** t", 3}, {"sin(q)", 4}, {"3 $ 4", 2}};
  for (const auto& b : bad) {
    try {
      Expr::parse(b.src);
    } catch (const ParseError& err) {
      if (err.offset() == b.offset) ++rejected;
    }
  }
  const int total = static_cast<int>(std::size(bad));
  return {worst < 1e-6 && rejected == total,
          "derivative error " + fmt(worst) + ", rejected " + std::to_string(rejected) + "/" + std::to_string(total)};
}

}  // namespace

int main() {
  const Grid g(1.0, 2000);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle is fourth order", oracle_order},
      {"constant Hamiltonians terminate at once", constant_termination},
      {"Class 1 is exact with two factors",
       [&] { return two_factor_exactness(class1(g, 0.7), twolevel::ClassTag::Kind::Class1); }},
      {"Class 2 is exact with two factors",
       [&] { return two_factor_exactness(class2(g, 0.5), twolevel::ClassTag::Kind::Class2); }},
      {"Class 3 recurs with period two", class3_recurrence},
      {"modified expansion improves with L", modified_improvement},
      {"reduction reproduces the oracle", reduction_equivalence},
      {"Stark closed forms", stark_closed_forms},
      {"Stark degeneracy is lifted", degeneracy_lifting},
      {"structural invariants", structural_invariants},
      {"Dyson error is non-increasing", dyson_monotonicity},
      {"expression layer", expression_layer},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s criterion %zu: %s (%s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
