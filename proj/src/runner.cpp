#include "adiaprod/runner.hpp"

#include "adiaprod/csv.hpp"
#include "adiaprod/exprparse.hpp"
#include "adiaprod/oracle.hpp"
#include "adiaprod/oscillator.hpp"
#include "adiaprod/stark.hpp"
#include "adiaprod/twolevel.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>

namespace adiaprod::cli {

namespace pt = boost::property_tree;

MethodSpec MethodSpec::parse(const std::string& text) {
  if (text == "oracle") return {Kind::Oracle, 0};
  if (text == "exact-class") return {Kind::ExactClass, 0};
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')') throw ConfigError("unknown method '" + text + "'");
  const std::string name = text.substr(0, open);
  const std::string arg = text.substr(open + 1, text.size() - open - 2);
  int order = 0;
  try {
    std::size_t used = 0;
    order = std::stoi(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
  } catch (const std::exception&) {
    throw ConfigError("method '" + text + "': bad order");
  }
  if (name == "adiabatic" || name == "modified") {
    if (order < 1) throw ConfigError("method '" + text + "': need at least one factor");
    return {name == "adiabatic" ? Kind::Adiabatic : Kind::Modified, order};
  }
  if (name == "dyson") {
    if (order < 0 || order > oscillator::kMaxDysonTerms) throw ConfigError("method '" + text + "': terms must be 0..6");
    return {Kind::Dyson, order};
  }
  throw ConfigError("unknown method '" + text + "'");
}

std::string MethodSpec::to_string() const {
  switch (kind) {
    case Kind::Adiabatic: return "adiabatic(" + std::to_string(order) + ")";
    case Kind::Modified: return "modified(" + std::to_string(order) + ")";
    case Kind::ExactClass: return "exact-class";
    case Kind::Dyson: return "dyson(" + std::to_string(order) + ")";
    case Kind::Oracle: return "oracle";
  }
  return "oracle";
}

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"scenario", {"kind", "tau", "steps", "method"}},
    {"generic2", {"a", "a_im", "b", "b_im", "c", "c_im", "d", "d_im", "random", "seed"}},
    {"oscillator", {"omega", "x0", "v0"}},
    {"stark", {"lambda", "r", "theta"}},
    {"tabulated", {"file"}},
    {"tolerances",
     {"eps_trunc", "eps_cycle", "eps_deg", "eps_direction", "cycle_depth", "eps_class", "eps_exact", "eps_det",
      "substeps"}},
    {"output", {"propagator", "comparison"}},
};

class Section {
 public:
  Section(const pt::ptree& root, const std::string& name) : name_(name) {
    if (auto child = root.get_child_optional(name)) tree_ = *child;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(key, fallback);
  }

  double number(const std::string& key, double fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    char* end = nullptr;
    const double x = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0' || !std::isfinite(x))
      throw ConfigError("[" + name_ + "] " + key + ": not a number: '" + *v + "'");
    return x;
  }

  long integer(const std::string& key, long fallback) const {
    const double x = number(key, static_cast<double>(fallback));
    if (x != std::floor(x)) throw ConfigError("[" + name_ + "] " + key + ": not an integer");
    return static_cast<long>(x);
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("[" + name_ + "] " + key + ": expected true or false");
  }

 private:
  std::string name_;
  pt::ptree tree_;
};

ScenarioKind parse_kind(const std::string& s) {
  if (s == "generic2") return ScenarioKind::Generic2;
  if (s == "oscillator") return ScenarioKind::Oscillator;
  if (s == "stark") return ScenarioKind::Stark;
  if (s == "tabulated" || s == "generic-matrix-tabulated") return ScenarioKind::Tabulated;
  throw ConfigError("unknown scenario kind '" + s + "'");
}

std::string default_comparison(const std::string& out) {
  std::filesystem::path p(out);
  const std::string stem = p.stem().string();
  return (p.parent_path() / (stem + ".compare.csv")).string();
}

}  // namespace

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  pt::ptree root;
  try {
    pt::read_ini(path, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [section, tree] : root) {
    const auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : tree)
      if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }

  RunConfig cfg;
  const Section scenario(root, "scenario");
  cfg.kind = parse_kind(scenario.text("kind", "generic2"));
  cfg.tau = scenario.number("tau", 1.0);
  cfg.steps = static_cast<int>(scenario.integer("steps", 2000));
  cfg.method = MethodSpec::parse(overrides.method.value_or(scenario.text("method", "oracle")));
  if (overrides.steps) cfg.steps = *overrides.steps;
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (cfg.steps < 3) throw ConfigError("steps must be at least 3");

  const Section g2(root, "generic2");
  cfg.a = {g2.text("a", "0"), g2.text("a_im", "0")};
  cfg.b = {g2.text("b", "0"), g2.text("b_im", "0")};
  cfg.c = {g2.text("c", "0"), g2.text("c_im", "0")};
  cfg.d = {g2.text("d", "0"), g2.text("d_im", "0")};
  cfg.random = g2.flag("random", false);
  cfg.seed = static_cast<std::uint64_t>(g2.integer("seed", 0));
  if (overrides.seed) cfg.seed = *overrides.seed;

  const Section osc(root, "oscillator");
  cfg.omega = osc.text("omega", "1");
  cfg.x0 = osc.number("x0", 1.0);
  cfg.v0 = osc.number("v0", 0.0);

  const Section st(root, "stark");
  cfg.lambda = st.number("lambda", 1.0);
  cfg.r = st.text("r", "1");
  cfg.theta = st.text("theta", "0");

  const Section tab(root, "tabulated");
  cfg.table_file = tab.text("file", "");
  if (!cfg.table_file.empty() && std::filesystem::path(cfg.table_file).is_relative())
    cfg.table_file = (std::filesystem::path(path).parent_path() / cfg.table_file).string();

  const Section tol(root, "tolerances");
  cfg.expansion.eps_trunc = tol.number("eps_trunc", cfg.expansion.eps_trunc);
  cfg.expansion.eps_cycle = tol.number("eps_cycle", cfg.expansion.eps_cycle);
  cfg.expansion.eps_deg = tol.number("eps_deg", cfg.expansion.eps_deg);
  cfg.expansion.eps_direction = tol.number("eps_direction", cfg.expansion.eps_direction);
  cfg.expansion.cycle_depth = static_cast<int>(tol.integer("cycle_depth", cfg.expansion.cycle_depth));
  cfg.eps_class = tol.number("eps_class", cfg.eps_class);
  cfg.eps_exact = tol.number("eps_exact", cfg.eps_exact);
  cfg.eps_det = tol.number("eps_det", cfg.eps_det);
  cfg.substeps = static_cast<int>(tol.integer("substeps", cfg.substeps));
  if (cfg.substeps < 1) throw ConfigError("substeps must be at least 1");

  const Section out(root, "output");
  cfg.propagator_path = overrides.out.value_or(out.text("propagator", ""));
  cfg.comparison_path = out.text("comparison", "");
  if (overrides.out || cfg.comparison_path.empty())
    cfg.comparison_path = cfg.propagator_path.empty() ? "" : default_comparison(cfg.propagator_path);
  return cfg;
}

RandomCoefficients random_coefficients(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto u = [&gen](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  auto term = [&](double base_lo, double base_hi, double amp, const char* fn) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g + %.17g*%s(%.17g*t + %.17g)", u(base_lo, base_hi), u(0.0, amp), fn,
                  u(0.5, 2.0), u(0.0, 2.0 * std::numbers::pi));
    return std::string(buf);
  };
  auto wobble = [&](double amp) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g*sin(%.17g*t)", u(-amp, amp), u(0.5, 2.0));
    return std::string(buf);
  };
  RandomCoefficients rc;
  rc.a = {term(-0.5, 0.5, 0.3, "sin"), wobble(0.1)};
  rc.b = {term(0.6, 1.2, 0.3, "cos"), wobble(0.2)};
  rc.c = {term(0.6, 1.2, 0.3, "sin"), wobble(0.2)};
  return rc;
}

namespace {

ScalarSignal complex_signal(const Grid& g, const ComplexExpr& e) {
  const expr::Expr re = expr::Expr::parse(e.re), im = expr::Expr::parse(e.im);
  const expr::Expr dre = re.derivative(), dim = im.derivative();
  return ScalarSignal::analytic(
      g, [re, im](double t) { return Complex(re.eval(t), im.eval(t)); },
      [dre, dim](double t) { return Complex(dre.eval(t), dim.eval(t)); });
}

RealSignal real_signal(const Grid& g, const std::string& text) {
  const expr::Expr e = expr::Expr::parse(text);
  const expr::Expr d = e.derivative();
  return RealSignal::analytic(g, [e](double t) { return e.eval(t); }, [d](double t) { return d.eval(t); });
}

struct Problem {
  explicit Problem(const Grid& g) : grid(g) {}
  Grid grid;
  std::optional<HamiltonianSignal> h;
  std::optional<twolevel::Coeffs> coeffs;  // traceless part, generic2 only
  bool traceless = true;
  std::optional<oscillator::Scenario> osc;
  std::optional<stark::Scenario> stark;
};

Problem build(const RunConfig& cfg) {
  if (cfg.kind == ScenarioKind::Tabulated) {
    if (cfg.table_file.empty()) throw ConfigError("[tabulated] file is required");
    csv::MatrixTable table = csv::read_table(cfg.table_file);
    Problem p(csv::grid_of(table.t));
    p.h = HamiltonianSignal::tabulated(p.grid, std::move(table.values));
    const Matrix& h0 = p.h->sample(0);
    p.traceless = false;
    if (h0.rows() == 2) {
      p.coeffs = twolevel::detrace(*p.h).coeffs;
    }
    return p;
  }
  Problem p(Grid(cfg.tau, cfg.steps));
  switch (cfg.kind) {
    case ScenarioKind::Generic2: {
      ComplexExpr a = cfg.a, b = cfg.b, c = cfg.c;
      if (cfg.random) {
        const RandomCoefficients rc = random_coefficients(cfg.seed);
        a = rc.a;
        b = rc.b;
        c = rc.c;
      }
      p.coeffs = twolevel::Coeffs{complex_signal(p.grid, a), complex_signal(p.grid, b), complex_signal(p.grid, c)};
      const ScalarSignal d = complex_signal(p.grid, cfg.d);
      p.traceless = expr::Expr::parse(cfg.d.re) == expr::Expr::constant(0.0) &&
                    expr::Expr::parse(cfg.d.im) == expr::Expr::constant(0.0);
      if (p.traceless) {
        p.h = p.coeffs->hamiltonian();
      } else {
        const twolevel::Coeffs k = *p.coeffs;
        p.h = HamiltonianSignal::analytic(
            p.grid,
            [k, d](double t) {
              Matrix m(2, 2);
              const Complex a = k.a.value_at(t), s = d.value_at(t);
              m << s + a, k.b.value_at(t), k.c.value_at(t), s - a;
              return m;
            },
            [k, d](double t) {
              Matrix m(2, 2);
              const Complex a = k.a.derivative_at(t), s = d.derivative_at(t);
              m << s + a, k.b.derivative_at(t), k.c.derivative_at(t), s - a;
              return m;
            });
      }
      break;
    }
    case ScenarioKind::Oscillator:
      p.osc = oscillator::Scenario{real_signal(p.grid, cfg.omega), cfg.x0, cfg.v0};
      p.coeffs = oscillator::to_twolevel(*p.osc);
      p.h = p.coeffs->hamiltonian();
      break;
    case ScenarioKind::Stark:
      p.stark = stark::Scenario{cfg.lambda, real_signal(p.grid, cfg.r), real_signal(p.grid, cfg.theta)};
      p.h = stark::hamiltonian(*p.stark);
      break;
    case ScenarioKind::Tabulated: break;
  }
  return p;
}

struct Solution {
  PropagatorTable u;
  std::string status;
  std::vector<double> residuals;
  double det_slack = 0.0;
};

Solution solve(const RunConfig& cfg, const Problem& p) {
  const HamiltonianSignal& h = *p.h;
  const auto& m = cfg.method;
  switch (m.kind) {
    case MethodSpec::Kind::Oracle: return {oracle::propagate(h, {cfg.substeps}), "oracle", {}};
    case MethodSpec::Kind::Adiabatic: {
      ExpansionOptions opts = cfg.expansion;
      opts.max_factors = m.order;
      const ProductExpansion e = expand(h, opts);
      return {assemble(e), e.status.to_string(), e.residual_norms};
    }
    case MethodSpec::Kind::Modified: {
      if (!p.coeffs) throw ConfigError("modified(L) needs a two-level scenario");
      if (p.traceless && twolevel::classify(*p.coeffs, cfg.eps_class).kind == twolevel::ClassTag::Kind::Class3) {
        const twolevel::ModifiedExpansion me = twolevel::modified_expansion(*p.coeffs, m.order);
        return {me.product, m.to_string(), me.sup_h};
      }
      const twolevel::Reduction red = twolevel::reduce_to_class3(h);
      const twolevel::ModifiedExpansion me = twolevel::modified_expansion(red.class3, m.order);
      return {red.reassemble(me.product), m.to_string() + " after reduction", me.sup_h};
    }
    case MethodSpec::Kind::ExactClass: {
      if (p.stark) return {stark::exact_solve_estimated(*p.stark, cfg.eps_exact), "exact Stark", {}};
      if (!p.coeffs || p.osc) throw ConfigError("exact-class needs a generic2, tabulated 2x2 or stark scenario");
      const twolevel::Coeffs traceless = p.traceless ? *p.coeffs : twolevel::detrace(h).coeffs;
      const twolevel::ClassTag tag = twolevel::classify(traceless, cfg.eps_class);
      if (tag.kind != twolevel::ClassTag::Kind::Class1 && tag.kind != twolevel::ClassTag::Kind::Class2)
        throw ConfigError("exact-class: input is " + tag.to_string() + ", not Class1 or Class2");
      ExpansionOptions opts = cfg.expansion;
      opts.max_factors = 2;
      const ProductExpansion e = expand(h, opts);
      return {assemble(e), tag.to_string() + " " + e.status.to_string(), e.residual_norms};
    }
    case MethodSpec::Kind::Dyson: {
      if (!p.osc) throw ConfigError("dyson(n) is only available for oscillator scenarios");
      const oscillator::EtaHamiltonian eh = oscillator::eta_hamiltonian(*p.osc);
      const double tail = oscillator::dyson_remainder_bound(eh, m.order);
      const double y = std::exp(oscillator::dyson_generator_norm(eh)) * tail;
      return {oscillator::dyson_propagator(*p.osc, m.order), m.to_string(), {tail}, 2.0 * y + y * y};
    }
  }
  throw ConfigError("unsupported method");
}

void check_determinant(const HamiltonianSignal& h, const PropagatorTable& u, double tol) {
  const Grid& g = h.grid();
  std::vector<Complex> tr(g.size());
  for (int k = 0; k < g.size(); ++k) tr[k] = h.sample(k).trace();
  const std::vector<Complex> integral = cumulative_integral(tr, g.dt());
  for (int k = 0; k < g.size(); ++k) {
    const Complex expected = std::exp(-kI * integral[k]);
    const double dev = std::abs(u[k].determinant() - expected);
    if (dev > tol * std::max(1.0, std::abs(expected)))
      throw NumericalError(Failure::InvariantViolation,
                           "det U deviates from exp(-i int tr H) by " + std::to_string(dev) + " at t=" +
                               std::to_string(g[k]));
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  if (cfg.propagator_path.empty()) throw ConfigError("no output path: use --out or [output] propagator");
  const Problem p = build(cfg);
  const Solution sol = solve(cfg, p);
  check_determinant(*p.h, sol.u, cfg.eps_det + sol.det_slack);

  std::vector<csv::Column> extra;
  if (p.osc) {
    const oscillator::Trajectory tr = oscillator::trajectory_from(sol.u, p.osc->x0, p.osc->v0);
    extra = {{"x", tr.x}, {"v", tr.v}};
  }
  csv::write_table(cfg.propagator_path, "U", sol.u, extra);

  double sup_err = 0.0, final_err = 0.0;
  if (cfg.method.kind != MethodSpec::Kind::Oracle) {
    const PropagatorTable reference = oracle::propagate(*p.h, {cfg.substeps});
    const oracle::Comparison cmp = oracle::compare(sol.u, reference);
    sup_err = cmp.sup_fro;
    final_err = cmp.final_fro;
    std::vector<double> t(p.grid.size());
    for (int k = 0; k < p.grid.size(); ++k) t[k] = p.grid[k];
    std::vector<csv::Column> cols{{"fro_error", cmp.per_t}};
    if (p.osc) {
      const auto mine = oscillator::trajectory_from(sol.u, p.osc->x0, p.osc->v0);
      const auto ref = oscillator::trajectory_from(reference, p.osc->x0, p.osc->v0);
      std::vector<double> dx(t.size());
      for (std::size_t k = 0; k < t.size(); ++k) dx[k] = std::abs(mine.x[k] - ref.x[k]);
      cols.emplace_back("x_error", std::move(dx));
    }
    csv::write_columns(cfg.comparison_path, t, cols);
  }

  out << "status=" << sol.status << " sup_err=" << sci(sup_err) << " final_err=" << sci(final_err) << " residuals=";
  for (std::size_t i = 0; i < sol.residuals.size(); ++i) out << (i ? ";" : "") << sci(sol.residuals[i]);
  out << '\n';
  return 0;
}

int classify(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  const Problem p = build(cfg);
  if (p.stark) {
    const double c = stark::estimate_c(*p.stark);
    if (stark::condition_residual(*p.stark, c) < cfg.eps_exact)
      out << "StarkExact(" << c << ")\n";
    else
      out << "StarkGeneric\n";
    return 0;
  }
  if (!p.coeffs) {
    out << "Generic\n";
    return 0;
  }
  const twolevel::Coeffs traceless = p.traceless ? *p.coeffs : twolevel::detrace(*p.h).coeffs;
  out << twolevel::classify(traceless, cfg.eps_class).to_string() << '\n';
  return 0;
}

int compare(const std::string& first, const std::string& second, const std::string& out_path, std::ostream& out,
            std::ostream& /*err*/) {
  csv::MatrixTable a = csv::read_table(first), b = csv::read_table(second);
  const Grid ga = csv::grid_of(a.t), gb = csv::grid_of(b.t);
  if (a.values.front().rows() != b.values.front().rows())
    throw NumericalError(Failure::GridMismatch, "tables hold matrices of different size");
  const oracle::Comparison cmp =
      oracle::compare(PropagatorTable(ga, std::move(a.values)), PropagatorTable(gb, std::move(b.values)));
  if (!out_path.empty()) csv::write_columns(out_path, a.t, {{"fro_error", cmp.per_t}});
  out << "sup_err=" << sci(cmp.sup_fro) << " final_err=" << sci(cmp.final_fro) << '\n';
  return 0;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NumericalError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const expr::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const expr::DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const pt::ptree_error& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace adiaprod::cli
