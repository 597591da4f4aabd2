#pragma once

// Scenario runner behind the command-line tool.
//
// Config files are INI-style:
//
//   [scenario]
//   kind = generic2          ; generic2 | oscillator | stark | tabulated
//   tau = 1
//   steps = 2000
//   method = adiabatic(2)    ; adiabatic(L) | modified(L) | exact-class | dyson(n) | oracle
//
//   [generic2]               ; H = [[d + a, b], [c, d - a]], *_im for imaginary parts
//   a = sin(t)
//   b = 1
//   c = 1
//
//   [oscillator]
//   omega = 1 + 0.05*sin(0.1*t)
//   x0 = 1
//   v0 = 0
//
//   [stark]
//   lambda = 1
//   r = 1
//   theta = 0.3*t
//
//   [tabulated]
//   file = hamiltonian.csv
//
//   [tolerances]             ; all optional
//   [output]
//   propagator = u.csv
//   comparison = u.compare.csv

#include "adiaprod/expansion.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace adiaprod::cli {

enum class ScenarioKind { Generic2, Oscillator, Stark, Tabulated };

struct MethodSpec {
  enum class Kind { Adiabatic, Modified, ExactClass, Dyson, Oracle };
  Kind kind = Kind::Oracle;
  int order = 0;

  /// Throws ConfigError on unknown names or bad orders.
  static MethodSpec parse(const std::string& text);
  std::string to_string() const;
};

struct ComplexExpr {
  std::string re = "0";
  std::string im = "0";
};

struct RunConfig {
  ScenarioKind kind = ScenarioKind::Generic2;
  double tau = 1.0;
  int steps = 2000;
  MethodSpec method;

  ComplexExpr a, b, c, d;
  bool random = false;
  std::uint64_t seed = 0;

  std::string omega = "1";
  double x0 = 1.0;
  double v0 = 0.0;

  double lambda = 1.0;
  std::string r = "1";
  std::string theta = "0";

  std::string table_file;

  ExpansionOptions expansion;
  int substeps = 4;
  double eps_class = 1e-8;
  double eps_exact = 1e-10;
  double eps_det = 1e-8;

  std::string propagator_path;
  std::string comparison_path;
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::string> method;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const std::string& path, const Overrides& overrides = {});

/// Smooth random coefficients for generic2 scenarios, as expressions.
struct RandomCoefficients {
  ComplexExpr a, b, c;
};
RandomCoefficients random_coefficients(std::uint64_t seed);

/// Each returns a process exit status: 0 success, 1 configuration error,
/// 2 numerical failure (failure name first on the error stream).
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int classify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int compare(const std::string& first, const std::string& second, const std::string& out_path, std::ostream& out,
            std::ostream& err);

/// Runs body and maps exceptions to exit statuses.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace adiaprod::cli
