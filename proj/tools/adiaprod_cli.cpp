#include "adiaprod/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace adiaprod::cli;

  CLI::App app{"Adiabatic product expansions for time-dependent Hamiltonians"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string out, method;
  int steps = 0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", config_path, "INI scenario file")->required();
    if (with_out) sub->add_option("--out", out, "propagator CSV path");
    sub->add_option("--method", method, "adiabatic(L), modified(L), exact-class, dyson(n) or oracle");
    sub->add_option("--steps", steps, "number of grid intervals");
    sub->add_option("--seed", seed, "seed for random generic2 coefficients");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "solve a scenario and write the propagator");
  add_common(run_cmd, true);
  CLI::App* classify_cmd = app.add_subcommand("classify", "report the exactly solvable class of a scenario");
  add_common(classify_cmd, false);

  CLI::App* compare_cmd = app.add_subcommand("compare", "compare two propagator CSV files");
  std::string first, second, compare_out;
  compare_cmd->add_option("first", first, "propagator CSV")->required();
  compare_cmd->add_option("second", second, "propagator CSV")->required();
  compare_cmd->add_option("--out", compare_out, "per-time error CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto collect = [&](CLI::App* sub) {
    if (sub->get_option_no_throw("--out") && sub->count("--out")) overrides.out = out;
    if (sub->count("--method")) overrides.method = method;
    if (sub->count("--steps")) overrides.steps = steps;
    if (sub->count("--seed")) overrides.seed = seed;
  };

  if (*run_cmd) {
    collect(run_cmd);
    return guarded([&] { return run(load_config(config_path, overrides), std::cout, std::cerr); }, std::cerr);
  }
  if (*classify_cmd) {
    collect(classify_cmd);
    return guarded([&] { return classify(load_config(config_path, overrides), std::cout, std::cerr); }, std::cerr);
  }
  return guarded([&] { return compare(first, second, compare_out, std::cout, std::cerr); }, std::cerr);
}
