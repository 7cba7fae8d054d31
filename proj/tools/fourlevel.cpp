#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fourlevel/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Inverse-engineered Hamiltonians for four-level systems"};
  app.require_subcommand(1, 1);

  std::string scenario;
  std::string out_dir;
  int steps = 0;
  std::uint64_t seed = 0;

  const char* help[] = {
      "solve", "solve for the boundary angles and write solution.json",
      "simulate", "propagate the engineered Hamiltonian and write couplings.csv, populations.csv",
      "qomap", "map the diamond Hamiltonian to laser fields and write qomap.json, rabi.csv",
      "verify", "run the invariant checks on the scenario and write verify.json",
  };
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 8; i += 2) {
    auto* sub = app.add_subcommand(help[i], help[i + 1]);
    sub->add_option("--scenario", scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--steps", steps, "integration steps (>= 100), overrides the scenario");
    sub->add_option("--seed", seed, "multi-start RNG seed, overrides the scenario");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fourlevel::kExitValidation;
  }

  CLI::App* used = app.get_subcommands().front();
  fourlevel::Overrides ov;
  if (used->count("--steps")) ov.steps = steps;
  if (used->count("--seed")) ov.seed = seed;
  const auto cmd = fourlevel::parse_command(used->get_name());
  return fourlevel::run(*cmd, scenario, out_dir, ov, std::cout, std::cerr);
}
