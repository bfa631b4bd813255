#include <iostream>

#include <CLI11.hpp>

#include "pqm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pqm - parabolic quasiminimizer laboratory"};
  app.set_version_flag("--version", pqm::cli::kToolVersion);

  pqm::cli::Invocation inv;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("command", inv.command, "experiment to run")
      ->required()
      ->check(CLI::IsMember(pqm::cli::command_names()));
  app.add_option("--config", inv.config, "JSON config document")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* out_opt = app.add_option("--out", out, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) inv.seed = seed;
  if (*out_opt) inv.out = out;
  return pqm::cli::run(inv, std::cout, std::cerr);
}
