#include <iostream>

#include <CLI11.hpp>

#include "urbanflow/cli.hpp"

int main(int argc, char** argv) {
  using namespace urbanflow::cli;

  CLI::App app{"Urban wind and pollutant dispersion pipeline"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Invocation inv;
  std::string config, output;
  std::uint64_t seed = 0;
  double mu = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Scenario INI file")->required();
    sub->add_option("--output", output, "Output directory (overrides URBANFLOW_OUTPUT_DIR and the config)");
    sub->add_option("--seed", seed, "Seed for random test samples");
  };
  for (const char* name : {"mesh", "wind", "transport", "run-all"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "run-all") sub->add_option("--mu", mu, "Parameter of the online ROM solve");
  }
  CLI::App* rom = app.add_subcommand("rom", "Reduced-order model phases");
  add_common(rom);
  rom->add_option("phase", inv.phase, "offline | online | benchmark")
      ->required()
      ->check(CLI::IsMember({"offline", "online", "benchmark"}));
  rom->add_option("--mu", mu, "Parameter of the online solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  inv.command = chosen->get_name();
  inv.config = config;
  if (chosen->count("--output")) inv.output = output;
  if (chosen->count("--seed")) inv.seed = seed;
  if (chosen->get_option_no_throw("--mu") && chosen->count("--mu")) inv.mu = mu;
  return execute(inv, std::cout, std::cerr);
}
