#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "marsupial/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tethered UAV-UGV inspection planning, simulation and benchmarks", "marsupial-nav"};
  app.set_version_flag("--version", marsupial::cli::tool_version());
  app.require_subcommand(1);

  marsupial::cli::RunOptions opts;
  std::uint64_t seed = 0;
  std::string config, out, input;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"plan", "Tether-aware RRT* through the inspection plan"},
      {"optimize", "Optimize a planned path into a timed trajectory"},
      {"simulate", "Closed-loop mission simulation with marker detection"},
      {"localize-bench", "DLL vs ICP localization benchmark"},
      {"endurance", "Battery state of charge over time"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Scenario config (JSON)")->required();
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--seed", seed, "Replace the config seed");
    sub->add_option("--set", opts.sets, "Override a config value: dotted.key=json")->take_all();
    if (name == "optimize") sub->add_option("--input", input, "Path or trajectory JSON (default <out>/path.json)");
    if (name == "simulate") sub->add_option("--input", input, "Trajectory JSON (default <out>/trajectory.json)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : marsupial::cli::kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  opts.config = config;
  opts.out = out;
  opts.input = input;
  if (sub->count("--seed") > 0) opts.seed = seed;
  return marsupial::cli::run_command(sub->get_name(), opts);
}
