// qgraph: scenario-driven front end for star-graph Evans functions, maps and eigenvalue counts.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include <qgraph/cli.hpp>

using namespace qgraph;

namespace {

// Sends command output to --out when given, stdout otherwise.
int with_output(const std::string& path, const std::function<int(std::ostream&)>& f) {
  if (path.empty()) return f(std::cout);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidScenario, "cannot write " + path);
  return f(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evans functions, Dirichlet-to-Neumann maps and eigenvalue counts on quantum star graphs"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, out_dir, which = "single", example_name;
  std::optional<std::size_t> grid;
  std::optional<std::uint64_t> seed;

  auto* evans_cmd = app.add_subcommand("evans", "Sweep the Evans functions over the scenario's lambda range (CSV)");
  auto* count_cmd = app.add_subcommand("count", "Count eigenvalues and check the counting identity");
  auto* verify_cmd = app.add_subcommand("verify", "Residual table for one family of identities");
  auto* example_cmd = app.add_subcommand("example", "Write the scenario and CSV data of a worked example");

  for (auto* c : {evans_cmd, count_cmd, verify_cmd}) {
    c->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    c->add_option("--out", out_path, "Output file (default: stdout)");
  }
  evans_cmd->add_option("--grid", grid, "Number of lambda samples (overrides sweep.samples)");
  count_cmd->add_option("--grid", grid, "Counting grid size (overrides options.grid)");
  verify_cmd->add_option("--which", which, "single|double|minors|resolvent|projections|ugamma")
      ->check(CLI::IsMember({"single", "double", "minors", "resolvent", "projections", "ugamma"}));
  verify_cmd->add_option("--seed", seed, "Seed for randomized checks (overrides options.seed)");
  verify_cmd->add_option("--grid", grid, "Number of lambda samples (overrides options.trials)");
  example_cmd->add_option("name", example_name, "barrier_end|barrier_interior|two_wire")
      ->required()
      ->check(CLI::IsMember({"barrier_end", "barrier_interior", "two_wire"}));
  example_cmd->add_option("--out", out_dir, "Output directory")->default_val(".");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  return run_guarded(
      [&]() -> int {
        if (*example_cmd) {
          cmd_example(example_name, out_dir, std::cout);
          return kExitOk;
        }
        Scenario s = load_scenario(scenario_path);
        if (*evans_cmd) {
          if (grid) s.sweep.samples = *grid;
          return with_output(out_path, [&](std::ostream& o) { return cmd_evans(s, o); });
        }
        if (*count_cmd) {
          if (grid) s.options.grid = *grid;
          return with_output(out_path, [&](std::ostream& o) { return cmd_count(s, o); });
        }
        if (grid) s.options.trials = *grid;
        const Check check = parse_check(which);
        const std::uint64_t sd = seed.value_or(s.options.seed);
        return with_output(out_path, [&](std::ostream& o) { return cmd_verify(s, check, sd, o); });
      },
      std::cerr);
}
