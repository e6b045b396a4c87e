#include <string>

#include <CLI11.hpp>

#include "rkf/cli.hpp"
#include "rkf/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimax robust Kalman filtering under a Kullback-Leibler tolerance ball: "
               "forward analysis, least favorable model synthesis, filter comparison"};
  app.set_version_flag("--version", rkf::kVersion);
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_override;
  const char* descriptions[][2] = {
      {"analyze", "Run the forward robust recursion and write the steady state"},
      {"synthesize", "Build the least favorable model (implies analyze)"},
      {"compare", "Evaluate Kalman vs robust gains under the least favorable model "
                  "(implies synthesize)"},
      {"certificate-sweep", "Write the certificate margin over the rho grid"},
  };
  for (auto& d : descriptions) {
    CLI::App* sub = app.add_subcommand(d[0], d[1]);
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_override, "Output directory (overrides the scenario's)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help/--version; anything else is a usage error.
    return code == 0 ? 0 : rkf::cli::kExitInputError;
  }

  return rkf::cli::run(app.get_subcommands().front()->get_name(), scenario_path, out_override);
}
