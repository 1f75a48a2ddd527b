// Command-line front end: validate, run, sweep-speedup, spectral.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dzo/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed zeroth-order optimization experiments"};
  app.require_subcommand(1);

  std::string config;
  dzo::CliOptions opts;
  std::string out_dir;
  int workers = 0;
  std::vector<int> n_values;

  auto* validate = app.add_subcommand("validate", "Check a config and print spectral bounds");
  validate->add_option("config", config, "Config file")->required();

  auto* run = app.add_subcommand("run", "Run all seeds (and sweep points) of a config");
  run->add_option("config", config, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory (default: [output] dir, then $" +
                                        std::string(dzo::kOutDirEnv) + ")");
  run->add_flag("--allow-unvalidated", opts.allow_unvalidated,
                "Downgrade schedule bound violations to warnings");
  run->add_option("--workers", workers, "Worker threads per run")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep-speedup", "Measure the speedup in the number of agents");
  sweep->add_option("config", config, "Config file")->required();
  sweep->add_option("--n", n_values, "Agent counts, e.g. 1,4,16")->delimiter(',');
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_flag("--allow-unvalidated", opts.allow_unvalidated,
                  "Downgrade schedule bound violations to warnings");
  sweep->add_option("--workers", workers, "Worker threads per run")->check(CLI::PositiveNumber);

  auto* spectral = app.add_subcommand("spectral", "Print the graph spectral report as JSON");
  spectral->add_option("config", config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dzo::kExitConfig;
  }
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (workers > 0) opts.workers = workers;

  try {
    if (*validate) return dzo::CmdValidate(config, std::cout, std::cerr);
    if (*run) return dzo::CmdRun(config, opts, std::cout, std::cerr);
    if (*sweep) return dzo::CmdSweepSpeedup(config, n_values, opts, std::cout, std::cerr);
    if (*spectral) return dzo::CmdSpectral(config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dzo::kExitConfig;
  }
  return dzo::kExitConfig;
}
