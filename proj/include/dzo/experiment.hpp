#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dzo/config.hpp"
#include "dzo/engine.hpp"
#include "dzo/graph.hpp"
#include "dzo/problem.hpp"
#include "dzo/schedule.hpp"

namespace dzo {

// Environment variable naming the output directory when neither --out nor
// [output] dir is given.
inline constexpr const char* kOutDirEnv = "DZO_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "dzo_out";

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitDivergence = 2 };

struct RunSection {
  long long T = 0;
  long long record_every = 1;
  std::vector<std::uint64_t> seeds;
  // Set when seeds were given as a count: seed_j = base_seed + j.
  std::optional<std::uint64_t> base_seed;
  int workers = 1;
  X0Policy x0 = X0Policy::Gaussian(1.0);
  std::optional<std::string> sweep_axis;  // "n", "p" or "regime"
  std::vector<std::string> sweep_values;
};

struct OutputSection {
  std::optional<std::string> dir;
  std::set<std::string> formats{"csv", "json", "svg"};
};

struct ExperimentConfig {
  ProblemSpec problem;
  GraphSpec graph;
  Schedule schedule;
  RunSection run;
  OutputSection output;
};

ExperimentConfig ParseExperiment(const ConfigDocument& doc);
ExperimentConfig LoadExperiment(const std::string& path);

// Copy of `cfg` with one sweep axis set to `value`.
ExperimentConfig WithAxis(const ExperimentConfig& cfg, const std::string& axis,
                          const std::string& value);

struct CliOptions {
  std::optional<std::string> out_dir;
  bool allow_unvalidated = false;
  std::optional<int> workers;
};

int CmdValidate(const std::string& path, std::ostream& out, std::ostream& err);
int CmdRun(const std::string& path, const CliOptions& opts, std::ostream& out, std::ostream& err);
// n_values empty means: take them from [run] sweep_values with sweep_axis = "n".
int CmdSweepSpeedup(const std::string& path, const std::vector<int>& n_values,
                    const CliOptions& opts, std::ostream& out, std::ostream& err);
int CmdSpectral(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace dzo
