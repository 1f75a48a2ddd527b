#include "dzo/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "dzo/metrics.hpp"
#include "dzo/report.hpp"

namespace dzo {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kSections{"problem", "graph", "schedule", "run", "output"};
const Metric kMetrics[] = {Metric::kFGap, Metric::kGradNormSq, Metric::kConsensusErr};

RunSection RunFromSection(const ConfigSection& s) {
  s.RequireKnownKeys({"T", "record_every", "seeds", "base_seed", "workers", "x0", "x0_scale",
                      "x0_given", "sweep_axis", "sweep_values"});
  RunSection r;
  r.T = s.Get("T").AsInt("T");
  if (r.T < 1) throw ConfigError("line " + std::to_string(s.Get("T").line) + ", key 'T': T must be >= 1");
  r.record_every = s.IntOr("record_every", 1);
  if (r.record_every < 1) throw ConfigError("[run] record_every must be >= 1");
  r.workers = static_cast<int>(s.IntOr("workers", 1));

  const ConfigValue& seeds = s.Has("seeds") ? s.Get("seeds") : ConfigValue{1.0, s.line()};
  if (seeds.is_array()) {
    if (s.Has("base_seed"))
      throw ConfigError("line " + std::to_string(seeds.line) +
                        ": base_seed only applies when seeds is a count");
    for (long long v : seeds.AsIntList("seeds")) {
      if (v < 0) throw ConfigError("line " + std::to_string(seeds.line) + ", key 'seeds': negative seed");
      r.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  } else {
    const long long count = seeds.AsInt("seeds");
    const long long base = s.IntOr("base_seed", 0);
    if (base < 0) throw ConfigError("[run] base_seed must be >= 0");
    r.base_seed = static_cast<std::uint64_t>(base);
    for (long long j = 0; j < count; ++j) r.seeds.push_back(*r.base_seed + j);
  }
  if (r.seeds.empty())
    throw ConfigError("line " + std::to_string(seeds.line) + ", key 'seeds': no seeds");

  const std::string x0 = s.OptString("x0").value_or("gaussian");
  if (x0 == "zeros") {
    r.x0 = X0Policy::Zeros();
  } else if (x0 == "gaussian") {
    r.x0 = X0Policy::Gaussian(s.DoubleOr("x0_scale", 1.0));
  } else if (x0 == "given") {
    const Eigen::MatrixXd m = s.Get("x0_given").AsMatrix("x0_given");
    r.x0 = X0Policy::Given(m);
  } else {
    throw ConfigError("line " + std::to_string(s.Get("x0").line) + ", key 'x0': unknown policy '" +
                      x0 + "' (zeros, gaussian, given)");
  }
  if (x0 != "given" && s.Has("x0_given"))
    throw ConfigError("[run] x0_given requires x0 = \"given\"");

  if (s.Has("sweep_axis")) {
    r.sweep_axis = s.Get("sweep_axis").AsString("sweep_axis");
    if (*r.sweep_axis != "n" && *r.sweep_axis != "p" && *r.sweep_axis != "regime")
      throw ConfigError("line " + std::to_string(s.Get("sweep_axis").line) +
                        ", key 'sweep_axis': expected n, p or regime");
    for (const auto& v : s.Get("sweep_values").AsArray("sweep_values"))
      r.sweep_values.push_back(v.is_string() ? v.AsString("sweep_values")
                                             : FormatNumber(v.AsDouble("sweep_values")));
    if (r.sweep_values.empty()) throw ConfigError("[run] sweep_values is empty");
  } else if (s.Has("sweep_values")) {
    throw ConfigError("[run] sweep_values requires sweep_axis");
  }
  return r;
}

OutputSection OutputFromSection(const ConfigSection& s) {
  s.RequireKnownKeys({"dir", "formats"});
  OutputSection o;
  o.dir = s.OptString("dir");
  if (s.Has("formats")) {
    o.formats.clear();
    for (const auto& f : s.Get("formats").AsStringList("formats")) {
      if (f != "csv" && f != "json" && f != "svg")
        throw ConfigError("line " + std::to_string(s.Get("formats").line) +
                          ", key 'formats': unknown format '" + f + "'");
      o.formats.insert(f);
    }
  }
  return o;
}

std::string ResolveOutDir(const ExperimentConfig& cfg, const CliOptions& opts) {
  if (opts.out_dir) return *opts.out_dir;
  if (cfg.output.dir) return *cfg.output.dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return kDefaultOutDir;
}

struct Built {
  Problem problem;
  Graph graph;
};

Built BuildAll(const ExperimentConfig& cfg) {
  return {BuildProblem(cfg.problem), BuildGraph(cfg.graph)};
}

json MeanCiJson(const MeanCi& m) {
  json j;
  j["mean"] = std::isfinite(m.mean) ? json(m.mean) : json(nullptr);
  j["ci95"] = std::isfinite(m.half_width) ? json(m.half_width) : json(nullptr);
  j["count"] = m.count;
  return j;
}

json FitJson(const std::vector<long long>& k, const std::vector<double>& v, long long lo,
             long long hi, AvgMode mode) {
  try {
    const RateFit f = FitRate(k, v, lo, hi, mode);
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
            {"window", {f.k_lo, f.k_hi}}, {"points", f.points}};
  } catch (const std::invalid_argument&) {
    return nullptr;
  }
}

struct PointResult {
  std::vector<Trace> completed;
  std::vector<Trace> diverged;
  std::optional<AggregateCurve> curve;
  json summary;
  std::vector<std::string> files;  // relative to the output root
};

// Runs every seed of one configuration and writes its artifacts under
// root/sub (sub may be empty).
PointResult RunPoint(const ExperimentConfig& cfg, const Built& built, int workers,
                     const fs::path& root, const std::string& sub, std::ostream& out) {
  PointResult res;
  const fs::path dir = sub.empty() ? root : root / sub;
  fs::create_directories(dir);
  const auto rel = [&](const std::string& name) { return sub.empty() ? name : sub + "/" + name; };
  const bool csv = cfg.output.formats.count("csv") > 0;

  for (std::uint64_t seed : cfg.run.seeds) {
    RunOptions ro;
    ro.T = cfg.run.T;
    ro.record_every = cfg.run.record_every;
    ro.seed = seed;
    ro.x0 = cfg.run.x0;
    ro.workers = workers;
    Trace trace;
    try {
      trace = Run(built.problem, built.graph, cfg.schedule, ro);
      res.completed.push_back(trace);
    } catch (const DivergenceError& e) {
      trace = e.partial;
      res.diverged.push_back(trace);
      out << "seed " << seed << ": " << e.what() << "\n";
    }
    if (csv) {
      const std::string name = "trace_seed" + std::to_string(seed) + ".csv";
      WriteFileAtomic((dir / name).string(), TraceCsv(trace));
      res.files.push_back(rel(name));
    }
  }

  json s;
  s["regime"] = std::string(RegimeName(cfg.schedule.regime));
  s["problem"] = std::string(ProblemKindName(cfg.problem.options.kind));
  s["n"] = built.problem.n();
  s["p"] = built.problem.p();
  s["T"] = cfg.run.T;
  s["record_every"] = cfg.run.record_every;
  s["seeds"] = cfg.run.seeds;
  s["seed_rule"] = cfg.run.base_seed
                       ? "seed_j = base_seed + j with base_seed = " + std::to_string(*cfg.run.base_seed)
                       : std::string("explicit list");
  s["graph"] = SpectralReport(built.graph);
  s["graph"]["summary"] = GraphSummary(built.graph);
  s["noise"] = {{"sigma0", built.problem.noise().sigma0},
                {"sigma1", built.problem.noise().sigma1},
                {"sigma0_tilde", built.problem.noise().sigma0_tilde},
                {"sigma2", built.problem.noise().sigma2}};
  s["lf"] = built.problem.lf();
  s["completed_seeds"] = res.completed.size();
  s["diverged_seeds"] = res.diverged.size();
  json runs = json::array();
  for (const auto* group : {&res.completed, &res.diverged})
    for (const auto& t : *group) runs.push_back(TraceMetaJson(t.meta));
  s["runs"] = runs;

  if (!res.completed.empty()) {
    res.curve = Aggregate(res.completed);
    const auto& c = *res.curve;
    json fin, slopes;
    for (Metric m : kMetrics) {
      const std::string name(MetricName(m));
      fin[name] = MeanCiJson(c.Of(m).back());
      const auto means = c.Means(m);
      slopes[name] = {{"per_k", FitJson(c.k, means, cfg.run.T / 10, cfg.run.T, AvgMode::kPerK)},
                      {"running_average", FitJson(c.k, means, cfg.run.T / 10, cfg.run.T,
                                                  AvgMode::kRunningAverage)}};
    }
    s["final"] = fin;
    s["slopes"] = slopes;
    std::vector<double> avg_grad, avg_gap;
    for (const auto& t : res.completed) {
      avg_grad.push_back(t.meta.avg_grad_norm_sq);
      avg_gap.push_back(t.meta.avg_f_gap);
    }
    s["avg_grad_norm_sq"] = MeanCiJson(ComputeMeanCi(avg_grad));
    s["avg_f_gap"] = MeanCiJson(ComputeMeanCi(avg_gap));

    if (csv) {
      WriteFileAtomic((dir / "aggregate.csv").string(), AggregateCsv(c));
      res.files.push_back(rel("aggregate.csv"));
    }
    if (cfg.output.formats.count("svg")) {
      std::vector<PlotSeries> series;
      for (Metric m : kMetrics) {
        const std::string name(MetricName(m));
        series.push_back({name, c.k, c.Means(m)});
        WriteFileAtomic((dir / ("plot_" + name + ".dat")).string(), PlotDat(c.k, c.Means(m)));
        res.files.push_back(rel("plot_" + name + ".dat"));
      }
      WriteFileAtomic((dir / "plot.svg").string(),
                      SvgLogLogChart(s["regime"].get<std::string>() + ", n=" +
                                         std::to_string(built.problem.n()) + ", p=" +
                                         std::to_string(built.problem.p()),
                                     series));
      res.files.push_back(rel("plot.svg"));
    }
  }
  if (cfg.output.formats.count("json")) {
    WriteFileAtomic((dir / "summary.json").string(), s.dump(2) + "\n");
    res.files.push_back(rel("summary.json"));
  }
  res.summary = std::move(s);
  return res;
}

void WriteManifest(const fs::path& root, const std::string& command, const std::string& config,
                   const std::vector<std::string>& files, int exit_code) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["files"] = files;
  m["exit_code"] = exit_code;
  WriteFileAtomic((root / "manifest.json").string(), m.dump(2) + "\n");
}

// Builds, validates and reports. Returns false after printing when the
// schedule has hard errors.
bool CheckSchedule(const ExperimentConfig& cfg, const Built& built, std::ostream& err) {
  const Diagnostics d = Validate(cfg.schedule, built.graph, built.problem);
  err << d.ToString();
  return !d.HasErrors();
}

template <typename Fn>
int Guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const GraphError& e) {
    err << "graph error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
  } catch (const std::out_of_range& e) {
    err << "invalid configuration: " << e.what() << "\n";
  }
  return kExitConfig;
}

std::string Fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

ExperimentConfig ParseExperiment(const ConfigDocument& doc) {
  doc.RequireKnownSections(kSections);
  ExperimentConfig cfg;
  cfg.problem = ProblemSpecFromSection(doc.Section("problem"));
  cfg.graph = GraphSpecFromSection(doc.Section("graph"), cfg.problem.options.n, cfg.problem.seed);
  cfg.schedule = ScheduleFromSection(doc.Section("schedule"));
  cfg.run = RunFromSection(doc.Section("run"));
  if (doc.Has("output")) cfg.output = OutputFromSection(doc.Section("output"));
  if (!cfg.schedule.T) cfg.schedule.T = cfg.run.T;
  return cfg;
}

ExperimentConfig LoadExperiment(const std::string& path) {
  return ParseExperiment(ConfigDocument::Load(path));
}

ExperimentConfig WithAxis(const ExperimentConfig& cfg, const std::string& axis,
                          const std::string& value) {
  ExperimentConfig c = cfg;
  const auto as_count = [&]() {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (value.empty() || *end != '\0' || v < 1)
      throw ConfigError("sweep value '" + value + "' for axis " + axis +
                        " is not a positive integer");
    return static_cast<int>(v);
  };
  if (axis == "n") {
    const int n = as_count();
    if (cfg.graph.params.weights)
      throw ConfigError("cannot sweep n over a graph given by explicit weights");
    if (!cfg.problem.options.offsets.empty())
      throw ConfigError("cannot sweep n with explicit per-agent offsets");
    c.problem.options.n = n;
    c.graph.n = n;
    if (c.run.x0.kind == X0Policy::Kind::kGiven)
      throw ConfigError("cannot sweep n with a given x0 matrix");
  } else if (axis == "p") {
    c.problem.options.p = as_count();
    if (c.run.x0.kind == X0Policy::Kind::kGiven)
      throw ConfigError("cannot sweep p with a given x0 matrix");
  } else if (axis == "regime") {
    try {
      c.schedule.regime = ParseRegime(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  return c;
}

int CmdValidate(const std::string& path, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const ExperimentConfig cfg = LoadExperiment(path);
    const Built built = BuildAll(cfg);
    const Graph& g = built.graph;
    out << "agents n = " << g.n() << ", dimension p = " << built.problem.p() << "\n";
    out << "rho(L)    = " << Fixed(g.rho()) << "\n";
    out << "rho2(L)   = " << Fixed(g.rho2()) << "\n";
    if (g.n() > 1) {
      const double c1 = AdvisorC1(g);
      out << "c1        = " << Fixed(c1) << "\n";
      if (cfg.schedule.kappa1 && *cfg.schedule.kappa1 > c1)
        out << "c2(kappa1 = " << Fixed(*cfg.schedule.kappa1)
            << ") = " << Fixed(AdvisorC2(g, *cfg.schedule.kappa1)) << "\n";
      else
        out << "c2        = n/a (needs kappa1 > c1)\n";
      const double d1 = AdvisorD1(g);
      out << "d1        = " << Fixed(d1) << "\n";
      const auto& gamma = cfg.schedule.gamma;
      if (gamma && *gamma > 0 && *gamma < d1 && built.problem.lf() > 0) {
        const auto& nz = built.problem.noise();
        out << "d2(gamma = " << Fixed(*gamma) << ") = "
            << Fixed(AdvisorD2(g, *gamma, built.problem.lf(), nz.sigma0, nz.sigma0_tilde,
                               built.problem.p()))
            << "\n";
      } else {
        out << "d2        = n/a (needs gamma in (0, d1) and L_f > 0)\n";
      }
    }
    out << "L_f       = " << Fixed(built.problem.lf()) << "\n";
    if (built.problem.pl_nu()) out << "nu        = " << Fixed(*built.problem.pl_nu()) << "\n";
    const Diagnostics d = Validate(cfg.schedule, g, built.problem);
    out << d.ToString();
    out << (d.HasErrors() ? "schedule: INVALID\n" : "schedule: ok\n");
    return d.HasErrors() ? kExitConfig : kExitOk;
  });
}

int CmdSpectral(const std::string& path, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const ExperimentConfig cfg = LoadExperiment(path);
    out << SpectralReport(BuildGraph(cfg.graph)).dump(2) << "\n";
    return kExitOk;
  });
}

int CmdRun(const std::string& path, const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&]() -> int {
    ExperimentConfig cfg = LoadExperiment(path);
    if (opts.allow_unvalidated) cfg.schedule.allow_unvalidated = true;
    const int workers = opts.workers.value_or(cfg.run.workers);
    const fs::path root = ResolveOutDir(cfg, opts);
    fs::create_directories(root);

    std::vector<std::string> values{""};
    if (cfg.run.sweep_axis) values = cfg.run.sweep_values;
    std::vector<std::pair<ExperimentConfig, Built>> points;
    for (const auto& v : values) {
      ExperimentConfig c = v.empty() ? cfg : WithAxis(cfg, *cfg.run.sweep_axis, v);
      Built b = BuildAll(c);
      if (!v.empty()) err << "[" << *cfg.run.sweep_axis << " = " << v << "]\n";
      if (!CheckSchedule(c, b, err)) return kExitConfig;
      points.emplace_back(std::move(c), std::move(b));
    }

    std::vector<std::string> files;
    bool diverged = false;
    json sweep = json::array();
    std::vector<PlotSeries> overlay;
    std::string table = "value,final_grad_norm_sq_mean,final_grad_norm_sq_ci,avg_grad_norm_sq_mean,avg_grad_norm_sq_ci,ratio_vs_first\n";
    double first_final = std::nan("");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::string sub = values[i].empty() ? "" : *cfg.run.sweep_axis + "_" + values[i];
      PointResult r = RunPoint(points[i].first, points[i].second, workers, root, sub, out);
      files.insert(files.end(), r.files.begin(), r.files.end());
      diverged = diverged || !r.diverged.empty();
      out << (sub.empty() ? std::string("run") : sub) << ": " << r.completed.size()
          << " seeds completed, " << r.diverged.size() << " diverged\n";
      if (r.curve) {
        const MeanCi fin = r.curve->grad_norm_sq.back();
        out << "  final grad_norm_sq = " << Fixed(fin.mean) << " +- " << Fixed(fin.half_width)
            << "\n";
        const MeanCi& gap = r.curve->f_gap.back();
        if (std::isfinite(gap.mean))
          out << "  final f_gap = " << Fixed(gap.mean) << " +- " << Fixed(gap.half_width) << "\n";
        if (!sub.empty()) {
          if (i == 0) first_final = fin.mean;
          const MeanCi avg = ComputeMeanCi([&] {
            std::vector<double> a;
            for (const auto& t : r.completed) a.push_back(t.meta.avg_grad_norm_sq);
            return a;
          }());
          table += values[i] + "," + FormatCsvNumber(fin.mean) + "," +
                   FormatCsvNumber(fin.half_width) + "," + FormatCsvNumber(avg.mean) + "," +
                   FormatCsvNumber(avg.half_width) + "," + FormatCsvNumber(fin.mean / first_final) +
                   "\n";
          sweep.push_back({{"value", values[i]}, {"summary", r.summary}});
          overlay.push_back({*cfg.run.sweep_axis + "=" + values[i], r.curve->k,
                             r.curve->Means(Metric::kGradNormSq)});
        }
      }
    }
    if (cfg.run.sweep_axis) {
      WriteFileAtomic((root / "sweep.csv").string(), table);
      files.push_back("sweep.csv");
      if (cfg.output.formats.count("json")) {
        WriteFileAtomic((root / "sweep.json").string(),
                        json{{"axis", *cfg.run.sweep_axis}, {"points", sweep}}.dump(2) + "\n");
        files.push_back("sweep.json");
      }
      if (cfg.output.formats.count("svg") && !overlay.empty()) {
        WriteFileAtomic((root / "sweep_grad_norm_sq.svg").string(),
                        SvgLogLogChart("mean grad_norm_sq by " + *cfg.run.sweep_axis, overlay));
        files.push_back("sweep_grad_norm_sq.svg");
      }
    }
    const int code = diverged ? kExitDivergence : kExitOk;
    WriteManifest(root, "run", path, files, code);
    out << "outputs in " << root.string() << "\n";
    return code;
  });
}

int CmdSweepSpeedup(const std::string& path, const std::vector<int>& n_values,
                    const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&]() -> int {
    ExperimentConfig cfg = LoadExperiment(path);
    if (opts.allow_unvalidated) cfg.schedule.allow_unvalidated = true;
    if (cfg.schedule.regime != Regime::kPdSpeedup && cfg.schedule.regime != Regime::kPrimalSpeedup)
      throw ConfigError("sweep-speedup needs regime pd_speedup or primal_speedup, got " +
                        std::string(RegimeName(cfg.schedule.regime)));
    std::vector<int> ns = n_values;
    if (ns.empty()) {
      if (cfg.run.sweep_axis != "n")
        throw ConfigError("no --n values and [run] sweep_axis is not \"n\"");
      for (const auto& v : cfg.run.sweep_values) ns.push_back(std::stoi(v));
    }
    if (ns.empty()) throw ConfigError("no agent counts to sweep");
    const int workers = opts.workers.value_or(cfg.run.workers);
    const fs::path root = ResolveOutDir(cfg, opts);
    fs::create_directories(root);

    std::vector<std::pair<ExperimentConfig, Built>> points;
    for (int n : ns) {
      ExperimentConfig c = WithAxis(cfg, "n", std::to_string(n));
      Built b = BuildAll(c);
      err << "[n = " << n << "]\n";
      if (!CheckSchedule(c, b, err)) return kExitConfig;
      points.emplace_back(std::move(c), std::move(b));
    }

    std::vector<std::string> files;
    bool diverged = false;
    json rows = json::array();
    std::vector<PlotSeries> overlay;
    std::string table =
        "n,avg_grad_norm_sq_mean,avg_grad_norm_sq_ci,ratio_vs_base,theory_ratio,"
        "final_grad_norm_sq_mean,slope,slope_ratio,theory_slope_ratio\n";
    double base_mean = std::nan(""), base_slope = std::nan("");
    const int base_n = ns.front();
    out << "n      avg(1/T sum ||grad f||^2)   ci95        ratio   theory  slope\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int n = ns[i];
      PointResult r = RunPoint(points[i].first, points[i].second, workers, root,
                               "n_" + std::to_string(n), out);
      files.insert(files.end(), r.files.begin(), r.files.end());
      diverged = diverged || !r.diverged.empty();
      std::vector<double> avg;
      for (const auto& t : r.completed) avg.push_back(t.meta.avg_grad_norm_sq);
      const MeanCi m = ComputeMeanCi(avg);
      double slope = std::nan(""), final_mean = std::nan("");
      if (r.curve) {
        final_mean = r.curve->grad_norm_sq.back().mean;
        try {
          slope = FitRate(r.curve->k, r.curve->Means(Metric::kGradNormSq), cfg.run.T / 10,
                          cfg.run.T, AvgMode::kPerK)
                      .slope;
        } catch (const std::invalid_argument&) {
        }
        overlay.push_back({"n=" + std::to_string(n), r.curve->k,
                           r.curve->Means(Metric::kGradNormSq)});
      }
      if (i == 0) {
        base_mean = m.mean;
        base_slope = slope;
      }
      const double ratio = m.mean / base_mean;
      const double theory = std::sqrt(static_cast<double>(base_n) / n);
      const double slope_ratio = slope / base_slope;
      table += std::to_string(n) + "," + FormatCsvNumber(m.mean) + "," +
               FormatCsvNumber(m.half_width) + "," + FormatCsvNumber(ratio) + "," +
               FormatCsvNumber(theory) + "," + FormatCsvNumber(final_mean) + "," +
               FormatCsvNumber(slope) + "," + FormatCsvNumber(slope_ratio) + "," +
               FormatCsvNumber(theory) + "\n";
      const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
      rows.push_back({{"n", n},
                      {"avg_grad_norm_sq", MeanCiJson(m)},
                      {"ratio_vs_base", num(ratio)},
                      {"theory_ratio", theory},
                      {"final_grad_norm_sq_mean", num(final_mean)},
                      {"slope", num(slope)},
                      {"slope_ratio", num(slope_ratio)},
                      {"theory_slope_ratio", theory},
                      {"diverged_seeds", r.diverged.size()}});
      char line[160];
      std::snprintf(line, sizeof(line), "%-6d %-27.6g %-11.3g %-7.4f %-7.4f %.4g\n", n, m.mean,
                    m.half_width, ratio, theory, slope);
      out << line;
    }
    WriteFileAtomic((root / "speedup.csv").string(), table);
    files.push_back("speedup.csv");
    json doc{{"regime", std::string(RegimeName(cfg.schedule.regime))},
             {"T", cfg.run.T},
             {"p", cfg.problem.options.p},
             {"base_n", base_n},
             {"theory", "avg grad_norm_sq scales as sqrt(p / (n T)); ratio vs base = sqrt(base_n / n)"},
             {"rows", rows}};
    WriteFileAtomic((root / "speedup.json").string(), doc.dump(2) + "\n");
    files.push_back("speedup.json");
    if (cfg.output.formats.count("svg") && !overlay.empty()) {
      WriteFileAtomic((root / "speedup_grad_norm_sq.svg").string(),
                      SvgLogLogChart("mean grad_norm_sq by n", overlay));
      files.push_back("speedup_grad_norm_sq.svg");
    }
    const int code = diverged ? kExitDivergence : kExitOk;
    WriteManifest(root, "sweep-speedup", path, files, code);
    out << "outputs in " << root.string() << "\n";
    return code;
  });
}

}  // namespace dzo
