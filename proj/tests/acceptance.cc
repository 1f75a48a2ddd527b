// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dzo/engine.hpp"
#include "dzo/estimator.hpp"
#include "dzo/metrics.hpp"
#include "dzo/thread_pool.hpp"

namespace dzo {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Graph MakeGraph(Topology t, int n) {
  GraphSpec spec;
  spec.topology = t;
  spec.n = n;
  return BuildGraph(spec);
}

Problem MakeProblem(ProblemOptions o, std::uint64_t seed) {
  CounterRng rng(seed, 1, 0, StreamPurpose::kConstruction);
  return Problem::Make(o, rng);
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<Trace> RunSeeds(const Problem& prob, const Graph& g, const Schedule& s, long long T,
                            long long record_every, int seeds, X0Policy x0) {
  std::vector<Trace> out(seeds);
  ThreadPool pool(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  pool.ParallelFor(seeds, [&](int j) {
    RunOptions opts;
    opts.T = T;
    opts.record_every = record_every;
    opts.seed = 1 + static_cast<std::uint64_t>(j);
    opts.x0 = x0;
    out[j] = Run(prob, g, s, opts);
  });
  return out;
}

// Traces collected along the way for the oracle-call audit.
std::vector<Trace> g_audit;

void Audit(const std::vector<Trace>& traces) {
  g_audit.insert(g_audit.end(), traces.begin(), traces.end());
}

Outcome Unbiasedness() {
  const auto start = std::chrono::steady_clock::now();
  ProblemOptions o;
  o.n = 1;
  o.p = 5;
  o.condition_number = 10.0;
  o.shift = 1.0;
  const Problem prob = MakeProblem(o, 41);
  CounterRng xr(41, 2);
  Vec x(5);
  for (int j = 0; j < 5; ++j) x(j) = xr.Normal();
  const Vec grad = prob.TrueGlobalGrad(x);
  const long m = 100000;
  const double delta = 0.1;
  CounterRng dir(41, 3, 0, StreamPurpose::kDirection);
  CounterRng noise(41, 3, 0, StreamPurpose::kNoise);
  Vec sum = Vec::Zero(5), sum_sq = Vec::Zero(5);
  for (long s = 0; s < m; ++s) {
    const Vec u = SampleSphere(5, dir);
    const XiSample xi = prob.DrawXi(0, noise);
    const Vec g = TwoPointEstimate(prob, 0, x, delta, u, xi).g;
    sum += g;
    sum_sq += g.cwiseAbs2();
  }
  const Vec mean = sum / m;
  double worst = 0.0;
  for (int j = 0; j < 5; ++j) {
    const double se = std::sqrt((sum_sq(j) / m - mean(j) * mean(j)) / (m - 1));
    worst = std::max(worst, std::fabs(mean(j) - grad(j)) / se);
  }
  const double t = Seconds(start);
  return {worst <= 3.0 && t < 5.0,
          "max |mean - grad| / SE = " + Fmt("%.3f", worst) + " (limit 3), " + Fmt("%.2f", t) +
              " s (limit 5)"};
}

Outcome SmoothingBias() {
  const auto start = std::chrono::steady_clock::now();
  ProblemOptions o;
  o.kind = ProblemKind::kSinPl;
  o.n = 1;
  o.p = 4;
  const Problem prob = MakeProblem(o, 42);
  CounterRng pick(42, 2);
  double worst = -1e300;
  bool ok = true;
  for (int pair = 0; pair < 20; ++pair) {
    Vec x(4);
    for (int j = 0; j < 4; ++j) x(j) = 2.0 * pick.Normal();
    const double delta = 0.05 + 0.95 * pick.Uniform();
    CounterRng rng(42, 100 + pair);
    const McVector mc = SmoothedGradMc(prob, x, delta, 1000000, rng);
    const double err = (mc.mean - prob.TrueGlobalGrad(x)).norm();
    const double bound = delta * prob.lf() + 3.0 * mc.std_error.norm();
    ok &= err <= bound;
    worst = std::max(worst, err / bound);
  }
  const double t = Seconds(start);
  return {ok && t < 30.0, "max ||grad f^s - grad f|| / (delta L_f + 3 SE) = " +
                              Fmt("%.4f", worst) + " over 20 pairs, " + Fmt("%.1f", t) +
                              " s (limit 30)"};
}

Outcome SecondMoment() {
  ProblemOptions o;
  o.kind = ProblemKind::kSinPl;
  o.n = 1;
  o.p = 6;
  const Problem prob = MakeProblem(o, 43);
  const int p = prob.p();
  const auto f = [&prob](const Vec& y) { return prob.FValue(y); };
  CounterRng pick(43, 2);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(p);
    for (int j = 0; j < p; ++j) x(j) = 2.0 * pick.Normal();
    const double delta = 0.5;
    CounterRng dir(43, 10 + trial);
    double second = 0.0;
    const long m = 100000;
    for (long s = 0; s < m; ++s) second += TwoPointEstimate(f, x, delta, SampleSphere(p, dir)).g.squaredNorm();
    second /= m;
    const double lf = prob.lf();
    const double bound = 2.0 * p * prob.TrueGlobalGrad(x).squaredNorm() +
                         0.5 * p * p * delta * delta * lf * lf;
    worst = std::max(worst, second / bound);
  }
  return {worst <= 1.05, "max E||g||^2 / bound = " + Fmt("%.4f", worst) + " (limit 1.05)"};
}

Problem NoisyHeterogeneous(int n, int p, std::uint64_t seed) {
  ProblemOptions o;
  o.kind = ProblemKind::kHeterogeneousQuadratic;
  o.n = n;
  o.p = p;
  o.condition_number = 5.0;
  o.shift = 1.0;
  o.scale_spread = 0.3;
  o.noise.sigma0 = 0.2;
  o.noise.sigma1 = 1.0;
  o.noise.sigma2 = 1.0;
  return MakeProblem(o, seed);
}

Schedule PdConstant(double beta, double kappa1, double kappa2, double kappa_delta,
                    double ratio) {
  Schedule s;
  s.regime = Regime::kPdConstant;
  s.kappa0 = beta;
  s.kappa1 = kappa1;
  s.kappa2 = kappa2;
  s.kappa_delta = kappa_delta;
  s.epsilon_tilde = ratio;
  return s;
}

Outcome DualSum() {
  const Problem prob = NoisyHeterogeneous(6, 4, 44);
  const Graph g = MakeGraph(Topology::kRing, 6);
  const Schedule s = PdConstant(1.0, 3.0, 0.02, 0.1, 0.9995);
  RunState st = InitState(prob, g, X0Policy::Gaussian(1.0), 44);
  double worst = 0.0;
  for (long long k = 0; k < 10000; ++k) {
    StepPrimalDual(st, ParamsAt(s, k, 6, 4), 1.0, prob, g);
    const double sum = st.v.colwise().sum().cwiseAbs().maxCoeff();
    const double scale = 1.0 + st.v.cwiseAbs().maxCoeff();
    worst = std::max(worst, sum / scale);
  }
  return {worst <= 1e-9, "max ||sum_i v_i||_inf / (1 + max ||v||_inf) = " +
                             Fmt("%.3e", worst) + " over 1e4 steps (limit 1e-9)"};
}

Outcome AverageDynamics() {
  const Problem prob = NoisyHeterogeneous(6, 4, 45);
  const Graph g = MakeGraph(Topology::kRing, 6);
  const Schedule s = PdConstant(1.0, 3.0, 0.02, 0.1, 0.999);
  RunState st = InitState(prob, g, X0Policy::Gaussian(1.0), 45);
  double worst = 0.0;
  for (long long k = 0; k < 1000; ++k) {
    const StepParams params = ParamsAt(s, k, 6, 4);
    const Vec xbar = st.x.colwise().mean().transpose();
    StepPrimalDual(st, params, 1.0, prob, g);
    const Vec gbar = st.last_estimates.colwise().mean().transpose();
    const Vec next = st.x.colwise().mean().transpose();
    worst = std::max(worst, (next - (xbar - params.eta * gbar)).norm() / (1.0 + xbar.norm()));
  }
  return {worst <= 1e-12,
          "max residual / (1 + ||xbar||) = " + Fmt("%.3e", worst) + " over 1e3 steps (limit 1e-12)"};
}

Outcome ConsensusContraction() {
  const int n = 8, p = 3;
  const Graph g = MakeGraph(Topology::kRing, n);
  ProblemOptions o;
  o.kind = ProblemKind::kLinearProbe;
  o.n = n;
  o.p = p;
  o.probe = Vec::Zero(p);
  const Problem prob = MakeProblem(o, 46);
  const double gamma = 0.1 * AdvisorD1(g);
  double predicted = 0.0;
  for (Eigen::Index i = 0; i < g.eigenvalues().size(); ++i)
    if (g.eigenvalues()(i) > 1e-9) predicted = std::max(predicted, std::fabs(1.0 - gamma * g.eigenvalues()(i)));

  RunState st = InitState(prob, g, X0Policy::Gaussian(1.0), 46);
  const StepParams params{0.0, 0.0, 0.01, gamma, 1e-3};
  const auto disagreement = [](const AgentMatrix& x) {
    return (x.rowwise() - x.colwise().mean()).norm();
  };
  const long long burn_in = 50, window = 500, horizon = 20000;
  double worst = 0.0;
  long long settled = -1;
  double prev = disagreement(st.x);
  for (long long k = 1; k <= horizon; ++k) {
    StepPrimal(st, params, 1.0, prob, g);
    const double cur = disagreement(st.x);
    const double dev = std::fabs(cur / prev - predicted);
    if (k > burn_in && k <= burn_in + window) worst = std::max(worst, dev);
    if (dev <= 1e-8 && settled < 0) settled = k;
    prev = cur;
    if (cur < 1e-200) break;
  }
  return {worst <= 1e-8,
          "max |ratio - max|1 - gamma lambda|| over steps 51..550 = " + Fmt("%.3e", worst) +
              " (limit 1e-8); first within 1e-8 at step " + std::to_string(settled) +
              ", predicted factor " + Fmt("%.10f", predicted)};
}

struct PlRuns {
  AggregateCurve pd;
  AggregateCurve primal;
  double pd_seconds = 0.0;
  double primal_seconds = 0.0;
};

constexpr long long kPlT = 20000;

Problem PlProblem() {
  ProblemOptions o;
  o.n = 5;
  o.p = 4;
  o.mu = 1.0;
  o.condition_number = 2.0;
  o.shift = 1.0;
  o.noise.sigma1 = 1.0;
  return MakeProblem(o, 47);
}

PlRuns RunPl() {
  const Problem prob = PlProblem();
  const Graph g = MakeGraph(Topology::kRing, 5);
  PlRuns out;

  Schedule pd;
  pd.regime = Regime::kPdPl;
  pd.kappa0 = 0.015;
  pd.kappa1 = 3.0;
  pd.kappa2 = 0.1;
  pd.kappa_delta = 1.0;
  pd.t1 = 100.0;
  auto start = std::chrono::steady_clock::now();
  std::vector<Trace> traces = RunSeeds(prob, g, pd, kPlT, 1, 20, X0Policy::Gaussian(1.0));
  out.pd_seconds = Seconds(start);
  out.pd = Aggregate(traces);
  Audit(traces);

  Schedule primal;
  primal.regime = Regime::kPrimalPl;
  primal.gamma = 0.1;
  primal.kappa_eta = 9.0;
  primal.kappa_delta = 1.0;
  primal.t1 = 100.0;
  start = std::chrono::steady_clock::now();
  traces = RunSeeds(prob, g, primal, kPlT, 1, 20, X0Policy::Gaussian(1.0));
  out.primal_seconds = Seconds(start);
  out.primal = Aggregate(traces);
  Audit(traces);
  return out;
}

Outcome GapRate(const AggregateCurve& c, double seconds) {
  const std::vector<double> gap = c.Means(Metric::kFGap);
  const RateFit f = FitRate(c.k, gap, kPlT / 10, kPlT, AvgMode::kRunningAverage);
  const RateFit per_k = FitRate(c.k, gap, kPlT / 10, kPlT, AvgMode::kPerK);
  const bool ok = std::fabs(f.slope + 1.0) <= 0.2 && seconds < 120.0;
  return {ok, "running-average slope " + Fmt("%.3f", f.slope) + " (target -1.0 +- 0.2, r2 " +
                  Fmt("%.3f", f.r2) + "); per-k slope " + Fmt("%.3f", per_k.slope) + "; " +
                  Fmt("%.1f", seconds) + " s for 20 seeds (limit 120)"};
}

Outcome ConsensusRate(const AggregateCurve& c) {
  const RateFit f =
      FitRate(c.k, c.Means(Metric::kConsensusErr), kPlT / 10, kPlT, AvgMode::kPerK);
  return {std::fabs(f.slope + 2.0) <= 0.4,
          "consensus slope " + Fmt("%.3f", f.slope) + " (target -2.0 +- 0.4, r2 " +
              Fmt("%.3f", f.r2) + ")"};
}

Outcome LinearConvergence() {
  ProblemOptions o;
  o.n = 5;
  o.p = 4;
  o.condition_number = 2.0;
  o.shift = 1.0;
  const Problem prob = MakeProblem(o, 48);
  const Graph g = MakeGraph(Topology::kRing, 5);
  const Schedule s = PdConstant(4.0, 3.0, 0.1, 0.1, 0.95);
  RunOptions opts;
  opts.T = 10000;
  opts.record_every = 1;
  opts.seed = 48;
  const Trace t = Run(prob, g, s, opts);
  Audit({t});
  long long hit = -1;
  for (const auto& r : t.records) {
    if (r.f_gap <= 1e-10) {
      hit = r.k;
      break;
    }
  }
  // The floor is the plateau over the last tenth of the run; the fit stops
  // at the first record within 10x of it.
  std::vector<double> tail;
  for (const auto& r : t.records)
    if (r.k >= opts.T - opts.T / 10) tail.push_back(r.f_gap);
  std::nth_element(tail.begin(), tail.begin() + tail.size() / 2, tail.end());
  const double floor = tail[tail.size() / 2];
  long long floor_k = t.records.back().k;
  for (const auto& r : t.records) {
    if (r.f_gap <= 10.0 * floor) {
      floor_k = r.k;
      break;
    }
  }
  std::vector<long long> k;
  std::vector<double> v;
  for (const auto& r : t.records) {
    k.push_back(r.k);
    v.push_back(r.f_gap);
  }
  const RateFit f = FitRate(k, v, 0, floor_k, AvgMode::kSemilog);
  const bool ok = f.r2 >= 0.99 && hit >= 0;
  return {ok, "semilog r2 " + Fmt("%.4f", f.r2) + " over k in [0, " + std::to_string(floor_k) +
                  "] (floor " + Fmt("%.2e", floor) + "), per-step factor " + Fmt("%.4f", std::exp(f.slope)) +
                  "; f_gap <= 1e-10 at k = " + std::to_string(hit) + " (limit 1e4)"};
}

Outcome Speedup() {
  const auto start = std::chrono::steady_clock::now();
  const long long T = 4000;
  double avg[2] = {0, 0};
  double ci[2] = {0, 0};
  const int ns[2] = {1, 16};
  for (int i = 0; i < 2; ++i) {
    ProblemOptions o;
    o.n = ns[i];
    o.p = 8;
    o.condition_number = 2.0;
    o.shift = 1.0;
    o.noise.sigma1 = 1.0;
    const Problem prob = MakeProblem(o, 49);
    const Graph g = MakeGraph(Topology::kRing, ns[i]);
    Schedule s;
    s.regime = Regime::kPdSpeedup;
    s.kappa1 = 3.0;
    s.kappa2 = 0.1;
    s.kappa_delta = 1.0;
    s.T = T;
    const std::vector<Trace> traces = RunSeeds(prob, g, s, T, 100, 20, X0Policy::Zeros());
    Audit(traces);
    std::vector<double> samples;
    for (const auto& t : traces) samples.push_back(t.meta.avg_grad_norm_sq);
    const MeanCi m = ComputeMeanCi(samples);
    avg[i] = m.mean;
    ci[i] = m.half_width;
  }
  const double ratio = avg[1] / avg[0];
  const double t = Seconds(start);
  return {ratio >= 0.125 && ratio <= 0.5 && t < 300.0,
          "n=1: " + Fmt("%.4e", avg[0]) + " +- " + Fmt("%.1e", ci[0]) + ", n=16: " +
              Fmt("%.4e", avg[1]) + " +- " + Fmt("%.1e", ci[1]) + ", ratio " +
              Fmt("%.4f", ratio) + " (target [1/8, 1/2], theory 1/4); " + Fmt("%.1f", t) +
              " s (limit 300)"};
}

Outcome OracleAccounting() {
  long long checked = 0, bad = 0;
  for (const auto& t : g_audit) {
    for (const auto& r : t.records) {
      ++checked;
      if (r.oracle_calls != 2LL * t.meta.n * r.k) ++bad;
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " records from " +
                                       std::to_string(g_audit.size()) + " traces, " +
                                       std::to_string(bad) + " mismatches"};
}

Outcome Advisors() {
  const Graph g = MakeGraph(Topology::kRing, 4);
  // Hand-derived ring-4 values: rho = 4, rho2 = 2, rho(L^2) = 16.
  const double c1 = 1.5, c2 = 1.0 / 149.0, d1 = 0.0625, d2 = 3.0 / 7552.0;
  const double got[4] = {AdvisorC1(g), AdvisorC2(g, 2.0), AdvisorD1(g),
                         AdvisorD2(g, 0.03, 1.0, 0.0, 0.0, 2)};
  const double want[4] = {c1, c2, d1, d2};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::fabs(got[i] - want[i]) / want[i]);
  return {worst <= 1e-9, "c1 " + Fmt("%.10g", got[0]) + ", c2 " + Fmt("%.10g", got[1]) +
                             ", d1 " + Fmt("%.10g", got[2]) + ", d2 " + Fmt("%.10g", got[3]) +
                             "; max rel err " + Fmt("%.2e", worst) + " (limit 1e-9)"};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism() {
  const fs::path dir =
      fs::temp_directory_path() / ("dzo_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "det.toml") << R"([problem]
kind = "heterogeneous_quadratic"
n = 8
p = 5
sigma0 = 0.2
sigma1 = 1.0
sigma2 = 0.5
shift = 1.0
seed = 50

[graph]
topology = "erdos_renyi"
er_prob = 0.5

[schedule]
regime = "pd_constant"
kappa0 = 1.0
kappa1 = 3.0
kappa2 = 0.02
kappa_delta = 0.1
epsilon_tilde = 0.999
allow_unvalidated = true

[run]
T = 2000
record_every = 10
seeds = 3
)";
  const auto run = [&](const std::string& out, int workers) {
    const std::string cmd = std::string(DZO_CLI_PATH) + " run " + (dir / "det.toml").string() +
                            " --out " + (dir / out).string() + " --workers " +
                            std::to_string(workers) + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int a = run("w1", 1), b = run("w4", 4), c = run("w1b", 1);
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(dir / "w1")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trace_seed", 0) != 0) continue;
    ++files;
    const std::string ref = Slurp(entry.path());
    if (ref != Slurp(dir / "w4" / name) || ref != Slurp(dir / "w1b" / name)) ++differ;
  }
  fs::remove_all(dir);
  return {a == 0 && b == 0 && c == 0 && files == 3 && differ == 0,
          "exit codes " + std::to_string(a) + "/" + std::to_string(b) + "/" + std::to_string(c) +
              ", " + std::to_string(files) + " trace CSVs compared across 1 and 4 workers, " +
              std::to_string(differ) + " differ"};
}

}  // namespace
}  // namespace dzo

int main() {
  using dzo::Outcome;
  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-24s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };
  report(1, "estimator-unbiased", dzo::Unbiasedness);
  report(2, "smoothing-bias", dzo::SmoothingBias);
  report(3, "second-moment", dzo::SecondMoment);
  report(4, "dual-sum-invariant", dzo::DualSum);
  report(5, "average-dynamics", dzo::AverageDynamics);
  report(6, "consensus-contraction", dzo::ConsensusContraction);
  dzo::PlRuns pl;
  bool pl_ok = true;
  std::string pl_error;
  try {
    pl = dzo::RunPl();
  } catch (const std::exception& e) {
    pl_ok = false;
    pl_error = e.what();
  }
  const auto need_pl = [&](const std::function<Outcome()>& fn) {
    return [&, fn] { return pl_ok ? fn() : Outcome{false, "runs failed: " + pl_error}; };
  };
  report(7, "pd-pl-rate", need_pl([&] { return dzo::GapRate(pl.pd, pl.pd_seconds); }));
  report(8, "primal-pl-rate", need_pl([&] { return dzo::GapRate(pl.primal, pl.primal_seconds); }));
  report(9, "consensus-rate", need_pl([&] { return dzo::ConsensusRate(pl.pd); }));
  report(10, "linear-convergence", dzo::LinearConvergence);
  report(11, "linear-speedup", dzo::Speedup);
  report(12, "oracle-accounting", dzo::OracleAccounting);
  report(13, "advisors-ring4", dzo::Advisors);
  report(14, "cli-determinism", dzo::Determinism);
  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
