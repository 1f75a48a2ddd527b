#include "dzo/engine.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <memory>

#include "dzo/estimator.hpp"

namespace dzo {
namespace {

void CheckShapes(const Problem& prob, const Graph& g) {
  if (g.n() != prob.n())
    throw std::invalid_argument("graph has " + std::to_string(g.n()) +
                                " agents but the problem has " + std::to_string(prob.n()));
}

void CheckFinite(const RunState& s) {
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.x.cols(); ++j) {
      const double a = s.x(i, j), b = s.v(i, j);
      if (!std::isfinite(a) || !std::isfinite(b) || std::fabs(a) > kDivergenceBound ||
          std::fabs(b) > kDivergenceBound)
        throw DivergenceError(s.k, static_cast<int>(i));
    }
  }
}

}  // namespace

DivergenceError::DivergenceError(long long k_, int agent_)
    : std::runtime_error("divergence at iteration " + std::to_string(k_) + " (agent " +
                         std::to_string(agent_) + ")"),
      k(k_),
      agent(agent_) {}

RunState InitState(const Problem& prob, const Graph& g, const X0Policy& x0, std::uint64_t seed) {
  CheckShapes(prob, g);
  const int n = prob.n(), p = prob.p();
  RunState s;
  s.seed = seed;
  s.v = AgentMatrix::Zero(n, p);
  s.last_estimates = AgentMatrix::Zero(n, p);
  switch (x0.kind) {
    case X0Policy::Kind::kZeros:
      s.x = AgentMatrix::Zero(n, p);
      break;
    case X0Policy::Kind::kGaussian:
      s.x.resize(n, p);
      for (int i = 0; i < n; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i), 0, StreamPurpose::kInit);
        for (int j = 0; j < p; ++j) s.x(i, j) = x0.scale * rng.Normal();
      }
      break;
    case X0Policy::Kind::kGiven:
      if (x0.given.rows() != n || x0.given.cols() != p)
        throw std::invalid_argument("given x0 is " + std::to_string(x0.given.rows()) + "x" +
                                    std::to_string(x0.given.cols()) + ", expected " +
                                    std::to_string(n) + "x" + std::to_string(p));
      s.x = x0.given;
      break;
  }
  return s;
}

void ComputeEstimates(RunState& state, const Problem& prob, double delta, ThreadPool* pool) {
  const int n = prob.n(), p = prob.p();
  const auto one = [&](int i) {
    const auto agent = static_cast<std::uint64_t>(i);
    const auto k = static_cast<std::uint64_t>(state.k);
    CounterRng dir(state.seed, agent, k, StreamPurpose::kDirection);
    CounterRng noise(state.seed, agent, k, StreamPurpose::kNoise);
    const Vec u = SampleSphere(p, dir);
    const XiSample xi = prob.DrawXi(i, noise);
    const Vec xi_row = state.x.row(i).transpose();
    const double d = std::max(delta, DeltaFloor(xi_row));
    state.last_estimates.row(i) = TwoPointEstimate(prob, i, xi_row, d, u, xi).g.transpose();
  };
  if (pool) {
    pool->ParallelFor(n, one);
  } else {
    for (int i = 0; i < n; ++i) one(i);
  }
  state.oracle_calls += 2LL * n;
}

void StepPrimalDual(RunState& state, const StepParams& params, double delta_multiplier,
                    const Problem& prob, const Graph& g, ThreadPool* pool) {
  ComputeEstimates(state, prob, delta_multiplier * params.delta_cap, pool);
  const AgentMatrix lx = g.laplacian() * state.x;
  state.x -= params.eta * (params.alpha * lx + params.beta * state.v + state.last_estimates);
  state.v += (params.eta * params.beta) * lx;
  CheckFinite(state);
  ++state.k;
}

void StepPrimal(RunState& state, const StepParams& params, double delta_multiplier,
                const Problem& prob, const Graph& g, ThreadPool* pool) {
  ComputeEstimates(state, prob, delta_multiplier * params.delta_cap, pool);
  const AgentMatrix lx = g.laplacian() * state.x;
  state.x -= params.gamma * lx + params.eta * state.last_estimates;
  CheckFinite(state);
  ++state.k;
}

std::string GraphSummary(const Graph& g) {
  return std::string(TopologyName(g.topology())) + " n=" + std::to_string(g.n()) +
         " edges=" + std::to_string(g.edge_count()) + " rho=" + FormatNumber(g.rho()) +
         " rho2=" + FormatNumber(g.rho2());
}

Trace Run(const Problem& prob, const Graph& g, const Schedule& schedule, const RunOptions& opts) {
  if (opts.T < 0) throw std::invalid_argument("T must be >= 0");
  if (opts.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const int n = prob.n(), p = prob.p();
  const bool pd = IsPrimalDual(schedule.regime);

  Trace trace;
  trace.meta.regime = std::string(RegimeName(schedule.regime));
  trace.meta.seed = opts.seed;
  trace.meta.n = n;
  trace.meta.p = p;
  trace.meta.graph = GraphSummary(g);
  trace.meta.T = opts.T;
  trace.meta.record_every = opts.record_every;

  RunState state = InitState(prob, g, opts.x0, opts.seed);
  std::unique_ptr<ThreadPool> pool;
  if (opts.workers > 1) pool = std::make_unique<ThreadPool>(opts.workers);

  double sum_grad = 0.0, sum_gap = 0.0;
  const auto finish = [&](long long iterations) {
    if (iterations > 0) {
      trace.meta.avg_grad_norm_sq = sum_grad / static_cast<double>(iterations);
      trace.meta.avg_f_gap = sum_gap / static_cast<double>(iterations);
    }
    trace.meta.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  try {
    for (long long k = 0;; ++k) {
      const StepParams params = ParamsAt(schedule, k, n, p);
      const MetricPoint m = Evaluate(prob, state.x, k);
      const bool last = k == opts.T;
      if (k % opts.record_every == 0 || last) {
        TraceRecord r;
        r.k = k;
        if (m.f_gap) r.f_gap = *m.f_gap;
        r.grad_norm_sq = m.grad_norm_sq;
        r.consensus_err = m.consensus_err;
        r.eta = params.eta;
        r.beta = params.beta;
        r.delta = schedule.delta_multiplier * params.delta_cap;
        r.oracle_calls = state.oracle_calls;
        trace.records.push_back(r);
      }
      if (last) break;
      sum_grad += m.grad_norm_sq;
      sum_gap += m.f_gap.value_or(std::nan(""));
      if (pd)
        StepPrimalDual(state, params, schedule.delta_multiplier, prob, g, pool.get());
      else
        StepPrimal(state, params, schedule.delta_multiplier, prob, g, pool.get());
    }
  } catch (DivergenceError& e) {
    finish(state.k + 1);
    trace.meta.diverged = true;
    trace.meta.failure = e.what();
    e.partial = trace;
    throw;
  }
  finish(opts.T);
  return trace;
}

}  // namespace dzo
