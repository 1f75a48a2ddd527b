#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "dzo/graph.hpp"
#include "dzo/metrics.hpp"
#include "dzo/problem.hpp"
#include "dzo/schedule.hpp"
#include "dzo/thread_pool.hpp"
#include "dzo/trace.hpp"

namespace dzo {

// Absolute value beyond which an iterate counts as diverged.
inline constexpr double kDivergenceBound = 1e12;

struct X0Policy {
  enum class Kind { kZeros, kGaussian, kGiven };
  Kind kind = Kind::kGaussian;
  double scale = 1.0;
  AgentMatrix given;

  static X0Policy Zeros() { return {Kind::kZeros, 0.0, {}}; }
  static X0Policy Gaussian(double scale) { return {Kind::kGaussian, scale, {}}; }
  static X0Policy Given(AgentMatrix x) { return {Kind::kGiven, 0.0, std::move(x)}; }
};

struct RunState {
  AgentMatrix x;
  AgentMatrix v;  // dual iterates; stays zero for the primal algorithm
  long long k = 0;
  std::uint64_t seed = 0;
  long long oracle_calls = 0;
  // g^e_{i,k} from the most recent step, one row per agent.
  AgentMatrix last_estimates;
};

// Raised when an iterate becomes non-finite or exceeds kDivergenceBound.
// When thrown out of Run, `partial` holds the records gathered so far.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long long k, int agent);
  long long k;
  int agent;
  Trace partial;
};

RunState InitState(const Problem& prob, const Graph& g, const X0Policy& x0, std::uint64_t seed);

// The direction u_{i,k} and noise xi_{i,k} come from counter streams keyed by
// (seed, agent, k), so the result does not depend on the order in which
// agents are processed.
void ComputeEstimates(RunState& state, const Problem& prob, double delta, ThreadPool* pool);

// One synchronous round of the primal-dual update. Every agent reads x_k and
// v_k; the new iterates are written only after all estimates are formed.
void StepPrimalDual(RunState& state, const StepParams& params, double delta_multiplier,
                    const Problem& prob, const Graph& g, ThreadPool* pool = nullptr);

// One synchronous round of the primal update x - gamma L x - eta g.
void StepPrimal(RunState& state, const StepParams& params, double delta_multiplier,
                const Problem& prob, const Graph& g, ThreadPool* pool = nullptr);

struct RunOptions {
  long long T = 0;
  long long record_every = 1;
  std::uint64_t seed = 0;
  X0Policy x0;
  int workers = 1;
};

// Runs T rounds and records metrics at k = 0, every record_every rounds, and
// at k = T. Metrics come from the exact side channel and never touch the
// algorithm's random streams.
Trace Run(const Problem& prob, const Graph& g, const Schedule& schedule, const RunOptions& opts);

std::string GraphSummary(const Graph& g);

}  // namespace dzo
