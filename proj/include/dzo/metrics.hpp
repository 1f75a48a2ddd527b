#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dzo/problem.hpp"
#include "dzo/trace.hpp"

namespace dzo {

// Agent iterates, one row per agent.
using AgentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MetricPoint {
  long long k = 0;
  std::optional<double> f_gap;  // empty when f* is unknown
  double grad_norm_sq = 0.0;
  double consensus_err = 0.0;
};

// f(xbar) - f*, ||grad f(xbar)||^2 and (1/n) sum ||x_i - xbar||^2 from the
// exact side channel.
MetricPoint Evaluate(const Problem& prob, const AgentMatrix& x, long long k = 0);

// (1/n) sum_i ||x_i - xbar||^2, by subtracting the row mean.
double ConsensusError(const AgentMatrix& x);
// (1/n) ||(I - 11^T/n) X||_F^2, via the explicit projector.
double ConsensusErrorProjected(const AgentMatrix& x);

enum class Metric { kFGap, kGradNormSq, kConsensusErr };
std::string_view MetricName(Metric m);
Metric ParseMetric(std::string_view name);
double MetricValue(const TraceRecord& r, Metric m);

enum class AvgMode {
  kPerK,            // log(m_k) against log(k)
  kRunningAverage,  // log((1/K) sum_{k<K} m_k) against log(K)
  kSemilog,         // log(m_k) against k; slope is the per-step log decrement
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  long long k_lo = 0;
  long long k_hi = 0;
  int points = 0;
};

inline constexpr int kMinFitPoints = 10;

// Ordinary least squares over the points with k in [k_lo, k_hi]. Points
// with nonpositive (or non-finite) values are skipped. Throws
// std::invalid_argument when fewer than kMinFitPoints remain.
RateFit FitRate(const std::vector<long long>& k, const std::vector<double>& values, long long k_lo,
                long long k_hi, AvgMode mode);

// Fit over the records of one trace. The default window is [T/10, T].
RateFit FitRate(const Trace& trace, Metric metric, AvgMode mode,
                std::optional<std::pair<long long, long long>> window = std::nullopt);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 s / sqrt(m); 0 for a single sample
  int count = 0;
};

MeanCi ComputeMeanCi(const std::vector<double>& samples);

// Pointwise mean and 95% normal interval across seeds.
struct AggregateCurve {
  std::vector<long long> k;
  std::vector<MeanCi> f_gap;
  std::vector<MeanCi> grad_norm_sq;
  std::vector<MeanCi> consensus_err;
  int seeds = 0;

  const std::vector<MeanCi>& Of(Metric m) const;
  // Means only, as a synthetic trace for rate fitting.
  std::vector<double> Means(Metric m) const;
};

// Throws std::invalid_argument when the traces were recorded on different
// grids or for different regimes.
AggregateCurve Aggregate(const std::vector<Trace>& traces);

}  // namespace dzo
