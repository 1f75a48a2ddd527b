#include <cmath>

#include <gtest/gtest.h>

#include "dzo/engine.hpp"
#include "dzo/metrics.hpp"

namespace dzo {
namespace {

Problem Quadratic(int n, int p) {
  ProblemOptions o;
  o.n = n;
  o.p = p;
  o.condition_number = 3.0;
  o.shift = 2.0;
  CounterRng rng(17, 1);
  return Problem::Make(o, rng);
}

Trace Synthetic(const std::vector<long long>& k, const std::vector<double>& v) {
  Trace t;
  t.meta.regime = "pd_pl";
  t.meta.T = k.back();
  for (size_t i = 0; i < k.size(); ++i) {
    TraceRecord r;
    r.k = k[i];
    r.f_gap = v[i];
    r.grad_norm_sq = v[i];
    r.consensus_err = v[i];
    t.records.push_back(r);
  }
  return t;
}

TEST(EvaluateTest, AtConsensusMinimizer) {
  const Problem prob = Quadratic(3, 2);
  AgentMatrix x(3, 2);
  for (int i = 0; i < 3; ++i) x.row(i) = prob.minimizer()->transpose();
  const MetricPoint m = Evaluate(prob, x, 4);
  EXPECT_EQ(m.k, 4);
  EXPECT_NEAR(*m.f_gap, 0.0, 1e-14);
  EXPECT_NEAR(m.grad_norm_sq, 0.0, 1e-24);
  EXPECT_NEAR(m.consensus_err, 0.0, 1e-28);
}

TEST(EvaluateTest, UsesAverageIterate) {
  const Problem prob = Quadratic(2, 2);
  const Vec xs = *prob.minimizer();
  AgentMatrix x(2, 2);
  x.row(0) = (xs + Vec::Constant(2, 1.0)).transpose();
  x.row(1) = (xs - Vec::Constant(2, 1.0)).transpose();
  const MetricPoint m = Evaluate(prob, x);
  EXPECT_NEAR(*m.f_gap, 0.0, 1e-14);
  EXPECT_NEAR(m.consensus_err, 2.0, 1e-14);
  x.row(1) = x.row(0);
  const MetricPoint off = Evaluate(prob, x);
  const Vec d = Vec::Constant(2, 1.0);
  EXPECT_NEAR(*off.f_gap, prob.FValue(xs + d) - prob.FValue(xs), 1e-12);
  EXPECT_NEAR(off.grad_norm_sq, prob.TrueGlobalGrad(xs + d).squaredNorm(), 1e-12);
  EXPECT_THROW(Evaluate(prob, AgentMatrix::Zero(3, 2)), std::invalid_argument);
}

TEST(EvaluateTest, UnknownOptimumHasNoGap) {
  ProblemOptions o;
  o.kind = ProblemKind::kLinearProbe;
  o.n = 2;
  o.p = 3;
  CounterRng rng(1, 0);
  const Problem prob = Problem::Make(o, rng);
  EXPECT_FALSE(Evaluate(prob, AgentMatrix::Ones(2, 3)).f_gap.has_value());
}

TEST(ConsensusTest, TwoComputationsAgree) {
  CounterRng rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 9, p = 1 + trial % 4;
    AgentMatrix x(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) x(i, j) = 1e3 * rng.Normal() + 50.0;
    const double a = ConsensusError(x), b = ConsensusErrorProjected(x);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::fabs(a)));
  }
}

TEST(EvaluateTest, SideEffectFree) {
  const Problem prob = Quadratic(4, 3);
  GraphSpec spec;
  spec.n = 4;
  const Graph g = BuildGraph(spec);
  RunState a = InitState(prob, g, X0Policy::Gaussian(1.0), 3);
  RunState b = a;
  const StepParams params{2.0, 1.0, 0.05, 0.0, 1e-2};
  for (int k = 0; k < 30; ++k) {
    StepPrimalDual(a, params, 1.0, prob, g);
    Evaluate(prob, b.x, b.k);
    Evaluate(prob, b.x, b.k);
    StepPrimalDual(b, params, 1.0, prob, g);
  }
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.v, b.v);
}

TEST(FitRateTest, ExactPowerLaws) {
  std::vector<long long> k;
  std::vector<double> inv, root;
  for (long long i = 1; i <= 1000; ++i) {
    k.push_back(i);
    inv.push_back(7.0 / i);
    root.push_back(3.0 / std::sqrt(static_cast<double>(i)));
  }
  RateFit f = FitRate(k, inv, 100, 1000, AvgMode::kPerK);
  EXPECT_NEAR(f.slope, -1.0, 1e-10);
  EXPECT_NEAR(std::exp(f.intercept), 7.0, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.points, 901);
  f = FitRate(k, root, 100, 1000, AvgMode::kPerK);
  EXPECT_NEAR(f.slope, -0.5, 1e-10);
}

TEST(FitRateTest, GeometricSemilog) {
  std::vector<long long> k;
  std::vector<double> v;
  for (long long i = 0; i < 200; ++i) {
    k.push_back(i);
    v.push_back(5.0 * std::pow(0.9, static_cast<double>(i)));
  }
  const RateFit f = FitRate(k, v, 0, 199, AvgMode::kSemilog);
  EXPECT_NEAR(f.slope, std::log(0.9), 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(FitRateTest, RunningAverageOfPowerLaw) {
  std::vector<long long> k;
  std::vector<double> v;
  for (long long i = 0; i <= 20000; ++i) {
    k.push_back(i);
    v.push_back(1.0 / std::sqrt(i + 1.0));
  }
  // (1/K) sum_{k<K} (k+1)^{-1/2} ~ 2 K^{-1/2}.
  const RateFit f = FitRate(k, v, 2000, 20000, AvgMode::kRunningAverage);
  EXPECT_NEAR(f.slope, -0.5, 5e-3);
  const RateFit c = FitRate(k, std::vector<double>(k.size(), 3.0), 2000, 20000,
                            AvgMode::kRunningAverage);
  EXPECT_NEAR(c.slope, 0.0, 1e-12);
}

TEST(FitRateTest, TooFewPoints) {
  std::vector<long long> k{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> v(9, 1.0);
  EXPECT_THROW(FitRate(k, v, 0, 100, AvgMode::kPerK), std::invalid_argument);
  k.push_back(10);
  v.push_back(0.0);
  EXPECT_THROW(FitRate(k, v, 0, 100, AvgMode::kPerK), std::invalid_argument);
  v.back() = 2.0;
  EXPECT_NO_THROW(FitRate(k, v, 0, 100, AvgMode::kPerK));
}

TEST(FitRateTest, TraceDefaultWindow) {
  std::vector<long long> k;
  std::vector<double> v;
  for (long long i = 0; i <= 1000; i += 10) {
    k.push_back(i);
    v.push_back(i == 0 ? 1e9 : 4.0 / (static_cast<double>(i) * i));
  }
  const RateFit f = FitRate(Synthetic(k, v), Metric::kConsensusErr, AvgMode::kPerK);
  EXPECT_EQ(f.k_lo, 100);
  EXPECT_EQ(f.k_hi, 1000);
  EXPECT_NEAR(f.slope, -2.0, 1e-10);
}

TEST(AggregateTest, Examples) {
  const std::vector<long long> k{0, 1, 2};
  const Trace a = Synthetic(k, {1, 2, 3});
  AggregateCurve same = Aggregate({a, a, a});
  for (const auto& c : same.f_gap) EXPECT_EQ(c.half_width, 0.0);
  EXPECT_EQ(same.seeds, 3);

  const Trace b = Synthetic(k, {3, 4, 5});
  const AggregateCurve two = Aggregate({a, b});
  EXPECT_EQ(two.grad_norm_sq[0].mean, 2.0);
  EXPECT_EQ(two.Means(Metric::kConsensusErr), (std::vector<double>{2, 3, 4}));
  EXPECT_EQ(two.k, k);
}

TEST(AggregateTest, IidUnitVarianceHalfWidth) {
  CounterRng rng(99, 0);
  const int grid = 200;
  std::vector<long long> k;
  for (int i = 0; i < grid; ++i) k.push_back(i);
  std::vector<Trace> traces;
  for (int s = 0; s < 20; ++s) {
    std::vector<double> v;
    for (int i = 0; i < grid; ++i) v.push_back(rng.Normal());
    traces.push_back(Synthetic(k, v));
  }
  const AggregateCurve agg = Aggregate(traces);
  double mean_hw = 0.0;
  for (const auto& c : agg.f_gap) mean_hw += c.half_width;
  mean_hw /= grid;
  const double expected = 1.96 / std::sqrt(20.0);
  EXPECT_NEAR(expected, 0.438, 1e-3);
  EXPECT_NEAR(mean_hw, expected, 0.1 * expected);
}

TEST(AggregateTest, MismatchedGrids) {
  const Trace a = Synthetic({0, 1, 2}, {1, 2, 3});
  const Trace b = Synthetic({0, 1, 3}, {1, 2, 3});
  EXPECT_THROW(Aggregate({a, b}), std::invalid_argument);
  const Trace c = Synthetic({0, 1}, {1, 2});
  EXPECT_THROW(Aggregate({a, c}), std::invalid_argument);
  EXPECT_THROW(Aggregate({}), std::invalid_argument);
}

TEST(MetricNameTest, RoundTrip) {
  for (Metric m : {Metric::kFGap, Metric::kGradNormSq, Metric::kConsensusErr})
    EXPECT_EQ(ParseMetric(MetricName(m)), m);
  EXPECT_THROW(ParseMetric("loss"), std::invalid_argument);
}

}  // namespace
}  // namespace dzo
