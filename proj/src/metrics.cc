#include "dzo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dzo {

MetricPoint Evaluate(const Problem& prob, const AgentMatrix& x, long long k) {
  if (x.rows() != prob.n() || x.cols() != prob.p())
    throw std::invalid_argument("iterate matrix is " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", problem is " +
                                std::to_string(prob.n()) + "x" + std::to_string(prob.p()));
  const Vec xbar = x.colwise().mean().transpose();
  MetricPoint m;
  m.k = k;
  m.f_gap = prob.Gap(xbar);
  m.grad_norm_sq = prob.TrueGlobalGrad(xbar).squaredNorm();
  m.consensus_err = ConsensusError(x);
  return m;
}

double ConsensusError(const AgentMatrix& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum += (x.row(i) - mean).squaredNorm();
  return sum / static_cast<double>(x.rows());
}

double ConsensusErrorProjected(const AgentMatrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) -
                               Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  return (proj * x).squaredNorm() / static_cast<double>(n);
}

std::string_view MetricName(Metric m) {
  switch (m) {
    case Metric::kFGap: return "f_gap";
    case Metric::kGradNormSq: return "grad_norm_sq";
    case Metric::kConsensusErr: return "consensus_err";
  }
  return "?";
}

Metric ParseMetric(std::string_view name) {
  for (Metric m : {Metric::kFGap, Metric::kGradNormSq, Metric::kConsensusErr})
    if (MetricName(m) == name) return m;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

double MetricValue(const TraceRecord& r, Metric m) {
  switch (m) {
    case Metric::kFGap: return r.f_gap;
    case Metric::kGradNormSq: return r.grad_norm_sq;
    case Metric::kConsensusErr: return r.consensus_err;
  }
  return 0.0;
}

RateFit FitRate(const std::vector<long long>& k, const std::vector<double>& values, long long k_lo,
                long long k_hi, AvgMode mode) {
  if (k.size() != values.size())
    throw std::invalid_argument("k and values have different lengths");
  std::vector<double> xs, ys;
  double prefix = 0.0;
  bool prefix_ok = true;
  for (std::size_t j = 0; j < k.size(); ++j) {
    double y = values[j];
    if (mode == AvgMode::kRunningAverage) {
      // Mean of the records strictly before this one.
      y = j == 0 ? std::nan("") : prefix / static_cast<double>(j);
      if (!prefix_ok) y = std::nan("");
      if (std::isfinite(values[j])) prefix += values[j]; else prefix_ok = false;
    }
    if (k[j] < k_lo || k[j] > k_hi) continue;
    if (!std::isfinite(y) || y <= 0.0) continue;
    if (mode == AvgMode::kSemilog) {
      xs.push_back(static_cast<double>(k[j]));
    } else {
      if (k[j] <= 0) continue;
      xs.push_back(std::log(static_cast<double>(k[j])));
    }
    ys.push_back(std::log(y));
  }
  const int m = static_cast<int>(xs.size());
  if (m < kMinFitPoints)
    throw std::invalid_argument("rate fit needs at least " + std::to_string(kMinFitPoints) +
                                " usable points in [" + std::to_string(k_lo) + ", " +
                                std::to_string(k_hi) + "], found " + std::to_string(m));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate fit window has a single abscissa");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  fit.k_lo = k_lo;
  fit.k_hi = k_hi;
  fit.points = m;
  return fit;
}

RateFit FitRate(const Trace& trace, Metric metric, AvgMode mode,
                std::optional<std::pair<long long, long long>> window) {
  std::vector<long long> k;
  std::vector<double> v;
  for (const auto& r : trace.records) {
    k.push_back(r.k);
    v.push_back(MetricValue(r, metric));
  }
  const long long last = k.empty() ? 0 : k.back();
  const auto [lo, hi] = window.value_or(std::pair{last / 10, last});
  return FitRate(k, v, lo, hi, mode);
}

MeanCi ComputeMeanCi(const std::vector<double>& samples) {
  MeanCi out;
  out.count = static_cast<int>(samples.size());
  if (samples.empty()) return out;
  double sum = 0.0;
  for (double s : samples) sum += s;
  out.mean = sum / out.count;
  if (out.count > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - out.mean) * (s - out.mean);
    out.half_width = 1.96 * std::sqrt(ss / (out.count - 1)) / std::sqrt(out.count);
  }
  return out;
}

const std::vector<MeanCi>& AggregateCurve::Of(Metric m) const {
  switch (m) {
    case Metric::kFGap: return f_gap;
    case Metric::kGradNormSq: return grad_norm_sq;
    case Metric::kConsensusErr: return consensus_err;
  }
  return f_gap;
}

std::vector<double> AggregateCurve::Means(Metric m) const {
  std::vector<double> out;
  for (const auto& c : Of(m)) out.push_back(c.mean);
  return out;
}

AggregateCurve Aggregate(const std::vector<Trace>& traces) {
  if (traces.empty()) throw std::invalid_argument("nothing to aggregate");
  const Trace& first = traces.front();
  for (const auto& t : traces) {
    if (t.meta.regime != first.meta.regime || t.meta.T != first.meta.T ||
        t.meta.record_every != first.meta.record_every ||
        t.records.size() != first.records.size())
      throw std::invalid_argument("traces were recorded on different grids");
    for (std::size_t j = 0; j < t.records.size(); ++j)
      if (t.records[j].k != first.records[j].k)
        throw std::invalid_argument("traces disagree on recorded iteration " + std::to_string(j));
  }
  AggregateCurve out;
  out.seeds = static_cast<int>(traces.size());
  for (std::size_t j = 0; j < first.records.size(); ++j) {
    out.k.push_back(first.records[j].k);
    std::vector<double> a, b, c;
    for (const auto& t : traces) {
      a.push_back(t.records[j].f_gap);
      b.push_back(t.records[j].grad_norm_sq);
      c.push_back(t.records[j].consensus_err);
    }
    out.f_gap.push_back(ComputeMeanCi(a));
    out.grad_norm_sq.push_back(ComputeMeanCi(b));
    out.consensus_err.push_back(ComputeMeanCi(c));
  }
  return out;
}

}  // namespace dzo
