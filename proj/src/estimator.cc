#include "dzo/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace dzo {
namespace {

void CheckDelta(const Vec& x, double delta) {
  const double floor = DeltaFloor(x);
  if (!(delta >= floor))
    throw std::invalid_argument("smoothing radius " + FormatNumber(delta) + " is below the floor " +
                                FormatNumber(floor) + " = 1e-10 (1 + ||x||)");
}

void CheckDirection(const Vec& x, const Vec& u) {
  if (u.size() != x.size())
    throw std::invalid_argument("direction has dimension " + std::to_string(u.size()) +
                                ", point has " + std::to_string(x.size()));
}

}  // namespace

Vec SampleSphere(int p, CounterRng& rng) {
  if (p < 1) throw std::invalid_argument("sphere dimension must be >= 1");
  Vec u(p);
  double norm = 0.0;
  do {
    for (int j = 0; j < p; ++j) u(j) = rng.Normal();
    norm = u.norm();
  } while (norm < 1e-30);
  return u / norm;
}

Vec SampleBall(int p, CounterRng& rng) {
  const Vec u = SampleSphere(p, rng);
  return std::pow(rng.Uniform(), 1.0 / p) * u;
}

double DeltaFloor(const Vec& x) { return 1e-10 * (1.0 + x.norm()); }

Estimate TwoPointEstimate(const Problem& prob, int agent, const Vec& x, double delta, const Vec& u,
                          const XiSample& xi) {
  if (x.size() != prob.p())
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", problem has p = " + std::to_string(prob.p()));
  CheckDirection(x, u);
  CheckDelta(x, delta);
  const double f1 = prob.Eval(agent, x + delta * u, xi);
  const double f0 = prob.Eval(agent, x, xi);
  return {(prob.p() * (f1 - f0) / delta) * u, delta};
}

Estimate TwoPointEstimate(const std::function<double(const Vec&)>& f, const Vec& x, double delta,
                          const Vec& u) {
  CheckDirection(x, u);
  CheckDelta(x, delta);
  const double f1 = f(x + delta * u);
  const double f0 = f(x);
  return {(static_cast<double>(x.size()) * (f1 - f0) / delta) * u, delta};
}

McScalar SmoothedValueMc(const Problem& prob, const Vec& x, double delta, long samples,
                         CounterRng& rng) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (long s = 0; s < samples; ++s) {
    const double v = prob.FValue(x + delta * SampleBall(prob.p(), rng));
    sum += v;
    sum_sq += v * v;
  }
  McScalar out;
  out.mean = sum / samples;
  if (samples > 1) {
    const double var = std::max(0.0, (sum_sq - samples * out.mean * out.mean) / (samples - 1));
    out.std_error = std::sqrt(var / samples);
  }
  return out;
}

McVector SmoothedGradMc(const Problem& prob, const Vec& x, double delta, long samples,
                        CounterRng& rng) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const int p = prob.p();
  const auto f = [&prob](const Vec& y) { return prob.FValue(y); };
  Vec sum = Vec::Zero(p), sum_sq = Vec::Zero(p);
  for (long s = 0; s < samples; ++s) {
    const Vec g = TwoPointEstimate(f, x, delta, SampleSphere(p, rng)).g;
    sum += g;
    sum_sq += g.cwiseAbs2();
  }
  McVector out;
  out.mean = sum / samples;
  out.std_error = Vec::Zero(p);
  if (samples > 1) {
    for (int j = 0; j < p; ++j) {
      const double var =
          std::max(0.0, (sum_sq(j) - samples * out.mean(j) * out.mean(j)) / (samples - 1));
      out.std_error(j) = std::sqrt(var / samples);
    }
  }
  return out;
}

}  // namespace dzo
