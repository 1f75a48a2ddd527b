#pragma once

#include <functional>

#include "dzo/problem.hpp"
#include "dzo/rng.hpp"

namespace dzo {

// Uniform direction on the unit sphere in R^p (normalized Gaussian).
Vec SampleSphere(int p, CounterRng& rng);
// Uniform point in the closed unit ball in R^p.
Vec SampleBall(int p, CounterRng& rng);

// Smallest smoothing radius accepted at x: 1e-10 (1 + ||x||).
double DeltaFloor(const Vec& x);

struct Estimate {
  Vec g;
  double delta_used = 0.0;
};

// g = (p / delta) (F_i(x + delta u, xi) - F_i(x, xi)) u. Two oracle calls,
// both with the same xi.
Estimate TwoPointEstimate(const Problem& prob, int agent, const Vec& x, double delta, const Vec& u,
                          const XiSample& xi);

// Same estimator over an arbitrary scalar function.
Estimate TwoPointEstimate(const std::function<double(const Vec&)>& f, const Vec& x, double delta,
                          const Vec& u);

struct McScalar {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McVector {
  Vec mean;
  Vec std_error;  // per coordinate
};

// Monte Carlo estimate of f^s(x, delta) = E_{v in ball}[f(x + delta v)] for
// the global objective.
McScalar SmoothedValueMc(const Problem& prob, const Vec& x, double delta, long samples,
                         CounterRng& rng);

// Monte Carlo estimate of grad f^s(x, delta), averaging noiseless two-point
// estimates of the global objective over fresh sphere directions.
McVector SmoothedGradMc(const Problem& prob, const Vec& x, double delta, long samples,
                        CounterRng& rng);

}  // namespace dzo
