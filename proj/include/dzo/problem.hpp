#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dzo/config.hpp"
#include "dzo/rng.hpp"

namespace dzo {

using Vec = Eigen::VectorXd;

enum class ProblemKind {
  kQuadraticPl,
  kSinPl,
  kHeterogeneousQuadratic,
  kLinearProbe,
  kLogisticSynth,
};

std::string_view ProblemKindName(ProblemKind k);
ProblemKind ParseProblemKind(std::string_view name);

// Constants of the oracle family:
//   E||grad F_i - grad f_i||^2 <= sigma0^2 ||grad f_i||^2 + sigma1^2
//   ||grad f_i - grad f||^2   <= sigma0_tilde^2 ||grad f||^2 + sigma2^2
struct NoiseParams {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double sigma0_tilde = 0.0;
  double sigma2 = 0.0;
};

struct ProblemOptions {
  ProblemKind kind = ProblemKind::kQuadraticPl;
  int n = 1;
  int p = 1;
  // sigma0 and sigma1 configure the oracle noise. sigma2 is the requested
  // heterogeneity: the largest ||grad f_i - grad f|| across agents.
  // sigma0_tilde is derived from scale_spread and ignored on input.
  NoiseParams noise;

  // Quadratic family: f_i(x) = 1/2 s_i x^T A x + b_i^T x.
  double mu = 1.0;                // smallest eigenvalue of A
  double condition_number = 1.0;  // lambda_max(A) / lambda_min(A)
  double shift = 0.0;             // ||mean b_i||, random direction
  double scale_spread = 0.0;      // max |s_i - 1| (heterogeneous_quadratic)
  // Explicit per-agent linear terms b_i (heterogeneous_quadratic only).
  std::vector<Vec> offsets;

  // linear_probe: f_i(x) = a^T x. Drawn from N(0, I) when empty.
  Vec probe;

  // logistic_synth: l2-regularized logistic loss on per-agent synthetic data.
  int samples_per_agent = 20;
  double l2 = 0.1;
};

// One realization of xi_i. The standard noise model is
//   F_i(x, xi) = (1 + scale) f_i(x) + shift^T x,
// with scale ~ N(0, sigma0^2) and shift ~ N(0, sigma1^2 / p I).
struct XiSample {
  int agent = 0;
  double scale = 0.0;
  Vec shift;  // empty for the null realization of the additive part
};

// A family of n local stochastic zeroth-order oracles plus exact
// measurement side channels (gradients, f, f*). The algorithms only use
// DrawXi and Eval.
class Problem {
 public:
  static Problem Make(const ProblemOptions& options, CounterRng& rng);

  ProblemKind kind() const { return kind_; }
  int n() const { return n_; }
  int p() const { return p_; }
  double lf() const { return lf_; }
  const NoiseParams& noise() const { return noise_; }
  std::optional<double> pl_nu() const { return pl_nu_; }
  std::optional<double> f_star() const { return f_star_; }
  // A global minimizer when known in closed form or computed numerically.
  const std::optional<Vec>& minimizer() const { return minimizer_; }

  XiSample DrawXi(int agent, CounterRng& rng) const;
  // F_i(x, xi). Deterministic in (x, xi).
  double Eval(int agent, const Vec& x, const XiSample& xi) const;

  // Measurement side channel.
  double LocalValue(int agent, const Vec& x) const;
  Vec TrueGrad(int agent, const Vec& x) const;
  Vec TrueGlobalGrad(const Vec& x) const;
  double FValue(const Vec& x) const;
  // f(x) - f*, evaluated without cancellation where the structure allows.
  std::optional<double> Gap(const Vec& x) const;
  // grad_x F_i(x, xi) = (1 + scale) grad f_i(x) + shift.
  Vec StochasticGrad(int agent, const Vec& x, const XiSample& xi) const;

 private:
  struct Quadratic {
    Eigen::MatrixXd a;
    std::vector<double> scales;
    std::vector<Vec> linear;
  };
  struct SinSeparable {
    std::vector<Vec> linear;
  };
  struct Linear {
    Vec probe;
  };
  struct Logistic {
    std::vector<Eigen::MatrixXd> features;  // m x p per agent
    std::vector<Vec> labels;                // +-1
    double l2 = 0.0;
  };
  using Family = std::variant<Quadratic, SinSeparable, Linear, Logistic>;

  Problem() = default;
  void CheckAgent(int agent) const;
  void CheckDim(const Vec& x) const;

  ProblemKind kind_ = ProblemKind::kQuadraticPl;
  int n_ = 1;
  int p_ = 1;
  double lf_ = 0.0;
  NoiseParams noise_;
  std::optional<double> pl_nu_;
  std::optional<double> f_star_;
  std::optional<Vec> minimizer_;
  Family family_;
};

// Reads a `[problem]` section. Returns the options and the construction
// seed.
struct ProblemSpec {
  ProblemOptions options;
  std::uint64_t seed = 0;
};

ProblemSpec ProblemSpecFromSection(const ConfigSection& section);
Problem BuildProblem(const ProblemSpec& spec);

}  // namespace dzo
