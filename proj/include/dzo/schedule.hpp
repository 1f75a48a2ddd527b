#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dzo/config.hpp"
#include "dzo/graph.hpp"
#include "dzo/problem.hpp"

namespace dzo {

enum class Regime {
  kPdDiminishing,
  kPdSpeedup,
  kPdPl,
  kPdConstant,
  kPrimalDiminishing,
  kPrimalSpeedup,
  kPrimalPl,
  kPrimalConstant,
};

std::string_view RegimeName(Regime r);
Regime ParseRegime(std::string_view name);
// True for the regimes driven by the primal-dual update.
bool IsPrimalDual(Regime r);

// Parameter rule for one regime. Only the fields the regime reads need to
// be set. pd_constant takes its constant beta from kappa0 and
// primal_constant its constant eta from kappa_eta.
struct Schedule {
  Regime regime = Regime::kPdDiminishing;
  std::optional<double> kappa0, kappa1, kappa2, kappa_eta, kappa_delta;
  std::optional<double> theta, t1, gamma, epsilon_tilde, nu;
  std::optional<long long> T;
  // delta = multiplier * delta_cap.
  double delta_multiplier = 1.0;
  bool allow_unvalidated = false;
};

struct StepParams {
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  double delta_cap = 0.0;
};

// Parameters for iteration k. Throws std::invalid_argument naming a missing
// field.
StepParams ParamsAt(const Schedule& s, long long k, int n, int p);

enum class Severity { kError, kWarning, kNote };

struct Diagnostic {
  Severity severity;
  std::string message;
};

struct Diagnostics {
  std::vector<Diagnostic> items;
  bool HasErrors() const;
  std::string ToString() const;
};

// Checks a schedule against the closed-form bounds that can be evaluated
// from the graph and problem. Bounds whose constants are only defined
// inside the convergence proofs are reported as warnings. With
// allow_unvalidated, errors are downgraded to warnings.
Diagnostics Validate(const Schedule& s, const Graph& g, const Problem& prob);

Schedule ScheduleFromSection(const ConfigSection& section);

}  // namespace dzo
