#include "dzo/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dzo {
namespace {

constexpr Regime kAllRegimes[] = {
    Regime::kPdDiminishing,      Regime::kPdSpeedup,     Regime::kPdPl,
    Regime::kPdConstant,         Regime::kPrimalDiminishing, Regime::kPrimalSpeedup,
    Regime::kPrimalPl,           Regime::kPrimalConstant,
};

double Need(const std::optional<double>& v, Regime r, const char* field) {
  if (!v)
    throw std::invalid_argument("regime " + std::string(RegimeName(r)) + " requires field '" +
                                field + "'");
  return *v;
}

double NeedT(const Schedule& s) {
  if (!s.T)
    throw std::invalid_argument("regime " + std::string(RegimeName(s.regime)) +
                                " requires field 'T'");
  return static_cast<double>(*s.T);
}

struct FieldRef {
  const char* name;
  bool set;
};

std::vector<FieldRef> Fields(const Schedule& s) {
  return {{"kappa0", s.kappa0.has_value()},        {"kappa1", s.kappa1.has_value()},
          {"kappa2", s.kappa2.has_value()},        {"kappa_eta", s.kappa_eta.has_value()},
          {"kappa_delta", s.kappa_delta.has_value()}, {"theta", s.theta.has_value()},
          {"t1", s.t1.has_value()},                {"gamma", s.gamma.has_value()},
          {"epsilon_tilde", s.epsilon_tilde.has_value()}, {"nu", s.nu.has_value()},
          {"T", s.T.has_value()}};
}

std::vector<std::string> Required(Regime r) {
  switch (r) {
    case Regime::kPdDiminishing: return {"kappa0", "kappa1", "kappa2", "kappa_delta", "theta", "t1"};
    case Regime::kPdSpeedup: return {"kappa1", "kappa2", "kappa_delta", "T"};
    case Regime::kPdPl: return {"kappa0", "kappa1", "kappa2", "kappa_delta", "t1"};
    case Regime::kPdConstant:
      return {"kappa0", "kappa1", "kappa2", "kappa_delta", "epsilon_tilde"};
    case Regime::kPrimalDiminishing: return {"gamma", "kappa_eta", "kappa_delta", "theta", "t1"};
    case Regime::kPrimalSpeedup: return {"gamma", "kappa_delta", "T"};
    case Regime::kPrimalPl: return {"gamma", "kappa_eta", "kappa_delta", "t1"};
    case Regime::kPrimalConstant: return {"gamma", "kappa_eta", "kappa_delta", "epsilon_tilde"};
  }
  return {};
}

bool IsPl(Regime r) { return r == Regime::kPdPl || r == Regime::kPrimalPl; }
bool IsDiminishing(Regime r) {
  return r == Regime::kPdDiminishing || r == Regime::kPrimalDiminishing;
}

std::string Num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string_view RegimeName(Regime r) {
  switch (r) {
    case Regime::kPdDiminishing: return "pd_diminishing";
    case Regime::kPdSpeedup: return "pd_speedup";
    case Regime::kPdPl: return "pd_pl";
    case Regime::kPdConstant: return "pd_constant";
    case Regime::kPrimalDiminishing: return "primal_diminishing";
    case Regime::kPrimalSpeedup: return "primal_speedup";
    case Regime::kPrimalPl: return "primal_pl";
    case Regime::kPrimalConstant: return "primal_constant";
  }
  return "?";
}

Regime ParseRegime(std::string_view name) {
  for (Regime r : kAllRegimes)
    if (RegimeName(r) == name) return r;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

bool IsPrimalDual(Regime r) {
  return r == Regime::kPdDiminishing || r == Regime::kPdSpeedup || r == Regime::kPdPl ||
         r == Regime::kPdConstant;
}

StepParams ParamsAt(const Schedule& s, long long k, int n, int p) {
  if (k < 0) throw std::invalid_argument("iteration index must be >= 0");
  const Regime r = s.regime;
  const double kd = static_cast<double>(k);
  const double dn = n, dp = p;
  StepParams out;
  const double kappa_delta = Need(s.kappa_delta, r, "kappa_delta");
  const auto sqrt_cap = [&](double eta) { return kappa_delta * std::sqrt(dp * eta) / std::sqrt(dn + dp); };
  const auto quartic_cap = [&] {
    return std::pow(dp, 0.25) * std::pow(dn, 0.25) * kappa_delta /
           (std::sqrt(dn + dp) * std::pow(kd + 1.0, 0.25));
  };

  switch (r) {
    case Regime::kPdDiminishing:
    case Regime::kPdPl: {
      const double theta = r == Regime::kPdPl ? 1.0 : Need(s.theta, r, "theta");
      out.beta = Need(s.kappa0, r, "kappa0") * std::pow(kd + Need(s.t1, r, "t1"), theta);
      out.alpha = Need(s.kappa1, r, "kappa1") * out.beta;
      out.eta = Need(s.kappa2, r, "kappa2") / out.beta;
      out.delta_cap = sqrt_cap(out.eta);
      break;
    }
    case Regime::kPdSpeedup: {
      const double kappa2 = Need(s.kappa2, r, "kappa2");
      out.beta = kappa2 * std::sqrt(dp * NeedT(s)) / std::sqrt(dn);
      out.alpha = Need(s.kappa1, r, "kappa1") * out.beta;
      out.eta = kappa2 / out.beta;
      out.delta_cap = quartic_cap();
      break;
    }
    case Regime::kPdConstant:
      out.beta = Need(s.kappa0, r, "kappa0");
      out.alpha = Need(s.kappa1, r, "kappa1") * out.beta;
      out.eta = Need(s.kappa2, r, "kappa2") / out.beta;
      out.delta_cap = kappa_delta * std::pow(Need(s.epsilon_tilde, r, "epsilon_tilde"), kd);
      break;
    case Regime::kPrimalDiminishing:
      out.gamma = Need(s.gamma, r, "gamma");
      out.eta = Need(s.kappa_eta, r, "kappa_eta") /
                std::pow(kd + Need(s.t1, r, "t1"), Need(s.theta, r, "theta"));
      out.delta_cap = sqrt_cap(out.eta);
      break;
    case Regime::kPrimalSpeedup:
      out.gamma = Need(s.gamma, r, "gamma");
      out.eta = std::sqrt(dn) / std::sqrt(dp * NeedT(s));
      out.delta_cap = quartic_cap();
      break;
    case Regime::kPrimalPl:
      out.gamma = Need(s.gamma, r, "gamma");
      out.eta = Need(s.kappa_eta, r, "kappa_eta") / (kd + Need(s.t1, r, "t1"));
      out.delta_cap = sqrt_cap(out.eta);
      break;
    case Regime::kPrimalConstant:
      out.gamma = Need(s.gamma, r, "gamma");
      out.eta = Need(s.kappa_eta, r, "kappa_eta");
      out.delta_cap = kappa_delta * std::pow(Need(s.epsilon_tilde, r, "epsilon_tilde"), kd);
      break;
  }
  return out;
}

bool Diagnostics::HasErrors() const {
  for (const auto& d : items)
    if (d.severity == Severity::kError) return true;
  return false;
}

std::string Diagnostics::ToString() const {
  std::string out;
  for (const auto& d : items) {
    switch (d.severity) {
      case Severity::kError: out += "error: "; break;
      case Severity::kWarning: out += "warning: "; break;
      case Severity::kNote: out += "note: "; break;
    }
    out += d.message + "\n";
  }
  return out;
}

Diagnostics Validate(const Schedule& s, const Graph& g, const Problem& prob) {
  Diagnostics d;
  const Regime r = s.regime;
  const auto error = [&](const std::string& m) {
    if (s.allow_unvalidated)
      d.items.push_back({Severity::kWarning, "allowed by allow_unvalidated: " + m});
    else
      d.items.push_back({Severity::kError, m});
  };
  const auto unchecked = [&](const std::string& m) {
    d.items.push_back({Severity::kWarning, "unchecked theorem precondition: " + m});
  };
  const auto note = [&](const std::string& m) { d.items.push_back({Severity::kNote, m}); };

  const auto required = Required(r);
  bool missing = false;
  for (const auto& f : Fields(s)) {
    const bool needed = std::find(required.begin(), required.end(), f.name) != required.end();
    if (needed && !f.set) {
      error("regime " + std::string(RegimeName(r)) + " requires field '" + f.name + "'");
      missing = true;
    } else if (!needed && f.set && std::string(f.name) != "nu" && std::string(f.name) != "T") {
      note("field '" + std::string(f.name) + "' is not used by regime " +
           std::string(RegimeName(r)));
    }
  }
  if (missing) return d;

  for (const auto& [name, value] :
       {std::pair{"kappa0", s.kappa0}, {"kappa1", s.kappa1}, {"kappa2", s.kappa2},
        {"kappa_eta", s.kappa_eta}, {"kappa_delta", s.kappa_delta}, {"gamma", s.gamma},
        {"nu", s.nu}}) {
    if (value && !(*value > 0.0)) error(std::string(name) + " = " + Num(*value) + " must be > 0");
  }
  if (s.t1 && !(*s.t1 >= 1.0)) error("t1 = " + Num(*s.t1) + " must be >= 1");
  if (s.epsilon_tilde && !(*s.epsilon_tilde > 0.0 && *s.epsilon_tilde < 1.0))
    error("epsilon_tilde = " + Num(*s.epsilon_tilde) + " must lie in (0, 1)");
  if (s.T && *s.T < 1) error("T = " + std::to_string(*s.T) + " must be >= 1");
  if (!(s.delta_multiplier > 0.0 && s.delta_multiplier <= 1.0))
    error("delta_multiplier = " + Num(s.delta_multiplier) + " must lie in (0, 1]");
  if (!d.items.empty() && d.HasErrors()) return d;

  const int n = g.n();
  const int p = prob.p();
  if (n != prob.n())
    error("graph has " + std::to_string(n) + " agents but the problem has " +
          std::to_string(prob.n()));

  std::optional<double> nu = s.nu ? s.nu : prob.pl_nu();
  if (s.nu && prob.pl_nu() && *s.nu > *prob.pl_nu() * (1.0 + 1e-12))
    d.items.push_back({Severity::kWarning, "nu = " + Num(*s.nu) +
                                               " exceeds the problem's P-L constant " +
                                               Num(*prob.pl_nu())});

  if (IsPl(r)) {
    if (!nu) error("regime " + std::string(RegimeName(r)) +
                   " needs nu, either in [schedule] or from a problem with a known P-L constant");
    if (s.theta && *s.theta != 1.0)
      error("theta = " + Num(*s.theta) + " but regime " + std::string(RegimeName(r)) +
            " fixes theta = 1");
  }
  if (IsDiminishing(r)) {
    const double theta = *s.theta;
    // The wider range is only claimed when the schedule itself names nu.
    if (s.nu) {
      if (!(theta > 0.0 && theta < 1.0))
        error("theta = " + Num(theta) + " outside the theorem range (0, 1)");
    } else if (!(theta > 0.5 && theta < 1.0)) {
      error("theta = " + Num(theta) + " outside the theorem range (0.5, 1)");
    }
  }

  const bool pd = IsPrimalDual(r);
  std::optional<double> d2;
  if (n == 1) {
    note("single agent: L = 0, graph-dependent bounds skipped");
  } else if (pd) {
    const double c1 = AdvisorC1(g);
    if (!(*s.kappa1 > c1)) {
      error("kappa1 = " + Num(*s.kappa1) + " violates kappa1 > c1 = " + Num(c1));
    } else {
      const double c2 = AdvisorC2(g, *s.kappa1);
      if (!(*s.kappa2 < c2))
        error("kappa2 = " + Num(*s.kappa2) + " violates kappa2 < c2(kappa1) = " + Num(c2));
    }
  } else {
    const double d1 = AdvisorD1(g);
    if (!(*s.gamma < d1)) {
      error("gamma = " + Num(*s.gamma) + " violates gamma < d1 = " + Num(d1));
    } else if (prob.lf() > 0.0) {
      d2 = AdvisorD2(g, *s.gamma, prob.lf(), prob.noise().sigma0, prob.noise().sigma0_tilde, p);
    } else {
      note("problem has L_f = 0, bounds involving d2 skipped");
    }
  }

  const double dn = n, dp = p;
  switch (r) {
    case Regime::kPdDiminishing:
      unchecked("t1 in [(p c3)^(1/theta), (p c4 c3)^(1/theta)] and kappa0 >= c0 / t1^theta");
      break;
    case Regime::kPdSpeedup:
    case Regime::kPrimalSpeedup: {
      const double need = dn * dn * dn / dp;
      if (static_cast<double>(*s.T) < need)
        error("T = " + std::to_string(*s.T) + " violates T >= n^3/p = " + Num(need));
      if (r == Regime::kPdSpeedup) {
        unchecked("T >= n c0~^2 / (p kappa2^2)");
      } else if (d2) {
        const double need2 = dn / (dp * *d2 * *d2);
        if (static_cast<double>(*s.T) < need2)
          error("T = " + std::to_string(*s.T) + " violates T >= n/(p d2^2) = " + Num(need2));
      }
      break;
    }
    case Regime::kPdPl:
      if (nu) {
        const double upper = 3.0 * *nu * *s.kappa2 / 16.0;
        if (!(*s.kappa0 < upper))
          error("kappa0 = " + Num(*s.kappa0) + " violates kappa0 < 3 nu kappa2 / 16 = " +
                Num(upper));
      }
      unchecked("kappa0 >= 3 c0^ nu kappa2 / 16 and the t1 lower bound");
      break;
    case Regime::kPdConstant:
      unchecked("beta = kappa0 >= c0~(kappa1, kappa2)");
      break;
    case Regime::kPrimalDiminishing: {
      const double theta = *s.theta;
      if (d2) {
        const double cap = *d2 * std::pow(*s.t1, theta);
        if (!(*s.kappa_eta <= cap))
          error("kappa_eta = " + Num(*s.kappa_eta) + " violates kappa_eta <= d2 t1^theta = " +
                Num(cap));
      }
      // theta <= 1/2 is only covered by the P-L variant, which needs the larger t1.
      const double t1_min = theta > 0.5 ? std::pow(dp, 1.0 / (2.0 * theta))
                                        : std::pow(dp, 1.0 / theta);
      if (theta > 0.0 && !(*s.t1 >= t1_min))
        error("t1 = " + Num(*s.t1) + " violates t1 >= " + Num(t1_min));
      break;
    }
    case Regime::kPrimalPl:
      if (nu && !(*s.kappa_eta > 8.0 / *nu))
        error("kappa_eta = " + Num(*s.kappa_eta) + " violates kappa_eta > 8/nu = " +
              Num(8.0 / *nu));
      unchecked("t1 > d2^(gamma)");
      break;
    case Regime::kPrimalConstant:
      if (d2 && !(*s.kappa_eta < *d2))
        error("eta = kappa_eta = " + Num(*s.kappa_eta) + " violates eta < d2 = " + Num(*d2));
      break;
  }
  return d;
}

Schedule ScheduleFromSection(const ConfigSection& section) {
  section.RequireKnownKeys({"regime", "kappa0", "kappa1", "kappa2", "kappa_eta", "kappa_delta",
                            "theta", "t1", "gamma", "T", "epsilon_tilde", "nu",
                            "delta_multiplier", "allow_unvalidated"});
  Schedule s;
  const auto& regime = section.Get("regime");
  try {
    s.regime = ParseRegime(regime.AsString("regime"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("line " + std::to_string(regime.line) + ", key 'regime': " + e.what());
  }
  s.kappa0 = section.OptDouble("kappa0");
  s.kappa1 = section.OptDouble("kappa1");
  s.kappa2 = section.OptDouble("kappa2");
  s.kappa_eta = section.OptDouble("kappa_eta");
  s.kappa_delta = section.OptDouble("kappa_delta");
  s.theta = section.OptDouble("theta");
  s.t1 = section.OptDouble("t1");
  s.gamma = section.OptDouble("gamma");
  s.epsilon_tilde = section.OptDouble("epsilon_tilde");
  s.nu = section.OptDouble("nu");
  s.T = section.OptInt("T");
  s.delta_multiplier = section.DoubleOr("delta_multiplier", 1.0);
  s.allow_unvalidated = section.OptBool("allow_unvalidated").value_or(false);
  return s;
}

}  // namespace dzo
