#include "dzo/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace dzo {
namespace {

constexpr double kSinPlNu = 1.0 / 32.0;
constexpr double kSinPlLf = 8.0;  // |d^2/dx^2 (x^2 + 3 sin^2 x)| = |2 + 6 cos 2x| <= 8

double Softplus(double z) {
  // log(1 + e^z) without overflow.
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vec GaussianVec(int p, CounterRng& rng) {
  Vec v(p);
  for (int j = 0; j < p; ++j) v(j) = rng.Normal();
  return v;
}

// n zero-mean vectors whose largest norm equals `magnitude`.
std::vector<Vec> CenteredOffsets(int n, int p, double magnitude, CounterRng& rng) {
  std::vector<Vec> out(n, Vec::Zero(p));
  if (n < 2 || magnitude == 0.0) return out;
  Vec mean = Vec::Zero(p);
  for (int i = 0; i < n; ++i) {
    out[i] = GaussianVec(p, rng);
    mean += out[i];
  }
  mean /= n;
  double max_norm = 0.0;
  for (auto& v : out) {
    v -= mean;
    max_norm = std::max(max_norm, v.norm());
  }
  for (auto& v : out) v *= magnitude / max_norm;
  return out;
}

void Mismatch(ProblemKind kind, const std::string& what) {
  throw std::invalid_argument("problem kind " + std::string(ProblemKindName(kind)) +
                              " does not accept " + what);
}

}  // namespace

std::string_view ProblemKindName(ProblemKind k) {
  switch (k) {
    case ProblemKind::kQuadraticPl: return "quadratic_pl";
    case ProblemKind::kSinPl: return "sin_pl";
    case ProblemKind::kHeterogeneousQuadratic: return "heterogeneous_quadratic";
    case ProblemKind::kLinearProbe: return "linear_probe";
    case ProblemKind::kLogisticSynth: return "logistic_synth";
  }
  return "?";
}

ProblemKind ParseProblemKind(std::string_view name) {
  for (ProblemKind k : {ProblemKind::kQuadraticPl, ProblemKind::kSinPl,
                        ProblemKind::kHeterogeneousQuadratic, ProblemKind::kLinearProbe,
                        ProblemKind::kLogisticSynth}) {
    if (ProblemKindName(k) == name) return k;
  }
  throw std::invalid_argument("unknown problem kind '" + std::string(name) + "'");
}

Problem Problem::Make(const ProblemOptions& o, CounterRng& rng) {
  if (o.n < 1) throw std::invalid_argument("problem needs n >= 1");
  if (o.p < 1) throw std::invalid_argument("problem needs p >= 1");
  if (o.noise.sigma0 < 0 || o.noise.sigma1 < 0 || o.noise.sigma2 < 0)
    throw std::invalid_argument("noise parameters must be nonnegative");

  const bool quadratic = o.kind == ProblemKind::kQuadraticPl ||
                         o.kind == ProblemKind::kHeterogeneousQuadratic;
  if (!quadratic && (o.condition_number != 1.0 || o.mu != 1.0 || o.shift != 0.0))
    Mismatch(o.kind, "condition_number, mu or shift");
  if (o.kind != ProblemKind::kHeterogeneousQuadratic &&
      (o.scale_spread != 0.0 || !o.offsets.empty()))
    Mismatch(o.kind, "scale_spread or offsets");
  if (o.kind != ProblemKind::kLinearProbe && o.probe.size() != 0) Mismatch(o.kind, "probe");

  Problem prob;
  prob.kind_ = o.kind;
  prob.n_ = o.n;
  prob.p_ = o.p;
  prob.noise_.sigma0 = o.noise.sigma0;
  prob.noise_.sigma1 = o.noise.sigma1;
  const int n = o.n, p = o.p;

  if (quadratic) {
    if (!(o.mu > 0.0)) throw std::invalid_argument("quadratic problems need mu > 0");
    if (!(o.condition_number >= 1.0))
      throw std::invalid_argument("condition_number must be >= 1");
    if (o.shift < 0.0 || o.scale_spread < 0.0)
      throw std::invalid_argument("shift and scale_spread must be nonnegative");

    Quadratic q;
    if (o.condition_number == 1.0) {
      q.a = o.mu * Eigen::MatrixXd::Identity(p, p);
    } else {
      Eigen::VectorXd lambda(p);
      for (int j = 0; j < p; ++j) {
        const double t = p == 1 ? 0.0 : static_cast<double>(j) / (p - 1);
        lambda(j) = o.mu * std::pow(o.condition_number, t);
      }
      Eigen::MatrixXd g(p, p);
      for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) g(r, c) = rng.Normal();
      const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
      q.a = rot * lambda.asDiagonal() * rot.transpose();
      q.a = 0.5 * (q.a + q.a.transpose()).eval();
    }
    const double lambda_max = o.mu * (p == 1 ? 1.0 : o.condition_number);

    Vec mean_b = Vec::Zero(p);
    if (o.shift > 0.0) {
      const Vec d = GaussianVec(p, rng);
      mean_b = o.shift * d / d.norm();
    }

    if (!o.offsets.empty()) {
      if (static_cast<int>(o.offsets.size()) != n)
        throw std::invalid_argument("offsets has " + std::to_string(o.offsets.size()) +
                                    " entries but n = " + std::to_string(n));
      if (o.shift != 0.0 || o.noise.sigma2 != 0.0)
        throw std::invalid_argument("explicit offsets fix b_i; do not also set shift or sigma2");
      mean_b.setZero();
      for (const auto& b : o.offsets) {
        if (b.size() != p) throw std::invalid_argument("offset dimension does not match p");
        mean_b += b;
      }
      mean_b /= n;
      q.linear = o.offsets;
    } else {
      const auto h = CenteredOffsets(n, p, o.noise.sigma2, rng);
      for (int i = 0; i < n; ++i) q.linear.push_back(mean_b + h[i]);
    }

    q.scales.assign(n, 1.0);
    if (o.scale_spread > 0.0 && n > 1) {
      double mean = 0.0;
      for (auto& s : q.scales) {
        s = 2.0 * rng.Uniform() - 1.0;
        mean += s;
      }
      mean /= n;
      double max_dev = 0.0;
      for (auto& s : q.scales) {
        s -= mean;
        max_dev = std::max(max_dev, std::fabs(s));
      }
      for (auto& s : q.scales) s = 1.0 + s * o.scale_spread / max_dev;
    }

    // grad f_i - grad f = (s_i - 1) grad f + c_i with c_i = b_i - mean_b - (s_i - 1) mean_b.
    double max_t = 0.0, max_c = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = q.scales[i] - 1.0;
      const Vec c = q.linear[i] - mean_b - t * mean_b;
      max_t = std::max(max_t, std::fabs(t));
      max_c = std::max(max_c, c.norm());
    }
    if (max_t == 0.0) {
      prob.noise_.sigma0_tilde = 0.0;
      prob.noise_.sigma2 = max_c;
    } else {
      prob.noise_.sigma0_tilde = std::sqrt(2.0) * max_t;
      prob.noise_.sigma2 = std::sqrt(2.0) * max_c;
    }

    double max_scale = 0.0;
    for (double s : q.scales) max_scale = std::max(max_scale, std::fabs(s));
    prob.lf_ = lambda_max * max_scale;
    prob.pl_nu_ = o.mu;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(q.a);
    const Vec xstar = -ldlt.solve(mean_b);
    prob.minimizer_ = xstar;
    prob.f_star_ = 0.5 * mean_b.dot(xstar);
    prob.family_ = std::move(q);
  } else if (o.kind == ProblemKind::kSinPl) {
    SinSeparable s;
    s.linear = CenteredOffsets(n, p, o.noise.sigma2, rng);
    double max_h = 0.0;
    for (const auto& h : s.linear) max_h = std::max(max_h, h.norm());
    prob.noise_.sigma2 = max_h;
    prob.lf_ = kSinPlLf;
    prob.pl_nu_ = kSinPlNu;
    prob.f_star_ = 0.0;
    prob.minimizer_ = Vec::Zero(p);
    prob.family_ = std::move(s);
  } else if (o.kind == ProblemKind::kLinearProbe) {
    if (o.noise.sigma2 != 0.0) Mismatch(o.kind, "sigma2 (all agents share the probe)");
    Linear l;
    if (o.probe.size() == 0) {
      l.probe = GaussianVec(p, rng);
    } else {
      if (o.probe.size() != p) throw std::invalid_argument("probe dimension does not match p");
      l.probe = o.probe;
    }
    prob.lf_ = 0.0;
    prob.family_ = std::move(l);
  } else {
    if (o.noise.sigma2 != 0.0)
      Mismatch(o.kind, "sigma2 (heterogeneity is determined by the generated data)");
    if (o.samples_per_agent < 1) throw std::invalid_argument("samples_per_agent must be >= 1");
    if (!(o.l2 > 0.0)) throw std::invalid_argument("logistic_synth needs l2 > 0");
    Logistic lg;
    lg.l2 = o.l2;
    const int m = o.samples_per_agent;
    const Vec truth = GaussianVec(p, rng);
    double max_curv = 0.0, sum_g = 0.0, max_g = 0.0;
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd f(m, p);
      Vec y(m);
      double g_i = 0.0;
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < p; ++c) f(r, c) = rng.Normal();
        const double margin = f.row(r).dot(truth) + 0.5 * rng.Normal();
        y(r) = margin >= 0.0 ? 1.0 : -1.0;
        g_i += f.row(r).norm();
      }
      g_i /= m;
      sum_g += g_i;
      max_g = std::max(max_g, g_i);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.transpose() * f,
                                                              Eigen::EigenvaluesOnly);
      max_curv = std::max(max_curv, es.eigenvalues().maxCoeff() / (4.0 * m));
      lg.features.push_back(std::move(f));
      lg.labels.push_back(std::move(y));
    }
    prob.lf_ = max_curv + lg.l2;
    prob.pl_nu_ = lg.l2;
    prob.noise_.sigma0_tilde = 0.0;
    prob.noise_.sigma2 = max_g + sum_g / n;
    prob.family_ = std::move(lg);

    // Newton's method on the strongly convex global objective.
    Vec x = Vec::Zero(p);
    for (int it = 0; it < 100; ++it) {
      const auto& lgr = std::get<Logistic>(prob.family_);
      Vec grad = lgr.l2 * x;
      Eigen::MatrixXd hess = lgr.l2 * Eigen::MatrixXd::Identity(p, p);
      for (int i = 0; i < n; ++i) {
        const auto& f = lgr.features[i];
        for (int r = 0; r < m; ++r) {
          const double z = lgr.labels[i](r) * f.row(r).dot(x);
          const double s = Sigmoid(-z);
          grad -= (lgr.labels[i](r) * s / (n * m)) * f.row(r).transpose();
          hess += (s * (1.0 - s) / (n * m)) * f.row(r).transpose() * f.row(r);
        }
      }
      const Vec step = hess.ldlt().solve(grad);
      x -= step;
      if (step.norm() <= 1e-15 * (1.0 + x.norm())) break;
    }
    prob.minimizer_ = x;
    prob.f_star_ = prob.FValue(x);
  }
  return prob;
}

void Problem::CheckAgent(int agent) const {
  if (agent < 0 || agent >= n_)
    throw std::out_of_range("agent index " + std::to_string(agent) + " outside [0, " +
                            std::to_string(n_) + ")");
}

void Problem::CheckDim(const Vec& x) const {
  if (x.size() != p_)
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", problem has p = " + std::to_string(p_));
}

XiSample Problem::DrawXi(int agent, CounterRng& rng) const {
  CheckAgent(agent);
  XiSample xi;
  xi.agent = agent;
  if (noise_.sigma0 > 0.0) xi.scale = noise_.sigma0 * rng.Normal();
  if (noise_.sigma1 > 0.0) {
    const double sd = noise_.sigma1 / std::sqrt(static_cast<double>(p_));
    xi.shift.resize(p_);
    for (int j = 0; j < p_; ++j) xi.shift(j) = sd * rng.Normal();
  }
  return xi;
}

double Problem::Eval(int agent, const Vec& x, const XiSample& xi) const {
  if (xi.agent != agent)
    throw std::invalid_argument("noise sample belongs to agent " + std::to_string(xi.agent) +
                                ", not " + std::to_string(agent));
  double value = (1.0 + xi.scale) * LocalValue(agent, x);
  if (xi.shift.size() != 0) value += xi.shift.dot(x);
  return value;
}

double Problem::LocalValue(int agent, const Vec& x) const {
  CheckAgent(agent);
  CheckDim(x);
  return std::visit(
      [&](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return 0.5 * fam.scales[agent] * x.dot(fam.a * x) + fam.linear[agent].dot(x);
        } else if constexpr (std::is_same_v<T, SinSeparable>) {
          double v = 0.0;
          for (int j = 0; j < p_; ++j) {
            const double s = std::sin(x(j));
            v += x(j) * x(j) + 3.0 * s * s;
          }
          return v + fam.linear[agent].dot(x);
        } else if constexpr (std::is_same_v<T, Linear>) {
          return fam.probe.dot(x);
        } else {
          const auto& f = fam.features[agent];
          const auto& y = fam.labels[agent];
          double v = 0.0;
          for (int r = 0; r < f.rows(); ++r) v += Softplus(-y(r) * f.row(r).dot(x));
          return v / f.rows() + 0.5 * fam.l2 * x.squaredNorm();
        }
      },
      family_);
}

Vec Problem::TrueGrad(int agent, const Vec& x) const {
  CheckAgent(agent);
  CheckDim(x);
  return std::visit(
      [&](const auto& fam) -> Vec {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return fam.scales[agent] * (fam.a * x) + fam.linear[agent];
        } else if constexpr (std::is_same_v<T, SinSeparable>) {
          Vec g(p_);
          for (int j = 0; j < p_; ++j) g(j) = 2.0 * x(j) + 3.0 * std::sin(2.0 * x(j));
          return g + fam.linear[agent];
        } else if constexpr (std::is_same_v<T, Linear>) {
          return fam.probe;
        } else {
          const auto& f = fam.features[agent];
          const auto& y = fam.labels[agent];
          Vec g = fam.l2 * x;
          for (int r = 0; r < f.rows(); ++r) {
            const double z = y(r) * f.row(r).dot(x);
            g -= (y(r) * Sigmoid(-z) / f.rows()) * f.row(r).transpose();
          }
          return g;
        }
      },
      family_);
}

Vec Problem::TrueGlobalGrad(const Vec& x) const {
  Vec g = Vec::Zero(p_);
  for (int i = 0; i < n_; ++i) g += TrueGrad(i, x);
  return g / n_;
}

double Problem::FValue(const Vec& x) const {
  double v = 0.0;
  for (int i = 0; i < n_; ++i) v += LocalValue(i, x);
  return v / n_;
}

std::optional<double> Problem::Gap(const Vec& x) const {
  CheckDim(x);
  if (!f_star_) return std::nullopt;
  if (const auto* q = std::get_if<Quadratic>(&family_)) {
    // The scales average to one, so f(x) - f* = 1/2 (x - x*)^T A (x - x*).
    const Vec d = x - *minimizer_;
    return 0.5 * d.dot(q->a * d);
  }
  if (std::holds_alternative<SinSeparable>(family_)) return FValue(x);
  return FValue(x) - *f_star_;
}

Vec Problem::StochasticGrad(int agent, const Vec& x, const XiSample& xi) const {
  Vec g = (1.0 + xi.scale) * TrueGrad(agent, x);
  if (xi.shift.size() != 0) g += xi.shift;
  return g;
}

ProblemSpec ProblemSpecFromSection(const ConfigSection& section) {
  section.RequireKnownKeys({"kind", "n", "p", "sigma0", "sigma1", "sigma2", "seed",
                            "condition_number", "mu", "shift", "scale_spread", "offsets",
                            "probe", "samples_per_agent", "l2"});
  ProblemSpec spec;
  auto& o = spec.options;
  try {
    o.kind = ParseProblemKind(section.Get("kind").AsString("kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("line " + std::to_string(section.Get("kind").line) + ", key 'kind': " +
                      e.what());
  }
  o.n = static_cast<int>(section.Get("n").AsInt("n"));
  o.p = static_cast<int>(section.Get("p").AsInt("p"));
  o.noise.sigma0 = section.DoubleOr("sigma0", 0.0);
  o.noise.sigma1 = section.DoubleOr("sigma1", 0.0);
  o.noise.sigma2 = section.DoubleOr("sigma2", 0.0);
  o.condition_number = section.DoubleOr("condition_number", 1.0);
  o.mu = section.DoubleOr("mu", 1.0);
  o.shift = section.DoubleOr("shift", 0.0);
  o.scale_spread = section.DoubleOr("scale_spread", 0.0);
  if (section.Has("offsets")) {
    const Eigen::MatrixXd m = section.Get("offsets").AsMatrix("offsets");
    for (int i = 0; i < m.rows(); ++i) o.offsets.push_back(m.row(i).transpose());
  }
  if (section.Has("probe")) {
    const auto v = section.Get("probe").AsDoubleList("probe");
    o.probe = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  o.samples_per_agent = static_cast<int>(section.IntOr("samples_per_agent", 20));
  o.l2 = section.DoubleOr("l2", 0.1);
  spec.seed = static_cast<std::uint64_t>(section.IntOr("seed", 0));
  return spec;
}

Problem BuildProblem(const ProblemSpec& spec) {
  CounterRng rng(spec.seed, 1, 0, StreamPurpose::kConstruction);
  return Problem::Make(spec.options, rng);
}

}  // namespace dzo
