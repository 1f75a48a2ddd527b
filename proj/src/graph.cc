#include "dzo/graph.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace dzo {
namespace {

// Relative threshold below which a Laplacian eigenvalue counts as zero.
constexpr double kZeroModeTolerance = 1e-10;

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int Find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

std::string DescribeComponents(const std::vector<std::vector<int>>& comps) {
  std::ostringstream os;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (c) os << ' ';
    os << '{';
    for (std::size_t j = 0; j < comps[c].size(); ++j) {
      if (j) os << ',';
      os << comps[c][j];
    }
    os << '}';
  }
  return os.str();
}

void CheckWeights(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() < 1)
    throw std::invalid_argument("graph weights must be a non-empty square matrix");
  for (int i = 0; i < w.rows(); ++i) {
    if (w(i, i) != 0.0)
      throw std::invalid_argument("graph weights must have a zero diagonal (entry " +
                                  std::to_string(i) + ")");
    for (int j = 0; j < w.cols(); ++j) {
      if (!std::isfinite(w(i, j)) || w(i, j) < 0.0)
        throw std::invalid_argument("graph weights must be finite and nonnegative");
      if (w(i, j) != w(j, i))
        throw std::invalid_argument("graph weights must be symmetric (entries " +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
}

Eigen::MatrixXd RingWeights(int n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  if (n == 2) {
    w(0, 1) = w(1, 0) = 1.0;
  } else if (n > 2) {
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      w(i, j) = w(j, i) = 1.0;
    }
  }
  return w;
}

Eigen::MatrixXd PathWeights(int n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = 1.0;
  return w;
}

Eigen::MatrixXd CompleteWeights(int n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(n, n);
  w.diagonal().setZero();
  return w;
}

void RequireConnected(const Graph& g) {
  if (g.n() > 1 && !(g.rho2() > 0.0))
    throw GraphError("graph not connected at working precision");
  if (g.n() == 1) throw GraphError("graph not connected at working precision (single agent)");
}

}  // namespace

std::string_view TopologyName(Topology t) {
  switch (t) {
    case Topology::kRing: return "ring";
    case Topology::kComplete: return "complete";
    case Topology::kErdosRenyi: return "erdos_renyi";
    case Topology::kPath: return "path";
    case Topology::kCustom: return "custom";
  }
  return "custom";
}

Topology ParseTopology(std::string_view name) {
  if (name == "ring") return Topology::kRing;
  if (name == "complete") return Topology::kComplete;
  if (name == "erdos_renyi") return Topology::kErdosRenyi;
  if (name == "path") return Topology::kPath;
  if (name == "custom") return Topology::kCustom;
  throw std::invalid_argument("unknown topology '" + std::string(name) +
                              "' (expected ring, complete, erdos_renyi, path, custom)");
}

std::vector<std::vector<int>> ConnectedComponents(const Eigen::MatrixXd& weights) {
  const int n = static_cast<int>(weights.rows());
  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (weights(i, j) > 0.0) uf.Unite(i, j);
  std::vector<std::vector<int>> comps;
  std::vector<int> index(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = uf.Find(i);
    if (index[r] < 0) {
      index[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[index[r]].push_back(i);
  }
  return comps;
}

Graph Graph::FromWeights(const Eigen::MatrixXd& weights, Topology kind, double er_prob) {
  CheckWeights(weights);
  const auto comps = ConnectedComponents(weights);
  if (comps.size() > 1)
    throw GraphError("graph is disconnected: " + std::to_string(comps.size()) +
                     " components " + DescribeComponents(comps));

  Graph g;
  g.topology_ = kind;
  g.er_prob_ = er_prob;
  g.weights_ = weights;
  const Eigen::VectorXd degree = weights.rowwise().sum();
  g.laplacian_ = -weights;
  g.laplacian_.diagonal() = degree;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.laplacian_,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw GraphError("Laplacian eigendecomposition failed");
  g.eigenvalues_ = solver.eigenvalues();

  const double rho = g.eigenvalues_(g.eigenvalues_.size() - 1);
  const double floor = kZeroModeTolerance * std::max(rho, 1e-300);
  int zero_modes = 0;
  for (int i = 0; i < g.eigenvalues_.size(); ++i)
    if (std::fabs(g.eigenvalues_(i)) <= floor) ++zero_modes;
  // Two independent connectivity checks must agree.
  if (zero_modes != static_cast<int>(comps.size()))
    throw GraphError("graph connectivity is numerically ambiguous: " +
                     std::to_string(zero_modes) + " near-zero Laplacian modes but " +
                     std::to_string(comps.size()) + " edge components");
  g.rho2_ = g.n() > 1 ? g.eigenvalues_(1) : 0.0;
  return g;
}

Graph Graph::Build(Topology kind, int n, const TopologyParams& params, CounterRng& rng) {
  if (n < 1) throw std::invalid_argument("graph needs at least one agent");
  switch (kind) {
    case Topology::kRing: return FromWeights(RingWeights(n), kind);
    case Topology::kComplete: return FromWeights(CompleteWeights(n), kind);
    case Topology::kPath: return FromWeights(PathWeights(n), kind);
    case Topology::kCustom: {
      if (!params.weights) throw std::invalid_argument("custom topology requires weights");
      if (params.weights->rows() != n)
        throw std::invalid_argument("custom weights are " + std::to_string(params.weights->rows()) +
                                    "x" + std::to_string(params.weights->cols()) +
                                    " but n = " + std::to_string(n));
      return FromWeights(*params.weights, kind);
    }
    case Topology::kErdosRenyi: {
      const double prob = params.er_prob;
      if (!(prob > 0.0 && prob <= 1.0))
        throw std::invalid_argument("er_prob must lie in (0, 1], got " + FormatNumber(prob));
      for (int attempt = 0; attempt < kErdosRenyiAttempts; ++attempt) {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (rng.Uniform() < prob) w(i, j) = w(j, i) = 1.0;
        if (ConnectedComponents(w).size() == 1) return FromWeights(w, kind, prob);
      }
      throw GraphError("Erdos-Renyi graph with n = " + std::to_string(n) +
                       ", er_prob = " + FormatNumber(prob) + " was not connected within " +
                       std::to_string(kErdosRenyiAttempts) + " attempts");
    }
  }
  throw std::invalid_argument("unknown topology");
}

int Graph::edge_count() const {
  int edges = 0;
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j)
      if (weights_(i, j) > 0.0) ++edges;
  return edges;
}

std::vector<std::vector<int>> Graph::neighbors() const {
  std::vector<std::vector<int>> out(n());
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j)
      if (weights_(i, j) > 0.0) out[i].push_back(j);
  return out;
}

double AdvisorC1(const Graph& g) {
  RequireConnected(g);
  return 1.0 / g.rho2() + 1.0;
}

double AdvisorC2(const Graph& g, double kappa1) {
  const double c1 = AdvisorC1(g);
  if (!(kappa1 > c1))
    throw std::invalid_argument("kappa1 = " + FormatNumber(kappa1) + " violates kappa1 > c1 = " +
                                FormatNumber(c1));
  const double eps2 = (kappa1 - 1.0) * g.rho2() - 1.0;
  const double eps3 = g.rho() + (2.0 * kappa1 * kappa1 + 1.0) * g.rho_sq() + 1.0;
  return std::min(eps2 / eps3, 0.2);
}

double AdvisorD1(const Graph& g) {
  RequireConnected(g);
  return g.rho2() / (2.0 * g.rho_sq());
}

double AdvisorD2(const Graph& g, double gamma, double lf, double sigma0, double sigma0_tilde,
                 int p) {
  const double d1 = AdvisorD1(g);
  if (!(gamma > 0.0 && gamma < d1))
    throw std::invalid_argument("gamma = " + FormatNumber(gamma) +
                                " violates gamma in (0, d1) with d1 = " + FormatNumber(d1));
  if (!(lf > 0.0)) throw std::invalid_argument("d2 requires Lf > 0");
  if (p < 1) throw std::invalid_argument("d2 requires dimension p >= 1");
  const double eps1 = 0.5 * gamma * g.rho2() - gamma * gamma * g.rho_sq();
  const double eps2 = (1.0 + 2.0 * gamma * g.rho2()) / (2.0 * gamma * g.rho2());
  const double first = 4.0 * eps1 / (9.0 * lf * lf);
  const double second = 1.0 / (64.0 * p * (1.0 + sigma0 * sigma0) *
                               (1.0 + sigma0_tilde * sigma0_tilde) * (2.0 * eps2 + lf));
  return std::min(first, second);
}

GraphSpec GraphSpecFromSection(const ConfigSection& section, std::optional<int> n_hint,
                               std::uint64_t default_seed) {
  section.RequireKnownKeys({"topology", "n", "er_prob", "weights", "seed"});
  GraphSpec spec;
  try {
    spec.topology = ParseTopology(section.OptString("topology").value_or("ring"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("line " + std::to_string(section.Get("topology").line) +
                      ", key 'topology': " + e.what());
  }
  const auto n = section.OptInt("n");
  if (n && n_hint && *n != *n_hint)
    throw ConfigError("line " + std::to_string(section.Get("n").line) +
                      ", key 'n': graph n = " + std::to_string(*n) +
                      " does not match problem n = " + std::to_string(*n_hint));
  if (n) {
    spec.n = static_cast<int>(*n);
  } else if (n_hint) {
    spec.n = *n_hint;
  } else {
    throw ConfigError("[graph] needs 'n' when no problem section supplies it");
  }
  spec.params.er_prob = section.DoubleOr("er_prob", 0.0);
  if (section.Has("weights")) spec.params.weights = section.Get("weights").AsMatrix("weights");
  if (spec.topology == Topology::kErdosRenyi && !section.Has("er_prob") &&
      !spec.params.weights)
    throw ConfigError("[graph] topology erdos_renyi requires 'er_prob'");
  spec.seed = static_cast<std::uint64_t>(section.IntOr("seed", static_cast<long long>(default_seed)));
  return spec;
}

Graph BuildGraph(const GraphSpec& spec) {
  // Realized Erdos-Renyi weights take precedence over resampling.
  if (spec.topology == Topology::kErdosRenyi && spec.params.weights) {
    if (spec.params.weights->rows() != spec.n)
      throw std::invalid_argument("erdos_renyi weights do not match n");
    return Graph::FromWeights(*spec.params.weights, Topology::kErdosRenyi, spec.params.er_prob);
  }
  CounterRng rng(spec.seed, 0, 0, StreamPurpose::kConstruction);
  return Graph::Build(spec.topology, spec.n, spec.params, rng);
}

std::string GraphToSection(const Graph& g) {
  std::ostringstream os;
  os << "[graph]\n";
  os << "topology = \"" << TopologyName(g.topology()) << "\"\n";
  os << "n = " << g.n() << "\n";
  if (g.topology() == Topology::kErdosRenyi) os << "er_prob = " << FormatNumber(g.er_prob()) << "\n";
  if (g.topology() == Topology::kErdosRenyi || g.topology() == Topology::kCustom) {
    os << "weights = [";
    for (int i = 0; i < g.n(); ++i) {
      os << (i ? ",\n  [" : "\n  [");
      for (int j = 0; j < g.n(); ++j) os << (j ? ", " : "") << FormatNumber(g.weights()(i, j));
      os << "]";
    }
    os << "\n]\n";
  }
  return os.str();
}

}  // namespace dzo
