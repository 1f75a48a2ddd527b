#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dzo/config.hpp"
#include "dzo/rng.hpp"

namespace dzo {

enum class Topology { kRing, kComplete, kErdosRenyi, kPath, kCustom };

std::string_view TopologyName(Topology t);
Topology ParseTopology(std::string_view name);

// Raised for disconnected inputs, exhausted Erdos-Renyi budgets, and spectral
// queries on graphs that are not connected at working precision.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologyParams {
  double er_prob = 0.0;
  // Dense symmetric adjacency for Topology::kCustom.
  std::optional<Eigen::MatrixXd> weights;
};

// Number of Erdos-Renyi draws attempted before giving up.
inline constexpr int kErdosRenyiAttempts = 1000;

// Immutable weighted undirected communication graph. The Laplacian
// L = Deg - A and its spectrum are computed once at construction.
class Graph {
 public:
  static Graph Build(Topology kind, int n, const TopologyParams& params, CounterRng& rng);
  static Graph FromWeights(const Eigen::MatrixXd& weights, Topology kind = Topology::kCustom,
                           double er_prob = 0.0);

  int n() const { return static_cast<int>(weights_.rows()); }
  Topology topology() const { return topology_; }
  double er_prob() const { return er_prob_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  // Laplacian eigenvalues in ascending order.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  // Largest Laplacian eigenvalue rho(L).
  double rho() const { return eigenvalues_(eigenvalues_.size() - 1); }
  // Smallest positive Laplacian eigenvalue rho_2(L); 0 for a single agent.
  double rho2() const { return rho2_; }
  // rho(L^2), equal to rho(L)^2 since L is symmetric.
  double rho_sq() const { return rho() * rho(); }

  int edge_count() const;
  std::vector<std::vector<int>> neighbors() const;

 private:
  Graph() = default;

  Topology topology_ = Topology::kCustom;
  double er_prob_ = 0.0;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd laplacian_;
  Eigen::VectorXd eigenvalues_;
  double rho2_ = 0.0;
};

// Connected components of the support of `weights` (union-find).
std::vector<std::vector<int>> ConnectedComponents(const Eigen::MatrixXd& weights);

// 1/rho_2(L) + 1: the strict lower bound for kappa_1 in the primal-dual
// theorems.
double AdvisorC1(const Graph& g);

// min{eps2/eps3, 1/5} with eps2 = (kappa1-1) rho_2 - 1 and
// eps3 = rho + (2 kappa1^2 + 1) rho(L^2) + 1. Upper bound for kappa_2.
double AdvisorC2(const Graph& g, double kappa1);

// rho_2(L) / (2 rho(L^2)): open upper bound for the primal consensus step.
double AdvisorD1(const Graph& g);

// Step-size cap for the primal algorithm:
// min{4 eps1 / (9 Lf^2), 1 / (64 p (1+s0^2)(1+s0t^2)(2 eps2 + Lf))} with
// eps1 = gamma rho_2 / 2 - gamma^2 rho(L^2), eps2 = (1 + 2 gamma rho_2)/(2 gamma rho_2).
double AdvisorD2(const Graph& g, double gamma, double lf, double sigma0, double sigma0_tilde,
                 int p);

// Reads a `[graph]` section. `n` comes from the problem when the section
// does not set it; a mismatch is a ConfigError. `seed` drives Erdos-Renyi
// sampling.
struct GraphSpec {
  Topology topology = Topology::kRing;
  int n = 1;
  TopologyParams params;
  std::uint64_t seed = 0;
};

GraphSpec GraphSpecFromSection(const ConfigSection& section, std::optional<int> n_hint,
                               std::uint64_t default_seed);
Graph BuildGraph(const GraphSpec& spec);

// Writes a `[graph]` section that GraphSpecFromSection reads back into an
// identical graph. Erdos-Renyi graphs are written with their realized
// weights so the round trip does not depend on the sampling seed.
std::string GraphToSection(const Graph& g);

}  // namespace dzo
