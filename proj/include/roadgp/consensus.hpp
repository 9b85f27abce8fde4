#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace roadgp {

enum class TopologyKind { ring, complete, grid, custom };

/// Undirected, connected communication graph.
class Topology {
 public:
  /// Validates symmetry, empty diagonal and connectivity.
  explicit Topology(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency);

  int num_agents() const { return static_cast<int>(adjacency_.rows()); }
  bool connected(int i, int j) const { return adjacency_(i, j); }
  int degree(int i) const;
  std::vector<int> neighbors(int i) const;
  const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adjacency() const { return adjacency_; }

 private:
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency_;
};

/// Ring with K <= 2 degenerates to the complete graph. Grid lays agents out
/// row-major on the most square rows x cols factorization of K.
Topology build_topology(TopologyKind kind, int num_agents,
                        const std::vector<std::pair<int, int>>& custom_edges = {});

enum class WeightRule {
  metropolis,
  /// (I + W_metropolis) / 2; never exact in one round, spectrum in [0, 1].
  lazy_metropolis,
};

struct ConsensusConfig {
  int rounds = 1;
  WeightRule weight_rule = WeightRule::metropolis;
};

/// W_ij = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal fills rows to 1.
Eigen::MatrixXd metropolis_weights(const Topology& topo);
Eigen::MatrixXd mixing_matrix(const Topology& topo, WeightRule rule);

/// Runs `rounds` synchronous averaging rounds over per-agent vectors and
/// returns K times each agent's final value, i.e. its estimate of the
/// network-wide sum. Rounds are double-buffered.
///
/// When `disagreement` is non-null it receives max_k |v_k - mean| (infinity
/// norm over entries) before the first round and after every round.
std::vector<Eigen::VectorXd> consensus_sum(const std::vector<Eigen::VectorXd>& values,
                                           const Topology& topo, const ConsensusConfig& cfg,
                                           std::vector<double>* disagreement = nullptr);

}  // namespace roadgp
