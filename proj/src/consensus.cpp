#include "roadgp/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roadgp/errors.hpp"

namespace roadgp {

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

bool is_connected(const BoolMatrix& adj) {
  const auto n = adj.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  Eigen::Index count = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adj(i, j) && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n;
}

double max_disagreement(const std::vector<Eigen::VectorXd>& v) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(v.front().size());
  for (const auto& x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double worst = 0.0;
  for (const auto& x : v) {
    if (x.size() > 0) worst = std::max(worst, (x - mean).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

Topology::Topology(BoolMatrix adjacency) : adjacency_(std::move(adjacency)) {
  const auto n = adjacency_.rows();
  if (n < 1 || adjacency_.cols() != n) throw InvalidArgument("adjacency must be square and non-empty");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i)) throw InvalidArgument("adjacency diagonal must be empty");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency_(i, j) != adjacency_(j, i)) throw InvalidArgument("adjacency must be symmetric");
    }
  }
  if (!is_connected(adjacency_)) throw InvalidArgument("topology is not connected");
}

int Topology::degree(int i) const { return static_cast<int>(adjacency_.row(i).count()); }

std::vector<int> Topology::neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < num_agents(); ++j) {
    if (adjacency_(i, j)) out.push_back(j);
  }
  return out;
}

Topology build_topology(TopologyKind kind, int K, const std::vector<std::pair<int, int>>& custom_edges) {
  if (K < 1) throw InvalidArgument("topology needs at least one agent");
  BoolMatrix adj = BoolMatrix::Constant(K, K, false);
  auto link = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= K || j >= K) {
      throw InvalidArgument("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    }
    if (i == j) throw InvalidArgument("self-loops are not allowed");
    adj(i, j) = adj(j, i) = true;
  };
  switch (kind) {
    case TopologyKind::ring:
      if (K <= 2) {
        for (int i = 0; i < K; ++i)
          for (int j = i + 1; j < K; ++j) link(i, j);
      } else {
        for (int i = 0; i < K; ++i) link(i, (i + 1) % K);
      }
      break;
    case TopologyKind::complete:
      for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j) link(i, j);
      break;
    case TopologyKind::grid: {
      int rows = static_cast<int>(std::sqrt(static_cast<double>(K)));
      while (K % rows != 0) --rows;
      const int cols = K / rows;
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const int i = r * cols + c;
          if (c + 1 < cols) link(i, i + 1);
          if (r + 1 < rows) link(i, i + cols);
        }
      }
      break;
    }
    case TopologyKind::custom:
      for (const auto& [i, j] : custom_edges) link(i, j);
      break;
  }
  return Topology(std::move(adj));
}

Eigen::MatrixXd metropolis_weights(const Topology& topo) {
  const int K = topo.num_agents();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    double off = 0.0;
    for (int j = 0; j < K; ++j) {
      if (topo.connected(i, j)) {
        W(i, j) = 1.0 / (1.0 + std::max(topo.degree(i), topo.degree(j)));
        off += W(i, j);
      }
    }
    W(i, i) = 1.0 - off;
  }
  return W;
}

Eigen::MatrixXd mixing_matrix(const Topology& topo, WeightRule rule) {
  Eigen::MatrixXd W = metropolis_weights(topo);
  if (rule == WeightRule::lazy_metropolis) {
    W *= 0.5;
    W.diagonal().array() += 0.5;
  }
  return W;
}

std::vector<Eigen::VectorXd> consensus_sum(const std::vector<Eigen::VectorXd>& values,
                                           const Topology& topo, const ConsensusConfig& cfg,
                                           std::vector<double>* disagreement) {
  const int K = topo.num_agents();
  if (static_cast<int>(values.size()) != K) {
    throw InvalidArgument("consensus expects one value per agent (" + std::to_string(K) + "), got " +
                          std::to_string(values.size()));
  }
  if (cfg.rounds < 0) throw InvalidArgument("consensus rounds must be non-negative");
  for (const auto& v : values) {
    if (v.size() != values.front().size()) throw InvalidArgument("consensus values differ in shape");
  }

  const Eigen::MatrixXd W = mixing_matrix(topo, cfg.weight_rule);
  std::vector<Eigen::VectorXd> current = values;
  std::vector<Eigen::VectorXd> next(values.size());
  if (disagreement) disagreement->assign(1, max_disagreement(current));

  for (int round = 0; round < cfg.rounds; ++round) {
    for (int k = 0; k < K; ++k) {
      next[k] = W(k, k) * current[k];
      for (int j = 0; j < K; ++j) {
        if (j != k && W(k, j) != 0.0) next[k] += W(k, j) * current[j];
      }
    }
    std::swap(current, next);
    if (disagreement) disagreement->push_back(max_disagreement(current));
  }
  for (auto& v : current) v *= static_cast<double>(K);
  return current;
}

}  // namespace roadgp
