#include <gtest/gtest.h>

#include "roadgp/consensus.hpp"
#include "roadgp/errors.hpp"
#include "test_helpers.hpp"

using namespace roadgp;

namespace {

std::vector<Eigen::VectorXd> random_values(Rng& rng, int K, Eigen::Index n) {
  std::vector<Eigen::VectorXd> v;
  for (int k = 0; k < K; ++k) v.push_back(roadgp::testing::random_vector(rng, n, -3, 3));
  return v;
}

Eigen::VectorXd total(const std::vector<Eigen::VectorXd>& v) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(v.front().size());
  for (const auto& x : v) s += x;
  return s;
}

Topology random_connected(Rng& rng, int K) {
  // Random spanning tree plus random extra edges.
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < K; ++i) edges.emplace_back(static_cast<int>(rng.uniform_index(i)), i);
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j)
      if (rng.bernoulli(0.2)) edges.emplace_back(i, j);
  return build_topology(TopologyKind::custom, K, edges);
}

}  // namespace

TEST(Topology, RingAndComplete) {
  const auto ring = build_topology(TopologyKind::ring, 3);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(ring.degree(i), 2);
  const auto ring7 = build_topology(TopologyKind::ring, 7);
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(ring7.degree(i), 2);
    EXPECT_TRUE(ring7.connected(i, (i + 1) % 7));
  }
  const auto complete = build_topology(TopologyKind::complete, 5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(complete.degree(i), 4);
  EXPECT_EQ(build_topology(TopologyKind::ring, 2).degree(0), 1);
  EXPECT_EQ(build_topology(TopologyKind::ring, 1).degree(0), 0);
}

TEST(Topology, GridLayout) {
  const auto g = build_topology(TopologyKind::grid, 6);  // 2 x 3
  EXPECT_EQ(g.degree(0), 2);
  EXPECT_EQ(g.degree(1), 3);
  EXPECT_TRUE(g.connected(1, 4));
  EXPECT_FALSE(g.connected(2, 3));
}

TEST(Topology, RejectsDisconnectedAndMalformed) {
  EXPECT_THROW(build_topology(TopologyKind::custom, 4, {{0, 1}, {1, 2}}), InvalidArgument);
  EXPECT_THROW(build_topology(TopologyKind::custom, 3, {{0, 0}, {1, 2}}), InvalidArgument);
  EXPECT_THROW(build_topology(TopologyKind::custom, 3, {{0, 3}}), InvalidArgument);
  EXPECT_THROW(build_topology(TopologyKind::ring, 0), InvalidArgument);
  Eigen::Matrix<bool, 2, 2> asym;
  asym << false, true, false, false;
  EXPECT_THROW(Topology{asym}, InvalidArgument);
}

TEST(MetropolisWeights, CompleteGraphIsUniform) {
  const auto W = metropolis_weights(build_topology(TopologyKind::complete, 4));
  EXPECT_LE((W - Eigen::MatrixXd::Constant(4, 4, 0.25)).cwiseAbs().maxCoeff(), 1e-15);
  const auto W3 = metropolis_weights(build_topology(TopologyKind::ring, 3));
  EXPECT_LE((W3 - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MetropolisWeights, DoublyStochasticOnRandomGraphs) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 1 + static_cast<int>(rng.uniform_index(12));
    const auto topo = random_connected(rng, K);
    for (auto rule : {WeightRule::metropolis, WeightRule::lazy_metropolis}) {
      const auto W = mixing_matrix(topo, rule);
      EXPECT_TRUE(W.isApprox(W.transpose(), 0.0));
      EXPECT_GE(W.minCoeff(), 0.0);
      for (int i = 0; i < K; ++i) {
        EXPECT_NEAR(W.row(i).sum(), 1.0, 1e-14);
        EXPECT_NEAR(W.col(i).sum(), 1.0, 1e-14);
        for (int j = 0; j < K; ++j)
          if (i != j && !topo.connected(i, j)) EXPECT_EQ(W(i, j), 0.0);
      }
    }
  }
}

TEST(ConsensusSum, ZeroRoundsScalesLocalValue) {
  Rng rng(2);
  const auto topo = build_topology(TopologyKind::ring, 5);
  const auto v = random_values(rng, 5, 4);
  const auto out = consensus_sum(v, topo, {0, WeightRule::metropolis});
  for (int k = 0; k < 5; ++k) EXPECT_TRUE(out[k] == 5.0 * v[k]);
}

TEST(ConsensusSum, CompleteGraphExactInOneRound) {
  Rng rng(3);
  for (int K : {2, 3, 4, 6}) {
    const auto topo = build_topology(TopologyKind::complete, K);
    const auto v = random_values(rng, K, 30);
    const auto sum = total(v);
    for (int L : {1, 2, 7}) {
      const auto out = consensus_sum(v, topo, {L, WeightRule::metropolis});
      for (const auto& x : out) EXPECT_LE((x - sum).norm(), 1e-12 * sum.norm());
    }
  }
}

TEST(ConsensusSum, RingErrorDecreasesMonotonically) {
  Rng rng(4);
  const auto topo = build_topology(TopologyKind::ring, 5);
  const auto v = random_values(rng, 5, 20);
  const auto sum = total(v);
  double previous = 1e300;
  for (int L : {1, 2, 3, 5, 10, 20, 40, 80}) {
    const auto out = consensus_sum(v, topo, {L, WeightRule::metropolis});
    double worst = 0.0;
    for (const auto& x : out) worst = std::max(worst, (x - sum).norm() / sum.norm());
    EXPECT_LT(worst, previous);
    previous = worst;
  }
  EXPECT_LT(previous, 1e-12);
}

TEST(ConsensusSum, ConservesAverageAndContracts) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 2 + static_cast<int>(rng.uniform_index(9));
    const auto topo = random_connected(rng, K);
    const auto v = random_values(rng, K, 6);
    const Eigen::VectorXd avg = total(v) / K;
    std::vector<double> trace;
    const int L = 1 + static_cast<int>(rng.uniform_index(15));
    const auto rule = trial % 2 ? WeightRule::lazy_metropolis : WeightRule::metropolis;
    for (int l = 0; l <= L; ++l) {
      const auto out = consensus_sum(v, topo, {l, rule});
      EXPECT_LE((total(out) / (K * K) - avg).norm(), 1e-12);
    }
    consensus_sum(v, topo, {L, rule}, &trace);
    ASSERT_EQ(static_cast<int>(trace.size()), L + 1);
    for (int l = 1; l <= L; ++l) EXPECT_LE(trace[l], trace[l - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST(ConsensusSum, LinearAcrossConcatenation) {
  Rng rng(6);
  const auto topo = build_topology(TopologyKind::ring, 6);
  const auto a = random_values(rng, 6, 5), b = random_values(rng, 6, 3);
  std::vector<Eigen::VectorXd> ab;
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd x(8);
    x << a[k], b[k];
    ab.push_back(x);
  }
  const ConsensusConfig cfg{4, WeightRule::metropolis};
  const auto ra = consensus_sum(a, topo, cfg), rb = consensus_sum(b, topo, cfg), rab = consensus_sum(ab, topo, cfg);
  for (int k = 0; k < 6; ++k) {
    EXPECT_TRUE(rab[k].head(5) == ra[k]);
    EXPECT_TRUE(rab[k].tail(3) == rb[k]);
  }
}

TEST(ConsensusSum, LazyRuleIsNotExactOnCompleteGraph) {
  Rng rng(7);
  const auto topo = build_topology(TopologyKind::ring, 3);
  const auto v = random_values(rng, 3, 4);
  const auto sum = total(v);
  const auto one = consensus_sum(v, topo, {1, WeightRule::lazy_metropolis});
  EXPECT_GT((one[0] - sum).norm(), 1e-3);
  // Error halves each round on the 3-ring.
  const auto two = consensus_sum(v, topo, {2, WeightRule::lazy_metropolis});
  EXPECT_NEAR((two[0] - sum).norm(), 0.5 * (one[0] - sum).norm(), 1e-12);
}

TEST(ConsensusSum, RejectsMismatchedInput) {
  const auto topo = build_topology(TopologyKind::ring, 3);
  std::vector<Eigen::VectorXd> v{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)};
  EXPECT_THROW(consensus_sum(v, topo, {1, WeightRule::metropolis}), InvalidArgument);
  v.pop_back();
  EXPECT_THROW(consensus_sum(v, topo, {1, WeightRule::metropolis}), InvalidArgument);
  v.push_back(Eigen::VectorXd::Zero(2));
  EXPECT_THROW(consensus_sum(v, topo, {-1, WeightRule::metropolis}), InvalidArgument);
}
