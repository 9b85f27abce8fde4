#include <cmath>

#include <gtest/gtest.h>

#include "roadgp/dynamics.hpp"
#include "roadgp/errors.hpp"
#include "test_helpers.hpp"

using namespace roadgp;
using roadgp::testing::rbf;

namespace {

InfoState trained_state(std::uint64_t seed, double prior_var = 2.0) {
  Rng rng(seed);
  const auto spec = rbf(2, 0.3, prior_var, 0.1);
  const auto fm = sample_frequencies(spec, 12, 2, seed);
  auto s = prior_state(spec, 12);
  apply_increment_inplace(s, compute_increment(feature_matrix(fm, roadgp::testing::random_matrix(rng, 40, 2)),
                                               roadgp::testing::random_vector(rng, 40), 0.1));
  return s;
}

}  // namespace

TEST(Forgetting, NuOneIsIdentity) {
  const auto s = trained_state(1);
  for (auto mode : {DynamicsMode::b2p, DynamicsMode::ui, DynamicsMode::static_model, DynamicsMode::spatiotemporal}) {
    const auto f = apply_forgetting(s, {mode, 1.0});
    EXPECT_TRUE(f.D == s.D);
    EXPECT_TRUE(f.eta == s.eta);
  }
}

TEST(Forgetting, StaticAndSpatiotemporalIgnoreNu) {
  const auto s = trained_state(2);
  EXPECT_TRUE(apply_forgetting(s, {DynamicsMode::static_model, 0.3}).D == s.D);
  EXPECT_TRUE(apply_forgetting(s, {DynamicsMode::spatiotemporal, 0.3}).eta == s.eta);
}

TEST(Forgetting, BackToPriorWithZeroNuResets) {
  const auto s = trained_state(3, 4.0);
  const auto f = apply_forgetting(s, {DynamicsMode::b2p, 0.0});
  EXPECT_TRUE(f.D == Eigen::MatrixXd::Identity(24, 24) / 4.0);
  EXPECT_TRUE(f.eta.isZero(0.0));
}

TEST(Forgetting, UncertaintyInjectionPreservesMean) {
  const auto s = trained_state(4);
  const auto before = posterior_moments(s);
  for (double nu : {0.9, 0.5, 0.01}) {
    const auto after = posterior_moments(apply_forgetting(s, {DynamicsMode::ui, nu}));
    EXPECT_LE((after.mean - before.mean).norm(), 1e-10 * before.mean.norm());
    EXPECT_LE(roadgp::testing::rel_frobenius(after.covariance, before.covariance / nu), 1e-10);
  }
}

TEST(Forgetting, UncertaintyInjectionRejectsDegenerateNu) {
  const auto s = trained_state(5);
  EXPECT_THROW(apply_forgetting(s, {DynamicsMode::ui, 1e-7}), InvalidArgument);
  EXPECT_THROW(apply_forgetting(s, {DynamicsMode::b2p, 1.5}), InvalidArgument);
}

TEST(Forgetting, BackToPriorContractsGeometrically) {
  auto s = trained_state(6);
  const auto prior = prior_state(rbf(2, 0.3, 2.0, 0.1), 12);
  const double nu = 0.8;
  const double d0 = (s.D - prior.D).norm();
  for (int n = 1; n <= 30; ++n) {
    apply_forgetting_inplace(s, {DynamicsMode::b2p, nu});
    EXPECT_NEAR((s.D - prior.D).norm(), std::pow(nu, n) * d0, 1e-10 * d0);
    EXPECT_NEAR(s.eta.norm(), std::pow(nu, n) * trained_state(6).eta.norm(), 1e-10);
  }
}

TEST(Forgetting, PreservesSymmetryAndDefiniteness) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = trained_state(100 + trial);
    const DynamicsConfig cfg{trial % 2 ? DynamicsMode::ui : DynamicsMode::b2p, rng.uniform(0.01, 1.0)};
    apply_forgetting_inplace(s, cfg);
    EXPECT_TRUE(s.D.isApprox(s.D.transpose(), 0.0));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.D);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(AugmentTime, Concatenates) {
  const auto v = augment_time(Eigen::Vector2d(0.2, 0.7), 46.0);
  EXPECT_TRUE(v == Eigen::Vector3d(0.2, 0.7, 46.0));
  const auto t_only = augment_time(Eigen::VectorXd(0), 3.0);
  ASSERT_EQ(t_only.size(), 1);
  EXPECT_EQ(t_only[0], 3.0);
  Eigen::MatrixXd X(2, 1);
  X << 0.1, 0.9;
  Eigen::MatrixXd expected(2, 2);
  expected << 0.1, 5.0, 0.9, 5.0;
  EXPECT_TRUE(augment_time_rows(X, 5.0) == expected);
}

TEST(AugmentTime, ApproximatesProductKernel) {
  const Eigen::Index J = 2000;
  KernelSpec k = rbf(1, 0.3);
  k.temporal_lengthscale = 4.0;
  const auto fm = sample_frequencies(k, J, 1, 17);
  Rng rng(18);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x1 = rng.uniform(), x2 = rng.uniform(), t1 = rng.uniform(0, 48), t2 = rng.uniform(0, 48);
    const double ks = std::exp(-0.5 * (x1 - x2) * (x1 - x2) / (0.3 * 0.3));
    const double kt = std::exp(-0.5 * (t1 - t2) * (t1 - t2) / 16.0);
    Eigen::VectorXd a(1), b(1);
    a << x1;
    b << x2;
    err += std::abs(feature_map(fm, augment_time(a, t1)).dot(feature_map(fm, augment_time(b, t2))) - ks * kt);
  }
  EXPECT_LE(err / 100.0, 3.0 / std::sqrt(static_cast<double>(J)));
}
