#include <cmath>

#include <gtest/gtest.h>

#include "roadgp/errors.hpp"
#include "roadgp/robust.hpp"
#include "test_helpers.hpp"

using namespace roadgp;
using roadgp::testing::rbf;

TEST(HuberWeight, PiecewiseValues) {
  EXPECT_EQ(huber_weight(0.0, 1.0), 1.0);
  EXPECT_EQ(huber_weight(2.0, 1.0), 0.5);
  EXPECT_EQ(huber_weight(-2.0, 1.0), 0.5);
  EXPECT_EQ(huber_weight(1.0, 1.0), 1.0);
  EXPECT_EQ(huber_weight(1e6, 1e9), 1.0);
  EXPECT_THROW(huber_weight(1.0, 0.0), InvalidArgument);
}

TEST(HampelWeight, PiecewiseValues) {
  EXPECT_EQ(hampel_weight(0.5, 1, 2, 4), 1.0);
  EXPECT_EQ(hampel_weight(5.0, 1, 2, 4), 0.0);
  EXPECT_EQ(hampel_weight(1.5, 1, 2, 4), 1.0 / 1.5);
  EXPECT_DOUBLE_EQ(hampel_weight(3.0, 1, 2, 4), 1.0 * (4.0 - 3.0) / (3.0 * 2.0));
  EXPECT_EQ(hampel_weight(4.0, 1, 2, 4), 0.0);
}

TEST(HampelWeight, ContinuousAtMiddleBreakpoint) {
  // a/|e| and a(c-|e|)/(|e|(c-b)) agree at |e| = b.
  EXPECT_DOUBLE_EQ(hampel_weight(2.0, 1, 2, 4), 0.5);
  EXPECT_DOUBLE_EQ(1.0 * (4.0 - 2.0) / (2.0 * (4.0 - 2.0)), 0.5);
  EXPECT_NEAR(hampel_weight(2.0 + 1e-9, 1, 2, 4), 0.5, 1e-8);
  EXPECT_NEAR(hampel_weight(4.0 - 1e-9, 1, 2, 4), 0.0, 1e-8);
}

TEST(HampelWeight, RejectsBadBreakpoints) {
  EXPECT_THROW(hampel_weight(1.0, 2, 1, 4), InvalidArgument);
  EXPECT_THROW(hampel_weight(1.0, 0, 1, 4), InvalidArgument);
  EXPECT_THROW(hampel_weight(1.0, 1, 4, 4), InvalidArgument);
  RobustConfig cfg{RobustKind::hampel, 1.0, 3.0, 2.0, 5.0};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(WeightFunctions, EvenBoundedNonIncreasing) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(0.1, 3), b = a + rng.uniform(0.1, 3), c = b + rng.uniform(0.1, 5);
    const double delta = rng.uniform(0.1, 4);
    double prev_hu = 1.0, prev_ha = 1.0;
    for (double e = 0.0; e < 20.0; e += 0.01) {
      const double hu = huber_weight(e, delta), ha = hampel_weight(e, a, b, c);
      EXPECT_EQ(hu, huber_weight(-e, delta));
      EXPECT_EQ(ha, hampel_weight(-e, a, b, c));
      EXPECT_TRUE(hu > 0.0 && hu <= 1.0);
      EXPECT_TRUE(ha >= 0.0 && ha <= 1.0);
      EXPECT_LE(hu, prev_hu);
      EXPECT_LE(ha, prev_ha + 1e-15);
      prev_hu = hu;
      prev_ha = ha;
    }
  }
}

TEST(StandardizedResiduals, PriorCase) {
  const auto spec = rbf(1, 0.5, 1.0, 1.0);
  const auto fm = sample_frequencies(spec, 8, 1, 0);
  const auto state = prior_state(spec, 8);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Constant(2, 1, 0.3);
  const Eigen::Vector2d y(2.0, 0.0);
  const auto e = standardized_residuals(state, fm, X, y);
  EXPECT_NEAR(e[0], 2.0 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(e[1], 0.0);
}

TEST(StandardizedResiduals, ZeroWhenTargetEqualsMean) {
  Rng rng(9);
  const auto spec = rbf(2, 0.3, 1.0, 0.1);
  const auto fm = sample_frequencies(spec, 15, 2, 4);
  auto state = prior_state(spec, 15);
  apply_increment_inplace(state, compute_increment(feature_matrix(fm, roadgp::testing::random_matrix(rng, 20, 2)),
                                                   roadgp::testing::random_vector(rng, 20), 0.1));
  const auto X = roadgp::testing::random_matrix(rng, 5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y[i] = predict(state, fm, X.row(i).transpose()).mean;
  EXPECT_LE(standardized_residuals(state, fm, X, y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StandardizedResiduals, ScaleInvariantWeightPattern) {
  // Scaling y by s, and both variances by s^2, scales means and standard
  // deviations alike, so residuals (and Huber membership) are unchanged.
  Rng rng(10);
  const double s = 7.5;
  const auto spec = rbf(1, 0.2, 1.0, 0.05);
  auto scaled_spec = spec;
  scaled_spec.prior_variance *= s * s;
  scaled_spec.obs_variance *= s * s;
  const auto fm = sample_frequencies(spec, 20, 1, 6);
  const auto X_train = roadgp::testing::random_matrix(rng, 30, 1);
  const auto y_train = roadgp::testing::random_vector(rng, 30, -2, 2);
  auto state = prior_state(spec, 20);
  auto scaled = prior_state(scaled_spec, 20);
  const auto Phi = feature_matrix(fm, X_train);
  apply_increment_inplace(state, compute_increment(Phi, y_train, spec.obs_variance));
  apply_increment_inplace(scaled, compute_increment(Phi, s * y_train, scaled_spec.obs_variance));

  const auto X = roadgp::testing::random_matrix(rng, 40, 1);
  const auto y = roadgp::testing::random_vector(rng, 40, -4, 4);
  const auto e1 = standardized_residuals(state, fm, X, y);
  const auto e2 = standardized_residuals(scaled, fm, X, s * y);
  for (int i = 0; i < 40; ++i) {
    EXPECT_NEAR(e1[i], e2[i], 1e-9);
    EXPECT_EQ(huber_weight(e1[i], 1.345) < 1.0, huber_weight(e2[i], 1.345) < 1.0) << i;
  }
}

TEST(RobustIncrement, UnitWeightsBitwiseEqualPlainIncrement) {
  Rng rng(12);
  const auto Phi = roadgp::testing::random_matrix(rng, 40, 25, -1, 1);
  const auto y = roadgp::testing::random_vector(rng, 25);
  const auto plain = compute_increment(Phi, y, 0.05);
  const auto robust = robust_increment(Phi, y, Eigen::VectorXd::Ones(25), 0.05);
  EXPECT_TRUE(plain.P == robust.P);
  EXPECT_TRUE(plain.s == robust.s);
}

TEST(RobustIncrement, ZeroWeightDeletesObservation) {
  Rng rng(14);
  const auto Phi = roadgp::testing::random_matrix(rng, 10, 6, -1, 1);
  const auto y = roadgp::testing::random_vector(rng, 6);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  w[3] = 0.0;
  const auto robust = robust_increment(Phi, y, w, 0.2);
  Eigen::MatrixXd Phi_del(10, 5);
  Eigen::VectorXd y_del(5);
  Phi_del << Phi.leftCols(3), Phi.rightCols(2);
  y_del << y.head(3), y.tail(2);
  const auto deleted = compute_increment(Phi_del, y_del, 0.2);
  EXPECT_LE(roadgp::testing::rel_frobenius(robust.P, deleted.P), 1e-14);
  EXPECT_LE(roadgp::testing::rel_frobenius(robust.s, deleted.s), 1e-14);
}

TEST(RobustIncrement, HandCaseTwoObservations) {
  Eigen::MatrixXd Phi(2, 2);
  Phi << 1.0, 2.0,
         3.0, 4.0;
  const Eigen::Vector2d y(1.0, -1.0), w(1.0, 0.5);
  const auto inc = robust_increment(Phi, y, w, 0.5);
  // P = 2 * (1*[1 3]'[1 3] + 0.5*[2 4]'[2 4]); s = 2 * (1*[1 3]*1 + 0.5*[2 4]*(-1))
  Eigen::Matrix2d P;
  P << 2 * (1 + 2), 2 * (3 + 4),
       2 * (3 + 4), 2 * (9 + 8);
  EXPECT_LE((inc.P - P).norm(), 1e-14);
  EXPECT_LE((inc.s - Eigen::Vector2d(2 * (1 - 1), 2 * (3 - 2))).norm(), 1e-14);
}

TEST(RobustIncrement, RejectsOutOfRangeWeights) {
  const Eigen::MatrixXd Phi = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_THROW(robust_increment(Phi, Eigen::Vector2d::Ones(), Eigen::Vector2d(1.0, 1.5), 1.0), InvalidArgument);
  EXPECT_THROW(robust_increment(Phi, Eigen::Vector2d::Ones(), Eigen::Vector2d(-0.1, 1.0), 1.0), InvalidArgument);
  EXPECT_THROW(robust_increment(Phi, Eigen::Vector2d::Ones(), Eigen::Vector3d::Ones(), 1.0), InvalidArgument);
}

TEST(RobustIncrement, DownweightingNeverRaisesEigenvalues) {
  Rng rng(15);
  for (int trial = 0; trial < 25; ++trial) {
    const auto Phi = roadgp::testing::random_matrix(rng, 8, 12, -1, 1);
    const auto y = roadgp::testing::random_vector(rng, 12);
    Eigen::VectorXd w(12), lower(12);
    for (int i = 0; i < 12; ++i) {
      w[i] = rng.uniform();
      lower[i] = w[i] * rng.uniform();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hi(robust_increment(Phi, y, w, 0.3).P);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lo(robust_increment(Phi, y, lower, 0.3).P);
    for (int i = 0; i < 8; ++i) EXPECT_LE(lo.eigenvalues()[i], hi.eigenvalues()[i] + 1e-12);
  }
}
