#include <cmath>

#include <gtest/gtest.h>

#include "roadgp/errors.hpp"
#include "roadgp/features.hpp"
#include "test_helpers.hpp"

using namespace roadgp;
using roadgp::testing::rbf;

TEST(SampleFrequencies, SeededDeterminism) {
  const auto a = sample_frequencies(rbf(1, 1.0), 3, 1, 42);
  const auto b = sample_frequencies(rbf(1, 1.0), 3, 1, 42);
  ASSERT_EQ(a.frequencies().rows(), 3);
  ASSERT_EQ(a.frequencies().cols(), 1);
  EXPECT_TRUE(a.frequencies() == b.frequencies());
  const auto c = sample_frequencies(rbf(1, 1.0), 3, 1, 43);
  EXPECT_FALSE(a.frequencies() == c.frequencies());
}

TEST(SampleFrequencies, SpectralVarianceMatchesInverseSquaredLengthscale) {
  const auto fm = sample_frequencies(rbf(1, 0.1), 10000, 1, 7);
  const Eigen::VectorXd v = fm.frequencies().col(0);
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
  EXPECT_NEAR(var, 100.0, 5.0);
}

TEST(SampleFrequencies, TemporalColumnScaledByInverseTemporalLengthscale) {
  KernelSpec st = rbf(2, 1.0);
  st.temporal_lengthscale = 4.0;
  KernelSpec unit = st;
  unit.temporal_lengthscale = 1.0;
  const auto a = sample_frequencies(st, 5, 2, 0);
  const auto b = sample_frequencies(unit, 5, 2, 0);
  ASSERT_EQ(a.frequencies().rows(), 5);
  ASSERT_EQ(a.frequencies().cols(), 3);
  EXPECT_TRUE(a.frequencies().leftCols(2) == b.frequencies().leftCols(2));
  for (int j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(a.frequencies()(j, 2), b.frequencies()(j, 2) / 4.0);
}

TEST(SampleFrequencies, RejectsInvalidArguments) {
  EXPECT_THROW(sample_frequencies(rbf(1, 1.0), 0, 1, 0), InvalidArgument);
  EXPECT_THROW(sample_frequencies(rbf(1, 1.0), 3, 0, 0), InvalidArgument);
  EXPECT_THROW(sample_frequencies(rbf(2, 1.0), 3, 1, 0), InvalidArgument);
  EXPECT_THROW(sample_frequencies(rbf(1, -0.5), 3, 1, 0), InvalidArgument);
  EXPECT_THROW(sample_frequencies(rbf(1, 0.0), 3, 1, 0), InvalidArgument);
}

TEST(FeatureMap, ZeroInputAlternatesSinCos) {
  const auto fm = sample_frequencies(rbf(2, 0.5), 4, 2, 3);
  const auto phi = feature_map(fm, Eigen::Vector2d::Zero());
  ASSERT_EQ(phi.size(), 8);
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(phi[2 * j], 0.0);
    EXPECT_DOUBLE_EQ(phi[2 * j + 1], 1.0 / std::sqrt(4.0));
  }
}

TEST(FeatureMap, UnitNormProperty) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = static_cast<Eigen::Index>(1 + rng.uniform_index(4));
    const auto J = static_cast<Eigen::Index>(1 + rng.uniform_index(300));
    const auto fm = sample_frequencies(rbf(d, rng.uniform(0.01, 3.0)), J, d, trial);
    const auto x = roadgp::testing::random_vector(rng, d, -50.0, 50.0);
    EXPECT_NEAR(feature_map(fm, x).squaredNorm(), 1.0, 1e-12);
  }
}

TEST(FeatureMap, ApproximatesRbfKernel) {
  const Eigen::Index J = 2000;
  const auto k = rbf(1, 1.0);
  const auto fm = sample_frequencies(k, J, 1, 11);
  Rng rng(5);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd a(1), b(1);
    a << rng.uniform(-2.0, 2.0);
    b << rng.uniform(-2.0, 2.0);
    const double exact = std::exp(-0.5 * (a[0] - b[0]) * (a[0] - b[0]));
    err += std::abs(feature_map(fm, a).dot(feature_map(fm, b)) - exact);
  }
  EXPECT_LE(err / 100.0, 3.0 / std::sqrt(static_cast<double>(J)));
}

TEST(FeatureMap, UnbiasedAcrossSeeds) {
  const auto k = rbf(2, 0.7);
  const Eigen::Vector2d a(0.1, 0.4), b(0.5, -0.2);
  const double exact = k.evaluate(a, b);
  std::vector<double> draws;
  for (int seed = 0; seed < 50; ++seed) {
    const auto fm = sample_frequencies(k, 64, 2, 1000 + seed);
    draws.push_back(feature_map(fm, a).dot(feature_map(fm, b)));
  }
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= draws.size();
  double var = 0.0;
  for (double d : draws) var += (d - mean) * (d - mean);
  const double se = std::sqrt(var / (draws.size() - 1) / draws.size());
  EXPECT_LE(std::abs(mean - exact), 3.0 * se);
}

TEST(FeatureMap, SpatiotemporalEqualsScaledStaticMap) {
  KernelSpec st = rbf(2, 0.3);
  st.spatial_lengthscales[1] = 0.8;
  st.temporal_lengthscale = 4.0;
  KernelSpec unit = rbf(2, 1.0);
  unit.temporal_lengthscale = 1.0;
  const auto fm = sample_frequencies(st, 50, 2, 9);
  const auto fm_unit = sample_frequencies(unit, 50, 2, 9);
  const Eigen::Vector3d x(0.2, 0.7, 46.0);
  const Eigen::Vector3d scaled(0.2 / 0.3, 0.7 / 0.8, 46.0 / 4.0);
  EXPECT_LE((feature_map(fm, x) - feature_map(fm_unit, scaled)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FeatureMap, DimensionMismatchThrows) {
  const auto fm = sample_frequencies(rbf(2, 1.0), 3, 2, 0);
  EXPECT_THROW(feature_map(fm, Eigen::Vector3d::Zero()), InvalidArgument);
  EXPECT_THROW(feature_matrix(fm, Eigen::MatrixXd::Zero(4, 3)), InvalidArgument);
}

TEST(FeatureMatrix, ColumnsMatchFeatureMap) {
  const auto fm = sample_frequencies(rbf(3, 0.4), 5, 3, 2);
  Rng rng(3);
  Eigen::MatrixXd X = roadgp::testing::random_matrix(rng, 7, 3);
  X.row(4) = X.row(1);
  const auto Phi = feature_matrix(fm, X);
  ASSERT_EQ(Phi.rows(), 10);
  ASSERT_EQ(Phi.cols(), 7);
  for (int i = 0; i < 7; ++i) EXPECT_TRUE(Phi.col(i) == feature_map(fm, X.row(i).transpose()));
  EXPECT_TRUE(Phi.col(4) == Phi.col(1));

  const auto single = feature_matrix(fm, X.topRows(1));
  EXPECT_TRUE(single.col(0) == feature_map(fm, X.row(0).transpose()));
}
