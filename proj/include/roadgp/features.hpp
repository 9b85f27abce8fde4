#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace roadgp {

/// ARD RBF kernel with optional separable RBF factor over time.
struct KernelSpec {
  Eigen::VectorXd spatial_lengthscales;
  std::optional<double> temporal_lengthscale;
  double prior_variance = 1.0;
  double obs_variance = 1.0;

  Eigen::Index spatial_dim() const { return spatial_lengthscales.size(); }
  /// Input dimension seen by the feature map (d, or d + 1 with time).
  Eigen::Index input_dim() const {
    return spatial_dim() + (temporal_lengthscale ? 1 : 0);
  }

  /// Throws InvalidArgument on non-positive lengthscales or variances.
  void validate() const;

  /// Closed-form kernel value, scaled to unit amplitude.
  double evaluate(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

/// Sampled spectral frequencies, one row per frequency.
///
/// Immutable once sampled. All agents derive the map from the same seed so
/// that their sufficient statistics live in one shared basis.
class FeatureMap {
 public:
  FeatureMap(Eigen::MatrixXd frequencies, std::uint64_t seed);

  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  Eigen::Index num_features() const { return frequencies_.rows(); }
  Eigen::Index input_dim() const { return frequencies_.cols(); }
  /// Length of phi(x), i.e. 2J.
  Eigen::Index feature_dim() const { return 2 * frequencies_.rows(); }
  std::uint64_t seed() const { return seed_; }

 private:
  Eigen::MatrixXd frequencies_;
  std::uint64_t seed_;
};

/// Draws J rows from N(0, diag(1 / lengthscale^2)), plus a 1/l_t column for
/// spatiotemporal kernels. `input_dim` must match the spatial lengthscales.
FeatureMap sample_frequencies(const KernelSpec& spec, Eigen::Index num_features,
                              Eigen::Index input_dim, std::uint64_t seed);

/// (1/sqrt(J)) [sin(x'v_1), cos(x'v_1), ..., sin(x'v_J), cos(x'v_J)].
Eigen::VectorXd feature_map(const FeatureMap& fm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Column i is feature_map of row i of X; result is 2J x N.
Eigen::MatrixXd feature_matrix(const FeatureMap& fm, const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace roadgp
