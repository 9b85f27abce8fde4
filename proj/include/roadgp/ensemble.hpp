#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "roadgp/features.hpp"
#include "roadgp/info_filter.hpp"

namespace roadgp {

struct EnsembleSpec {
  std::vector<KernelSpec> members;
  Eigen::Index num_features = 200;
  std::uint64_t base_seed = 0;

  void validate() const;
  /// Cartesian product of isotropic lengthscales and prior variances, in
  /// lengthscale-major order.
  static EnsembleSpec grid(Eigen::Index spatial_dim, const std::vector<double>& lengthscales,
                           const std::vector<double>& prior_variances, double obs_variance,
                           std::optional<double> temporal_lengthscale, Eigen::Index num_features,
                           std::uint64_t base_seed);
};

struct EnsembleState {
  std::vector<InfoState> models;
  Eigen::VectorXd log_evidence;

  std::size_t size() const { return models.size(); }
  /// softmax(log_evidence).
  Eigen::VectorXd weights() const;
};

/// Member m's frequencies come from derive_seed(base_seed, m), independent of
/// the agent, so every agent holding the same spec shares each basis.
std::vector<FeatureMap> ensemble_feature_maps(const EnsembleSpec& spec);
EnsembleState init_ensemble(const EnsembleSpec& spec);

/// log_evidence += increments. Rejects NaN.
void update_evidence(EnsembleState& state, const Eigen::Ref<const Eigen::VectorXd>& increments);

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

/// Gaussian mixture over member predictions.
struct MixturePrediction {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  double mean = 0.0;
  double variance = 0.0;  // moment matched

  /// Exact log density of the mixture at y.
  double log_density(double y) const;
};

MixturePrediction combine_predictions(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                      const std::vector<Prediction>& members);

MixturePrediction mixture_predict(const EnsembleState& state, const std::vector<FeatureMap>& maps,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_star);

double gaussian_log_density(double y, double mean, double variance);

}  // namespace roadgp
