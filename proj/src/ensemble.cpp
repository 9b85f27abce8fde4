#include "roadgp/ensemble.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "roadgp/errors.hpp"
#include "roadgp/random.hpp"

namespace roadgp {

void EnsembleSpec::validate() const {
  if (members.empty()) throw InvalidArgument("ensemble needs at least one member");
  if (num_features < 1) throw InvalidArgument("number of features must be >= 1");
  for (const auto& m : members) {
    m.validate();
    if (m.spatial_dim() != members.front().spatial_dim() ||
        m.input_dim() != members.front().input_dim()) {
      throw InvalidArgument("ensemble members must share input dimensions");
    }
  }
}

EnsembleSpec EnsembleSpec::grid(Eigen::Index spatial_dim, const std::vector<double>& lengthscales,
                                const std::vector<double>& prior_variances, double obs_variance,
                                std::optional<double> temporal_lengthscale,
                                Eigen::Index num_features, std::uint64_t base_seed) {
  EnsembleSpec spec;
  spec.num_features = num_features;
  spec.base_seed = base_seed;
  for (double ell : lengthscales) {
    for (double pv : prior_variances) {
      KernelSpec k;
      k.spatial_lengthscales = Eigen::VectorXd::Constant(spatial_dim, ell);
      k.temporal_lengthscale = temporal_lengthscale;
      k.prior_variance = pv;
      k.obs_variance = obs_variance;
      spec.members.push_back(k);
    }
  }
  spec.validate();
  return spec;
}

Eigen::VectorXd EnsembleState::weights() const { return softmax(log_evidence); }

std::vector<FeatureMap> ensemble_feature_maps(const EnsembleSpec& spec) {
  spec.validate();
  std::vector<FeatureMap> maps;
  maps.reserve(spec.members.size());
  for (std::size_t m = 0; m < spec.members.size(); ++m) {
    const auto& k = spec.members[m];
    maps.push_back(sample_frequencies(k, spec.num_features, k.spatial_dim(),
                                      derive_seed(spec.base_seed, m)));
  }
  return maps;
}

EnsembleState init_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  EnsembleState state;
  for (const auto& k : spec.members) state.models.push_back(prior_state(k, spec.num_features));
  state.log_evidence = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.members.size()));
  return state;
}

void update_evidence(EnsembleState& state, const Eigen::Ref<const Eigen::VectorXd>& increments) {
  if (increments.size() != state.log_evidence.size()) {
    throw InvalidArgument("evidence increment length does not match ensemble size");
  }
  if (increments.hasNaN()) throw InvalidArgument("evidence increment contains NaN");
  state.log_evidence += increments;
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd w = (logits.array() - top).exp();
  return w / w.sum();
}

double gaussian_log_density(double y, double mean, double variance) {
  const double r = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

double MixturePrediction::log_density(double y) const {
  double top = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd terms(weights.size());
  for (Eigen::Index m = 0; m < weights.size(); ++m) {
    terms[m] = weights[m] > 0.0 ? std::log(weights[m]) + gaussian_log_density(y, means[m], variances[m])
                                : -std::numeric_limits<double>::infinity();
    top = std::max(top, terms[m]);
  }
  if (!std::isfinite(top)) return top;
  return top + std::log((terms.array() - top).exp().sum());
}

MixturePrediction combine_predictions(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                      const std::vector<Prediction>& members) {
  if (static_cast<Eigen::Index>(members.size()) != weights.size()) {
    throw InvalidArgument("mixture weights and member predictions differ in count");
  }
  MixturePrediction out;
  out.weights = weights;
  out.means.resize(weights.size());
  out.variances.resize(weights.size());
  for (Eigen::Index m = 0; m < weights.size(); ++m) {
    out.means[m] = members[static_cast<std::size_t>(m)].mean;
    out.variances[m] = members[static_cast<std::size_t>(m)].variance;
  }
  if (weights.size() == 1) {
    out.mean = out.means[0];
    out.variance = out.variances[0];
    return out;
  }
  out.mean = weights.dot(out.means);
  // Centered form of sum w (var + mean^2) - mean^2; never drops below the
  // weighted member variance through cancellation.
  out.variance = weights.dot(out.variances) +
                 weights.dot((out.means.array() - out.mean).square().matrix());
  return out;
}

MixturePrediction mixture_predict(const EnsembleState& state, const std::vector<FeatureMap>& maps,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_star) {
  if (maps.size() != state.size()) throw InvalidArgument("one feature map per member required");
  std::vector<Prediction> preds;
  preds.reserve(state.size());
  for (std::size_t m = 0; m < state.size(); ++m) preds.push_back(predict(state.models[m], maps[m], x_star));
  return combine_predictions(state.weights(), preds);
}

}  // namespace roadgp
