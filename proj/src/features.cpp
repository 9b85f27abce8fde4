#include "roadgp/features.hpp"

#include <cmath>
#include <string>

#include "roadgp/errors.hpp"
#include "roadgp/random.hpp"

namespace roadgp {

void KernelSpec::validate() const {
  if (spatial_lengthscales.size() == 0 && !temporal_lengthscale) {
    throw InvalidArgument("kernel has no input dimensions");
  }
  for (Eigen::Index i = 0; i < spatial_lengthscales.size(); ++i) {
    if (!(spatial_lengthscales[i] > 0.0)) {
      throw InvalidArgument("spatial lengthscale " + std::to_string(i) + " must be positive");
    }
  }
  if (temporal_lengthscale && !(*temporal_lengthscale > 0.0)) {
    throw InvalidArgument("temporal lengthscale must be positive");
  }
  if (!(prior_variance > 0.0)) throw InvalidArgument("prior variance must be positive");
  if (!(obs_variance > 0.0)) throw InvalidArgument("observation variance must be positive");
}

double KernelSpec::evaluate(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (a.size() != input_dim() || b.size() != input_dim()) {
    throw InvalidArgument("kernel input dimension mismatch");
  }
  double sq = 0.0;
  for (Eigen::Index i = 0; i < spatial_dim(); ++i) {
    const double r = (a[i] - b[i]) / spatial_lengthscales[i];
    sq += r * r;
  }
  if (temporal_lengthscale) {
    const Eigen::Index i = spatial_dim();
    const double r = (a[i] - b[i]) / *temporal_lengthscale;
    sq += r * r;
  }
  return std::exp(-0.5 * sq);
}

FeatureMap::FeatureMap(Eigen::MatrixXd frequencies, std::uint64_t seed)
    : frequencies_(std::move(frequencies)), seed_(seed) {
  if (frequencies_.rows() < 1 || frequencies_.cols() < 1) {
    throw InvalidArgument("feature map needs at least one frequency and one input dimension");
  }
}

FeatureMap sample_frequencies(const KernelSpec& spec, Eigen::Index num_features,
                              Eigen::Index input_dim, std::uint64_t seed) {
  if (num_features < 1) throw InvalidArgument("number of features must be >= 1");
  if (input_dim < 1) throw InvalidArgument("input dimension must be >= 1");
  if (spec.spatial_dim() != input_dim) {
    throw InvalidArgument("lengthscale count " + std::to_string(spec.spatial_dim()) +
                          " does not match input dimension " + std::to_string(input_dim));
  }
  spec.validate();

  const Eigen::Index cols = spec.input_dim();
  Eigen::VectorXd inv_scale(cols);
  inv_scale.head(input_dim) = spec.spatial_lengthscales.cwiseInverse();
  if (spec.temporal_lengthscale) inv_scale[input_dim] = 1.0 / *spec.temporal_lengthscale;

  // Row-major fill order keeps row j independent of J.
  Rng rng(seed);
  Eigen::MatrixXd V(num_features, cols);
  for (Eigen::Index j = 0; j < num_features; ++j) {
    for (Eigen::Index c = 0; c < cols; ++c) V(j, c) = rng.normal() * inv_scale[c];
  }
  return FeatureMap(std::move(V), seed);
}

namespace {

void write_features(const FeatureMap& fm, const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> out) {
  const Eigen::Index J = fm.num_features();
  const double scale = 1.0 / std::sqrt(static_cast<double>(J));
  const Eigen::VectorXd proj = fm.frequencies() * x;
  for (Eigen::Index j = 0; j < J; ++j) {
    out[2 * j] = scale * std::sin(proj[j]);
    out[2 * j + 1] = scale * std::cos(proj[j]);
  }
}

}  // namespace

Eigen::VectorXd feature_map(const FeatureMap& fm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != fm.input_dim()) {
    throw InvalidArgument("feature_map: input has length " + std::to_string(x.size()) +
                          ", expected " + std::to_string(fm.input_dim()));
  }
  Eigen::VectorXd phi(fm.feature_dim());
  write_features(fm, x, phi);
  return phi;
}

Eigen::MatrixXd feature_matrix(const FeatureMap& fm, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != fm.input_dim()) {
    throw InvalidArgument("feature_matrix: inputs have " + std::to_string(X.cols()) +
                          " columns, expected " + std::to_string(fm.input_dim()));
  }
  // Same per-point path as feature_map so columns match it bit-for-bit.
  Eigen::MatrixXd Phi(fm.feature_dim(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    write_features(fm, X.row(i).transpose(), Phi.col(i));
  }
  return Phi;
}

}  // namespace roadgp
