#include "roadgp/robust.hpp"

#include <cmath>
#include <string>

#include "roadgp/errors.hpp"

namespace roadgp {

void RobustConfig::validate() const {
  switch (kind) {
    case RobustKind::none:
      return;
    case RobustKind::huber:
      if (!(delta > 0.0)) throw InvalidArgument("Huber threshold must be positive");
      return;
    case RobustKind::hampel:
      if (!(0.0 < a && a < b && b < c)) {
        throw InvalidArgument("Hampel breakpoints must satisfy 0 < a < b < c");
      }
      return;
  }
}

double RobustConfig::weight(double e) const {
  switch (kind) {
    case RobustKind::huber:
      return huber_weight(e, delta);
    case RobustKind::hampel:
      return hampel_weight(e, a, b, c);
    case RobustKind::none:
      break;
  }
  return 1.0;
}

double huber_weight(double e, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("Huber threshold must be positive");
  const double r = std::abs(e);
  return r <= delta ? 1.0 : delta / r;
}

double hampel_weight(double e, double a, double b, double c) {
  if (!(0.0 < a && a < b && b < c)) {
    throw InvalidArgument("Hampel breakpoints must satisfy 0 < a < b < c");
  }
  const double r = std::abs(e);
  if (r <= a) return 1.0;
  if (r <= b) return a / r;
  if (r <= c) return a * (c - r) / (r * (c - b));
  return 0.0;
}

Eigen::VectorXd standardized_residuals(const InfoState& state, const FeatureMap& fm,
                                       const Eigen::Ref<const Eigen::MatrixXd>& X,
                                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (X.rows() != y.size()) throw InvalidArgument("residuals: input and target counts differ");
  if (fm.feature_dim() != state.dim()) {
    throw InvalidArgument("feature map and state dimensions differ");
  }
  const Posterior post(state);
  const auto preds = post.predict_batch(feature_matrix(fm, X));
  Eigen::VectorXd e(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto& p = preds[static_cast<std::size_t>(i)];
    e[i] = (y[i] - p.mean) / std::sqrt(p.variance);
  }
  return e;
}

Increment robust_increment(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const Eigen::Ref<const Eigen::VectorXd>& weights, double obs_variance) {
  if (weights.size() != y.size() || Phi.cols() != y.size()) {
    throw InvalidArgument("robust_increment: features, targets and weights must agree in length");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) {
      throw InvalidArgument("weight " + std::to_string(i) + " is outside [0, 1]");
    }
  }
  if (!(obs_variance > 0.0)) throw InvalidArgument("observation variance must be positive");
  // Scaling Phi by exact unit weights leaves it unchanged, so all-ones
  // weights reproduce compute_increment bit-for-bit.
  const Eigen::MatrixXd weighted = Phi * weights.asDiagonal();
  const double inv = 1.0 / obs_variance;
  Increment inc;
  inc.P.noalias() = inv * (weighted * Phi.transpose());
  inc.s.noalias() = inv * (weighted * y);
  return inc;
}

}  // namespace roadgp
