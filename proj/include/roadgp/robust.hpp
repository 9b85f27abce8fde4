#pragma once

#include <Eigen/Dense>

#include "roadgp/features.hpp"
#include "roadgp/info_filter.hpp"

namespace roadgp {

enum class RobustKind { none, huber, hampel };

struct RobustConfig {
  RobustKind kind = RobustKind::none;
  double delta = 1.345;
  double a = 2.0;
  double b = 4.0;
  double c = 8.0;

  void validate() const;
  /// Weight of one standardized residual under this configuration.
  double weight(double e) const;
};

/// 1 for |e| <= delta, delta / |e| otherwise.
double huber_weight(double e, double delta);

/// Redescending Hampel weight, continuous at a, b and c:
///   1                          |e| <= a
///   a / |e|                    a < |e| <= b
///   a (c - |e|) / (|e| (c - b))  b < |e| <= c
///   0                          |e| > c
double hampel_weight(double e, double a, double b, double c);

/// (y_i - mean_i) / sqrt(var_i) under the current (pre-update) state.
/// X holds one input per row.
Eigen::VectorXd standardized_residuals(const InfoState& state, const FeatureMap& fm,
                                       const Eigen::Ref<const Eigen::MatrixXd>& X,
                                       const Eigen::Ref<const Eigen::VectorXd>& y);

/// P = Phi W Phi' / obs_var, s = Phi W y / obs_var with W = diag(weights).
Increment robust_increment(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const Eigen::Ref<const Eigen::VectorXd>& weights, double obs_variance);

}  // namespace roadgp
