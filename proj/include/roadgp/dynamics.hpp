#pragma once

#include <Eigen/Dense>

#include "roadgp/info_filter.hpp"

namespace roadgp {

enum class DynamicsMode { static_model, b2p, ui, spatiotemporal };

struct DynamicsConfig {
  DynamicsMode mode = DynamicsMode::static_model;
  double nu = 1.0;  // forgetting coefficient

  void validate() const;
  bool forgets() const { return mode == DynamicsMode::b2p || mode == DynamicsMode::ui; }
};

/// Discounts past information before a new batch is absorbed.
///
///   b2p: D <- nu D + (1 - nu) I / prior_var,  eta <- nu eta
///   ui:  D <- nu D,                           eta <- nu eta
///
/// Static and spatiotemporal modes return the state untouched.
InfoState apply_forgetting(InfoState state, const DynamicsConfig& cfg);
void apply_forgetting_inplace(InfoState& state, const DynamicsConfig& cfg);

/// [x, t]; time is appended unnormalized.
Eigen::VectorXd augment_time(const Eigen::Ref<const Eigen::VectorXd>& x, double t);
/// Row-wise augment_time.
Eigen::MatrixXd augment_time_rows(const Eigen::Ref<const Eigen::MatrixXd>& X, double t);

}  // namespace roadgp
