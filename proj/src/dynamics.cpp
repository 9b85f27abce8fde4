#include "roadgp/dynamics.hpp"

#include "roadgp/errors.hpp"

namespace roadgp {

namespace {
constexpr double kMinUiNu = 1e-6;
}

void DynamicsConfig::validate() const {
  if (!forgets()) return;
  if (!(nu >= 0.0 && nu <= 1.0)) throw InvalidArgument("forgetting coefficient must lie in [0, 1]");
  if (mode == DynamicsMode::ui && nu < kMinUiNu) {
    throw InvalidArgument("uncertainty injection needs nu >= 1e-6");
  }
}

void apply_forgetting_inplace(InfoState& state, const DynamicsConfig& cfg) {
  cfg.validate();
  if (!cfg.forgets() || cfg.nu == 1.0) return;
  state.D *= cfg.nu;
  state.eta *= cfg.nu;
  if (cfg.mode == DynamicsMode::b2p) {
    state.D.diagonal().array() += (1.0 - cfg.nu) / state.prior_variance;
  }
  symmetrize(state.D);
}

InfoState apply_forgetting(InfoState state, const DynamicsConfig& cfg) {
  apply_forgetting_inplace(state, cfg);
  return state;
}

Eigen::VectorXd augment_time(const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x;
  out[x.size()] = t;
  return out;
}

Eigen::MatrixXd augment_time_rows(const Eigen::Ref<const Eigen::MatrixXd>& X, double t) {
  Eigen::MatrixXd out(X.rows(), X.cols() + 1);
  out.leftCols(X.cols()) = X;
  out.col(X.cols()).setConstant(t);
  return out;
}

}  // namespace roadgp
