#include "roadgp/info_filter.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>

#include "roadgp/errors.hpp"

namespace roadgp {

namespace {

void check_dims(const InfoState& state, const Increment& inc) {
  if (inc.P.rows() != state.dim() || inc.P.cols() != state.dim() || inc.s.size() != state.dim()) {
    std::ostringstream msg;
    msg << "increment of dimension " << inc.s.size() << " does not match state dimension "
        << state.dim();
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

Increment Increment::zero(Eigen::Index dim) {
  return {Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim)};
}

InfoState prior_state(const KernelSpec& spec, Eigen::Index num_features) {
  spec.validate();
  if (num_features < 1) throw InvalidArgument("number of features must be >= 1");
  const Eigen::Index dim = 2 * num_features;
  InfoState state;
  state.D = Eigen::MatrixXd::Identity(dim, dim) / spec.prior_variance;
  state.eta = Eigen::VectorXd::Zero(dim);
  state.obs_variance = spec.obs_variance;
  state.prior_variance = spec.prior_variance;
  return state;
}

Increment compute_increment(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                            const Eigen::Ref<const Eigen::VectorXd>& y, double obs_variance) {
  if (Phi.cols() != y.size()) {
    throw InvalidArgument("compute_increment: " + std::to_string(Phi.cols()) +
                          " feature columns but " + std::to_string(y.size()) + " targets");
  }
  if (!(obs_variance > 0.0)) throw InvalidArgument("observation variance must be positive");
  const double inv = 1.0 / obs_variance;
  Increment inc;
  inc.P.noalias() = inv * (Phi * Phi.transpose());
  inc.s.noalias() = inv * (Phi * y);
  return inc;
}

void apply_increment_inplace(InfoState& state, const Increment& inc) {
  check_dims(state, inc);
  state.D += inc.P;
  state.eta += inc.s;
}

InfoState apply_increment(InfoState state, const Increment& inc) {
  apply_increment_inplace(state, inc);
  return state;
}

void symmetrize(Eigen::MatrixXd& D) {
  const Eigen::MatrixXd t = D.transpose();
  D = 0.5 * (D + t);
}

Posterior::Posterior(const InfoState& state) : obs_variance_(state.obs_variance) {
  if (state.D.rows() != state.dim() || state.D.cols() != state.dim()) {
    throw InvalidArgument("precision matrix and information vector dimensions differ");
  }
  llt_.compute(state.D);
  if (llt_.info() != Eigen::Success) {
    const double jitter = 1e-10 * state.D.trace() / static_cast<double>(state.dim());
    Eigen::MatrixXd raised = state.D;
    raised.diagonal().array() += jitter;
    llt_.compute(raised);
    jittered_ = true;
    if (llt_.info() != Eigen::Success) {
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(raised);
      const double pivot = ldlt.vectorD().minCoeff();
      std::ostringstream msg;
      msg << "precision matrix is not positive definite (smallest pivot " << pivot << ")";
      throw NumericalError(msg.str(), pivot);
    }
  }
  mean_ = llt_.solve(state.eta);
}

Eigen::MatrixXd Posterior::covariance() const {
  const Eigen::Index n = mean_.size();
  Eigen::MatrixXd sigma = llt_.solve(Eigen::MatrixXd::Identity(n, n));
  symmetrize(sigma);
  return sigma;
}

Prediction Posterior::predict(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  if (phi.size() != mean_.size()) throw InvalidArgument("feature vector dimension mismatch");
  const Eigen::VectorXd half = llt_.matrixL().solve(phi);
  return {phi.dot(mean_), half.squaredNorm() + obs_variance_};
}

std::vector<Prediction> Posterior::predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const {
  if (Phi.rows() != mean_.size()) throw InvalidArgument("feature matrix dimension mismatch");
  const Eigen::MatrixXd half = llt_.matrixL().solve(Phi);
  const Eigen::VectorXd means = Phi.transpose() * mean_;
  std::vector<Prediction> out(static_cast<std::size_t>(Phi.cols()));
  for (Eigen::Index i = 0; i < Phi.cols(); ++i) {
    out[static_cast<std::size_t>(i)] = {means[i], half.col(i).squaredNorm() + obs_variance_};
  }
  return out;
}

Moments posterior_moments(const InfoState& state) {
  const Posterior post(state);
  Moments m;
  m.covariance = post.covariance();
  m.mean = post.mean();
  return m;
}

Prediction predict(const InfoState& state, const FeatureMap& fm,
                   const Eigen::Ref<const Eigen::VectorXd>& x_star) {
  if (fm.feature_dim() != state.dim()) {
    throw InvalidArgument("feature map and state dimensions differ");
  }
  return Posterior(state).predict(feature_map(fm, x_star));
}

void write_state(std::ostream& out, const InfoState& state) {
  const auto dim = static_cast<std::uint32_t>(state.dim());
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(&state.obs_variance), sizeof(double));
  out.write(reinterpret_cast<const char*>(&state.prior_variance), sizeof(double));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = state.D;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(sizeof(double) * rows.size()));
  out.write(reinterpret_cast<const char*>(state.eta.data()),
            static_cast<std::streamsize>(sizeof(double) * state.eta.size()));
}

InfoState read_state(std::istream& in) {
  std::uint32_t dim = 0;
  InfoState state;
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  in.read(reinterpret_cast<char*>(&state.obs_variance), sizeof(double));
  in.read(reinterpret_cast<char*>(&state.prior_variance), sizeof(double));
  if (!in) throw InvalidArgument("truncated state record header");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(dim, dim);
  state.eta.resize(dim);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(sizeof(double) * rows.size()));
  in.read(reinterpret_cast<char*>(state.eta.data()),
          static_cast<std::streamsize>(sizeof(double) * dim));
  if (!in) throw InvalidArgument("truncated state record body");
  state.D = rows;
  return state;
}

}  // namespace roadgp
