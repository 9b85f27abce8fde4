#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "roadgp/features.hpp"

namespace roadgp {

/// Information-form Gaussian posterior over the 2J feature weights.
struct InfoState {
  Eigen::MatrixXd D;    // precision
  Eigen::VectorXd eta;  // information vector, D * mean
  double obs_variance = 1.0;
  double prior_variance = 1.0;

  Eigen::Index dim() const { return eta.size(); }
};

/// One batch's additive contribution to (D, eta).
struct Increment {
  Eigen::MatrixXd P;
  Eigen::VectorXd s;

  static Increment zero(Eigen::Index dim);
  Eigen::Index dim() const { return s.size(); }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // includes observation noise
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

InfoState prior_state(const KernelSpec& spec, Eigen::Index num_features);

/// P = Phi Phi' / obs_var, s = Phi y / obs_var. Phi is 2J x N.
Increment compute_increment(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                            const Eigen::Ref<const Eigen::VectorXd>& y, double obs_variance);

InfoState apply_increment(InfoState state, const Increment& inc);
/// In-place variant; same arithmetic as apply_increment.
void apply_increment_inplace(InfoState& state, const Increment& inc);

/// D <- (D + D') / 2.
void symmetrize(Eigen::MatrixXd& D);

/// Cholesky factorization of D with a single jitter retry.
///
/// On a first failure the diagonal is raised by 1e-10 * trace(D) / dim and
/// the factorization retried; a second failure throws NumericalError
/// carrying the smallest LDL' pivot.
class Posterior {
 public:
  explicit Posterior(const InfoState& state);

  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::MatrixXd covariance() const;
  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& phi) const;
  /// Predictions for every column of a 2J x N feature matrix.
  std::vector<Prediction> predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const;
  bool jittered() const { return jittered_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd mean_;
  double obs_variance_;
  bool jittered_ = false;
};

/// Sigma = D^-1 (symmetrized), mu = Sigma eta.
Moments posterior_moments(const InfoState& state);

Prediction predict(const InfoState& state, const FeatureMap& fm,
                   const Eigen::Ref<const Eigen::VectorXd>& x_star);

// Snapshot record layout (little-endian, native doubles):
//   u32 dim | f64 obs_variance | f64 prior_variance | f64[dim*dim] D row-major | f64[dim] eta
void write_state(std::ostream& out, const InfoState& state);
InfoState read_state(std::istream& in);

}  // namespace roadgp
