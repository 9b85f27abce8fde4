#include "roadgp/metrics.hpp"

#include <cmath>

#include "roadgp/errors.hpp"

namespace roadgp {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw InvalidArgument("prediction and truth lengths differ");
  if (a == 0) throw InvalidArgument("metric needs at least one point");
}

}  // namespace

double rmse(const Eigen::Ref<const Eigen::VectorXd>& predicted,
            const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check_lengths(predicted.size(), truth.size());
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(truth.size()));
}

double npll(const std::vector<Prediction>& predictions, const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check_lengths(static_cast<Eigen::Index>(predictions.size()), truth.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const auto& p = predictions[static_cast<std::size_t>(i)];
    total -= gaussian_log_density(truth[i], p.mean, p.variance);
  }
  return total / static_cast<double>(truth.size());
}

double npll(const std::vector<MixturePrediction>& predictions,
            const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check_lengths(static_cast<Eigen::Index>(predictions.size()), truth.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    total -= predictions[static_cast<std::size_t>(i)].log_density(truth[i]);
  }
  return total / static_cast<double>(truth.size());
}

Eigen::MatrixXd psd_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& sigma) {
  if (sigma.rows() != sigma.cols()) throw InvalidArgument("covariance must be square");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed", 0.0);
  const double tol = 1e-10 * std::abs(sigma.trace());
  Eigen::VectorXd roots(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double lambda = eig.eigenvalues()[i];
    if (lambda < -tol) {
      throw InvalidArgument("covariance is indefinite (eigenvalue " + std::to_string(lambda) + ")");
    }
    roots[i] = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
  }
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double wasserstein2_gaussians(const Eigen::Ref<const Eigen::VectorXd>& mu1,
                              const Eigen::Ref<const Eigen::MatrixXd>& sigma1,
                              const Eigen::Ref<const Eigen::VectorXd>& mu2,
                              const Eigen::Ref<const Eigen::MatrixXd>& sigma2) {
  const auto n = mu1.size();
  if (mu2.size() != n || sigma1.rows() != n || sigma2.rows() != n) {
    throw InvalidArgument("Gaussian dimensions differ");
  }
  const Eigen::MatrixXd root1 = psd_sqrt(sigma1);
  const Eigen::MatrixXd root2 = psd_sqrt(sigma2);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(root2 * root1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
  const double cov_term = (root1 - root2 * rotation).squaredNorm();
  return std::sqrt((mu1 - mu2).squaredNorm() + cov_term);
}

}  // namespace roadgp
