#pragma once

#include <vector>

#include <Eigen/Dense>

#include "roadgp/ensemble.hpp"

namespace roadgp {

/// Root mean squared error. Throws on empty or mismatched input.
double rmse(const Eigen::Ref<const Eigen::VectorXd>& predicted,
            const Eigen::Ref<const Eigen::VectorXd>& truth);

/// Mean negative log predictive density under Gaussian predictions.
double npll(const std::vector<Prediction>& predictions, const Eigen::Ref<const Eigen::VectorXd>& truth);
/// Mean negative log density under exact mixture predictions.
double npll(const std::vector<MixturePrediction>& predictions,
            const Eigen::Ref<const Eigen::VectorXd>& truth);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues down to
/// -1e-10 * trace are clipped to zero; anything more negative throws.
Eigen::MatrixXd psd_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& sigma);

/// 2-Wasserstein distance between N(mu1, Sigma1) and N(mu2, Sigma2).
///
/// The covariance term tr(S1 + S2 - 2 (S2^1/2 S1 S2^1/2)^1/2) equals
/// min_U |S1^1/2 - S2^1/2 U|_F^2 over orthogonal U, attained at the polar
/// factor of S2^1/2 S1^1/2. Evaluating that Frobenius norm directly avoids
/// the cancellation of the trace form when the covariances nearly agree.
double wasserstein2_gaussians(const Eigen::Ref<const Eigen::VectorXd>& mu1,
                              const Eigen::Ref<const Eigen::MatrixXd>& sigma1,
                              const Eigen::Ref<const Eigen::VectorXd>& mu2,
                              const Eigen::Ref<const Eigen::MatrixXd>& sigma2);

}  // namespace roadgp
