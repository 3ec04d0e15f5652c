// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pofcap {

// Gaussian pose prior: residual A(theta - mu), so the squared norm is the
// Mahalanobis distance under the sample covariance.
struct PosePrior {
  Eigen::MatrixXd A;   // whitening transform, rows x dim
  Eigen::VectorXd mu;  // rad

  int dim() const { return static_cast<int>(mu.size()); }
};

// mu = sample mean, A = inverse lower-Cholesky factor of (cov + eps*I).
// Throws SolverError with fewer than 2 samples.
PosePrior fit_prior(const std::vector<Eigen::VectorXd>& samples, double eps = 1e-3);

Eigen::VectorXd prior_residual(const Eigen::VectorXd& theta, const PosePrior& prior,
                               double weight);

// Two POFT records (A, mu) next to a small JSON metadata file.
void save_prior(const std::string& poft_path, const std::string& meta_path,
                const PosePrior& prior);
PosePrior load_prior(const std::string& poft_path);

}  // namespace pofcap
