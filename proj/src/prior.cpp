// SPDX-License-Identifier: Apache-2.0
#include "pofcap/prior.hpp"

#include <Eigen/Cholesky>
#include <fstream>

#include "json.hpp"
#include "pofcap/common.hpp"
#include "pofcap/tensor_io.hpp"

namespace pofcap {

PosePrior fit_prior(const std::vector<Eigen::VectorXd>& samples, double eps) {
  if (samples.size() < 2) throw SolverError("fit_prior needs at least 2 samples");
  const int dim = static_cast<int>(samples[0].size());
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) {
    if (s.size() != dim) throw MismatchError("prior samples have inconsistent dimensions");
    mu += s;
  }
  mu /= static_cast<double>(samples.size());

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : samples) {
    const Eigen::VectorXd d = s - mu;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(samples.size() - 1);
  cov.diagonal().array() += eps;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw SolverError("prior covariance is not positive definite");
  // A = L^-1 so that |A(x-mu)|^2 = (x-mu)^T cov^-1 (x-mu).
  Eigen::MatrixXd a =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(dim, dim));
  return {std::move(a), std::move(mu)};
}

Eigen::VectorXd prior_residual(const Eigen::VectorXd& theta, const PosePrior& prior,
                               double weight) {
  if (theta.size() != prior.mu.size()) throw MismatchError("prior dimension mismatch");
  return std::sqrt(weight) * (prior.A * (theta - prior.mu));
}

void save_prior(const std::string& poft_path, const std::string& meta_path,
                const PosePrior& prior) {
  TensorF32 a({static_cast<std::uint32_t>(prior.A.rows()),
               static_cast<std::uint32_t>(prior.A.cols())});
  for (int r = 0; r < prior.A.rows(); ++r)
    for (int c = 0; c < prior.A.cols(); ++c)
      a.data[r * prior.A.cols() + c] = static_cast<float>(prior.A(r, c));
  TensorF32 mu({static_cast<std::uint32_t>(prior.mu.size())});
  for (int i = 0; i < prior.mu.size(); ++i) mu.data[i] = static_cast<float>(prior.mu[i]);
  write_poft_file(poft_path, {a, mu});

  nlohmann::json meta{{"schema_version", 1},
                      {"tensors", {"A", "mu"}},
                      {"dim", prior.mu.size()},
                      {"rows", prior.A.rows()}};
  std::ofstream os(meta_path);
  if (!os) throw FormatError("cannot open for writing: " + meta_path);
  os << meta.dump(2) << "\n";
}

PosePrior load_prior(const std::string& poft_path) {
  auto tensors = read_poft_file(poft_path);
  if (tensors.size() != 2 || tensors[0].dims.size() != 2 || tensors[1].dims.size() != 1)
    throw FormatError("bad prior container: expected A (2-d) and mu (1-d)");
  const auto& a = tensors[0];
  const auto& mu = tensors[1];
  if (a.dims[1] != mu.dims[0]) throw FormatError("bad prior container: A/mu dimension mismatch");
  PosePrior prior;
  prior.A.resize(a.dims[0], a.dims[1]);
  for (std::uint32_t r = 0; r < a.dims[0]; ++r)
    for (std::uint32_t c = 0; c < a.dims[1]; ++c) prior.A(r, c) = a.data[r * a.dims[1] + c];
  prior.mu.resize(mu.dims[0]);
  for (std::uint32_t i = 0; i < mu.dims[0]; ++i) prior.mu[i] = mu.data[i];
  return prior;
}

}  // namespace pofcap
