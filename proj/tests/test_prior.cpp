// SPDX-License-Identifier: Apache-2.0
#include <Eigen/QR>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pofcap/common.hpp"
#include "pofcap/prior.hpp"
#include "pofcap/rng.hpp"

using namespace pofcap;

TEST_CASE("identical samples give zero residual at the mean") {
  Eigen::VectorXd theta0(3);
  theta0 << 0.2, -0.5, 1.0;
  const PosePrior prior = fit_prior({theta0, theta0, theta0}, 1e-3);
  CHECK((prior.mu - theta0).norm() < 1e-12);
  CHECK(prior_residual(theta0, prior, 200.0).norm() < 1e-12);
}

TEST_CASE("exact unit sample covariance recovers A close to identity") {
  // Four points at (+-a, +-a) with a chosen so the n-1 covariance is exactly I.
  const double a = std::sqrt(3.0) / 2.0;
  std::vector<Eigen::VectorXd> samples;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      Eigen::VectorXd v(2);
      v << sx * a, sy * a;
      samples.push_back(v);
    }
  // Sample-covariance oracle.
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& s : samples) cov += s * s.transpose();
  cov /= 3.0;
  CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  const PosePrior prior = fit_prior(samples, 1e-12);
  CHECK((prior.A - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-6);
}

TEST_CASE("fit_prior rejects fewer than two samples") {
  Eigen::VectorXd v(2);
  v << 1, 2;
  CHECK_THROWS_AS(fit_prior({v}, 1e-3), SolverError);
  CHECK_THROWS_AS(fit_prior({}, 1e-3), SolverError);
}

TEST_CASE("prior residual examples") {
  PosePrior prior;
  prior.A = Eigen::MatrixXd::Identity(3, 3);
  prior.mu = Eigen::VectorXd::Zero(3);

  SUBCASE("zero at the mean") { CHECK(prior_residual(prior.mu, prior, 123.0).norm() == 0.0); }
  SUBCASE("unit deviation with w=200 has squared norm 200") {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
    theta[0] = 1.0;
    CHECK(prior_residual(theta, prior, 200.0).squaredNorm() == doctest::Approx(200.0));
  }
  SUBCASE("scaling A by 2 quadruples the squared norm") {
    Eigen::VectorXd theta(3);
    theta << 0.3, -0.7, 0.1;
    const double base = prior_residual(theta, prior, 5.0).squaredNorm();
    PosePrior doubled = prior;
    doubled.A *= 2.0;
    CHECK(prior_residual(theta, doubled, 5.0).squaredNorm() == doctest::Approx(4.0 * base));
  }
}

TEST_CASE("squared norm invariant under orthogonal row reparameterization") {
  CounterRng rng(31);
  const int d = 5;
  std::vector<Eigen::VectorXd> samples;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd v(d);
    for (int k = 0; k < d; ++k) v[k] = rng.normal();
    samples.push_back(v);
  }
  const PosePrior prior = fit_prior(samples, 1e-3);

  Eigen::MatrixXd g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();

  PosePrior rotated = prior;
  rotated.A = q * prior.A;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd theta(d);
    for (int k = 0; k < d; ++k) theta[k] = rng.normal();
    CHECK(prior_residual(theta, prior, 7.0).squaredNorm() ==
          doctest::Approx(prior_residual(theta, rotated, 7.0).squaredNorm()).epsilon(1e-9));
  }
  // Mahalanobis distance of the fitted mean is zero.
  CHECK(prior_residual(prior.mu, prior, 1.0).norm() < 1e-12);
}

TEST_CASE("prior container round trip") {
  CounterRng rng(37);
  std::vector<Eigen::VectorXd> samples;
  for (int i = 0; i < 30; ++i) {
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k) v[k] = 0.25 * rng.normal();
    samples.push_back(v);
  }
  const PosePrior prior = fit_prior(samples, 1e-3);

  const auto dir = std::filesystem::temp_directory_path() / "pofcap_prior_test";
  std::filesystem::create_directories(dir);
  const auto poft = (dir / "prior.poft").string();
  const auto meta = (dir / "prior.json").string();
  save_prior(poft, meta, prior);
  const PosePrior back = load_prior(poft);
  CHECK(back.dim() == prior.dim());
  CHECK((back.A - prior.A).norm() < 1e-5 * prior.A.norm());  // float32 storage
  CHECK((back.mu - prior.mu).norm() < 1e-6);
  std::filesystem::remove_all(dir);
}
