// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace pofcap {

struct LmSettings {
  int max_iterations = 50;
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double ftol = 1e-9;  // relative cost change
  double xtol = 1e-9;  // step norm
  double lambda_max = 1e12;
};

struct LmResult {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

// fn(x, r, J) fills residuals and, when J != nullptr, the dense Jacobian
// dr/dx. Cost is the plain squared norm of r.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J)>;

// Damped normal equations (JtJ + lambda*diag(JtJ)) step = -Jt r, steps
// accepted only when the cost strictly decreases. Throws SolverError on
// non-finite residuals at the start and when lambda escalates past
// lambda_max without producing an acceptable step.
LmResult solve_lm(const ResidualFn& fn, Eigen::VectorXd& x, const LmSettings& settings = {});

}  // namespace pofcap
