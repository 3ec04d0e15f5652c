// SPDX-License-Identifier: Apache-2.0
#include "pofcap/lm.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "pofcap/common.hpp"

namespace pofcap {

LmResult solve_lm(const ResidualFn& fn, Eigen::VectorXd& x, const LmSettings& s) {
  LmResult out;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  fn(x, r, &jac);
  if (!r.allFinite()) throw SolverError("non-finite residual at initial point");

  double cost = r.squaredNorm();
  out.initial_cost = cost;
  double lambda = s.lambda0;

  if (x.size() == 0 || r.size() == 0) {
    out.final_cost = cost;
    out.converged = true;
    out.stop_reason = "empty system";
    return out;
  }

  for (int iter = 0; iter < s.max_iterations; ++iter) {
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;
    // Damping floor keeps structurally unobserved parameters (zero columns)
    // pinned at their current value instead of producing a singular solve.
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    while (true) {
      Eigen::MatrixXd h = jtj;
      h.diagonal() += lambda * diag;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      Eigen::VectorXd step;
      bool solvable = ldlt.info() == Eigen::Success;
      if (solvable) {
        step = ldlt.solve(-g);
        solvable = step.allFinite();
      }
      if (solvable) {
        if (step.norm() < s.xtol) {
          out.final_cost = cost;
          out.iterations = iter;
          out.converged = true;
          out.stop_reason = "xtol";
          return out;
        }
        Eigen::VectorXd x_new = x + step;
        Eigen::VectorXd r_new;
        fn(x_new, r_new, nullptr);
        const double cost_new = r_new.allFinite() ? r_new.squaredNorm()
                                                  : std::numeric_limits<double>::infinity();
        if (cost_new < cost) {
          const double rel = (cost - cost_new) / std::max(cost, 1e-300);
          x = std::move(x_new);
          fn(x, r, &jac);
          cost = cost_new;
          lambda = std::max(lambda * s.lambda_down, 1e-12);
          accepted = true;
          if (rel < s.ftol) {
            out.final_cost = cost;
            out.iterations = iter + 1;
            out.converged = true;
            out.stop_reason = "ftol";
            return out;
          }
          break;
        }
      }
      lambda *= s.lambda_up;
      if (lambda > s.lambda_max)
        throw SolverError("levenberg-marquardt failed: damping exceeded " +
                          std::to_string(s.lambda_max));
    }
    (void)accepted;
    out.iterations = iter + 1;
  }

  out.final_cost = cost;
  out.converged = false;
  out.stop_reason = "max iterations";
  return out;
}

}  // namespace pofcap
