/*
 Copyright 2026 The ringrotor Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ringrotor/qp.hpp"

#include <stdexcept>
#include <vector>

namespace ringrotor::qp {

namespace {

enum : int { kAtLower = -1, kFree = 0, kAtUpper = +1 };

double projected_gradient_norm(const BoxQp& qp, const Eigen::VectorXd& z) {
  const Eigen::VectorXd grad = qp.H * z + qp.g;
  const Eigen::VectorXd proj =
      (z - grad).cwiseMax(qp.lo).cwiseMin(qp.hi);
  return (z - proj).lpNorm<Eigen::Infinity>();
}

}  // namespace

BoxQpSolution solve_box_qp(const BoxQp& qp, const Eigen::VectorXd* warm_start,
                           int max_iterations) {
  const int n = static_cast<int>(qp.H.rows());
  if (qp.H.cols() != n || qp.g.size() != n || qp.lo.size() != n ||
      qp.hi.size() != n) {
    throw std::invalid_argument("qp: inconsistent problem dimensions");
  }
  if (((qp.hi - qp.lo).array() < 0.0).any()) {
    throw std::invalid_argument("qp: empty box (hi < lo)");
  }
  if (max_iterations <= 0) max_iterations = 6 * n + 20;

  // Feasible start: clamp the warm start (or zero) into the box and mark
  // components sitting exactly on a bound as active.
  Eigen::VectorXd z =
      warm_start != nullptr
          ? warm_start->cwiseMax(qp.lo).cwiseMin(qp.hi).eval()
          : Eigen::VectorXd::Zero(n).cwiseMax(qp.lo).cwiseMin(qp.hi).eval();
  std::vector<int> status(n, kFree);
  for (int i = 0; i < n; ++i) {
    if (z(i) <= qp.lo(i)) {
      status[i] = kAtLower;
      z(i) = qp.lo(i);
    } else if (z(i) >= qp.hi(i)) {
      status[i] = kAtUpper;
      z(i) = qp.hi(i);
    }
  }

  const double opt_tol =
      1e-10 * std::max(1.0, qp.g.lpNorm<Eigen::Infinity>());

  BoxQpSolution sol;
  std::vector<int> free_idx;
  free_idx.reserve(n);

  for (int iter = 0; iter < max_iterations; ++iter) {
    sol.iterations = iter;
    const Eigen::VectorXd grad = qp.H * z + qp.g;

    free_idx.clear();
    for (int i = 0; i < n; ++i) {
      if (status[i] == kFree) free_idx.push_back(i);
    }
    const int nf = static_cast<int>(free_idx.size());

    // Newton step on the free block, zero on the working set.
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (nf > 0) {
      Eigen::MatrixXd Hff(nf, nf);
      Eigen::VectorXd gf(nf);
      for (int a = 0; a < nf; ++a) {
        gf(a) = grad(free_idx[a]);
        for (int b = 0; b < nf; ++b) {
          Hff(a, b) = qp.H(free_idx[a], free_idx[b]);
        }
      }
      const Eigen::LLT<Eigen::MatrixXd> llt(Hff);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error(
            "qp: reduced Hessian is not positive definite");
      }
      const Eigen::VectorXd pf = llt.solve(-gf);
      for (int a = 0; a < nf; ++a) p(free_idx[a]) = pf(a);
    }

    if (p.lpNorm<Eigen::Infinity>() <= 1e-13 * std::max(1.0, z.norm())) {
      // Stationary on the current working set: check bound multipliers.
      // KKT asks grad >= 0 at lower bounds and grad <= 0 at upper bounds.
      int worst = -1;
      double worst_violation = opt_tol;
      for (int i = 0; i < n; ++i) {
        double violation = 0.0;
        if (status[i] == kAtLower) violation = -grad(i);
        if (status[i] == kAtUpper) violation = grad(i);
        if (violation > worst_violation) {
          worst_violation = violation;
          worst = i;
        }
      }
      if (worst < 0) {
        sol.converged = true;
        break;
      }
      status[worst] = kFree;  // release the most negative multiplier
      continue;
    }

    // Longest feasible step along p; a blocking bound joins the working set.
    double alpha = 1.0;
    int blocking = -1;
    int blocking_side = kFree;
    for (int i = 0; i < n; ++i) {
      if (p(i) > 0.0) {
        const double a = (qp.hi(i) - z(i)) / p(i);
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = kAtUpper;
        }
      } else if (p(i) < 0.0) {
        const double a = (qp.lo(i) - z(i)) / p(i);
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = kAtLower;
        }
      }
    }
    z += alpha * p;
    if (blocking >= 0) {
      status[blocking] = blocking_side;
      z(blocking) =
          blocking_side == kAtUpper ? qp.hi(blocking) : qp.lo(blocking);
    }
  }

  // Active components sit exactly on their bounds by construction.
  sol.active = Eigen::VectorXi::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (status[i] == kAtLower) z(i) = qp.lo(i);
    if (status[i] == kAtUpper) z(i) = qp.hi(i);
    sol.active(i) = status[i];
  }
  sol.z = z;
  sol.kkt_residual = projected_gradient_norm(qp, z);
  return sol;
}

}  // namespace ringrotor::qp
