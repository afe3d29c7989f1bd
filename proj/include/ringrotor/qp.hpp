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

#pragma once

#include <Eigen/Dense>

namespace ringrotor::qp {

/// Dense strictly convex box-constrained quadratic program
///   minimize   0.5 z' H z + g' z
///   subject to lo <= z <= hi   (componentwise)
/// with H symmetric positive definite.
struct BoxQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct BoxQpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXi active;      ///< per component: -1 lower, 0 free, +1 upper
  int iterations = 0;          ///< working-set changes performed
  bool converged = false;
  double kkt_residual = 0.0;   ///< max norm of the projected gradient
};

/// Primal active-set solve.  Starts from the clamped warm start (zeros if
/// none), walks the working set of bounds until the KKT conditions hold.
/// Components fixed at a bound are returned exactly at the bound value.
/// Throws std::invalid_argument on inconsistent dimensions or an empty box,
/// std::runtime_error if the reduced Hessian factorization fails.
BoxQpSolution solve_box_qp(const BoxQp& qp,
                           const Eigen::VectorXd* warm_start = nullptr,
                           int max_iterations = 0);

}  // namespace ringrotor::qp
