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

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ringrotor/dynamics.hpp"
#include "ringrotor/geometry.hpp"

namespace ringrotor::nmpc {

// ---------------------------------------------------------------------------
// Generic optimal-control problem machinery.  The solver below is written
// against this interface so the same code can be exercised on small linear
// models (where closed-form solutions exist) and on the full vehicle.
// ---------------------------------------------------------------------------

/// Discrete-time model over raw state vectors with (optionally) separate
/// tangent coordinates.  The defaults implement the plain vector-space case:
/// retract is addition, local_error is subtraction and the linearization is
/// computed with central finite differences.
class OcpModel {
 public:
  virtual ~OcpModel() = default;

  virtual int state_size() const = 0;
  virtual int tangent_size() const = 0;
  virtual int input_size() const = 0;

  /// One shooting interval of the discrete dynamics.
  virtual Eigen::VectorXd step(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) const = 0;

  virtual Eigen::VectorXd retract(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& d) const;
  virtual Eigen::VectorXd local_error(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& ref) const;

  /// Jacobians of d -> local_error(step(retract(x, d), u + du), anchor) at
  /// zero.  `anchor` fixes the chart the result row space lives in (the next
  /// shooting node during a solve).
  virtual void linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& anchor, Eigen::MatrixXd& A,
                         Eigen::MatrixXd& B) const;
};

struct OcpWeights {
  Eigen::VectorXd Q;   ///< running state weights (tangent-sized diagonal)
  Eigen::VectorXd R;   ///< input weights (diagonal)
  Eigen::VectorXd QN;  ///< terminal state weights (diagonal)
};

struct OcpReference {
  std::vector<Eigen::VectorXd> x;  ///< N+1 raw reference states
  std::vector<Eigen::VectorXd> u;  ///< N reference inputs
};

struct SqpSettings {
  int max_iterations = 5;
  double kkt_tolerance = 1e-8;
  Eigen::VectorXd u_lo;  ///< per-step input lower bound
  Eigen::VectorXd u_hi;  ///< per-step input upper bound
};

struct OcpSolution {
  std::vector<Eigen::VectorXd> u;  ///< N inputs
  std::vector<Eigen::VectorXd> x;  ///< N+1 shooting states
  int iterations = 0;              ///< quadratic subproblems solved
  double kkt_residual = 0.0;
  std::vector<double> kkt_history;  ///< residual before each iteration + final
};

/// Real-time-iteration style Gauss-Newton SQP with multiple shooting:
/// linearize along the shooting nodes, condense the band structure into a
/// dense box-constrained QP on the input corrections, solve it with an
/// active-set method and take the full step.  Warm starts reuse the previous
/// trajectory; a warm-started solve of an unchanged problem returns after
/// the initial KKT check.  Throws std::runtime_error (with iteration count
/// and residual in the message) if the iterate becomes non-finite.
OcpSolution solve_ocp(const OcpModel& model, const OcpWeights& weights,
                      const Eigen::VectorXd& x0, const OcpReference& ref,
                      const SqpSettings& settings,
                      const OcpSolution* warm_start = nullptr);

// ---------------------------------------------------------------------------
// Vehicle-facing interface.
// ---------------------------------------------------------------------------

/// Tracking weights and horizon for the thrust-level predictive controller.
struct NmpcConfig {
  int horizon = 20;    ///< shooting intervals
  double dt = 0.05;    ///< [s] per interval
  Eigen::Vector3d q_position{200.0, 200.0, 200.0};
  Eigen::Vector3d q_velocity{1.0, 1.0, 1.0};
  Eigen::Vector3d q_attitude{100.0, 100.0, 100.0};
  Eigen::Vector3d q_rates{1.0, 1.0, 1.0};
  Eigen::Vector4d r_input{1.0, 1.0, 1.0, 1.0};
  double terminal_weight_scale = 1.0;  ///< Q_N = scale * Q
  double u_min = 0.05;  ///< per-rotor thrust floor [N]
  double u_max = 6.5;   ///< per-rotor thrust ceiling [N]
  int max_iterations = 5;
  double kkt_tolerance = 1e-8;
  int integration_substeps = 1;  ///< RK4 steps per shooting interval

  Eigen::Matrix<double, 12, 1> state_weights() const;
};

/// Reference trajectory over one horizon: N+1 states, N inputs.
struct ReferenceWindow {
  std::vector<dynamics::State> states;
  std::vector<dynamics::Thrusts> thrusts;
};

struct NmpcSolution {
  std::vector<dynamics::Thrusts> inputs;
  std::vector<dynamics::State> states;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::vector<double> kkt_history;
  double solve_time = 0.0;  ///< [s] wall clock
  int active_bounds = 0;    ///< input components at a bound
};

/// Attitude error vector: the vector part of q^-1 * q_ref, sign-flipped so
/// the scalar part is non-negative (both covers of a rotation give the same
/// result).  Magnitude sin(angle/2) about the error axis.
Eigen::Vector3d quaternion_error(const Eigen::Quaterniond& q,
                                 const Eigen::Quaterniond& q_ref);

/// Tracking cost of a candidate trajectory:
///   sum_k ( |dx_k|_Q^2 + |du_k|_R^2 ) + |dx_N|_QN^2
/// with dx in the 12-dimensional error coordinates against the window.
double cost(const std::vector<dynamics::State>& states,
            const std::vector<dynamics::Thrusts>& inputs,
            const ReferenceWindow& ref, const NmpcConfig& config);

/// Discrete dynamics linearization in the error coordinates.
struct LinearizedStep {
  Eigen::Matrix<double, 12, 12> A;
  Eigen::Matrix<double, 12, 4> B;
  Eigen::Matrix<double, 12, 1> c;  ///< defect against the anchor state
};

/// Linearize one shooting interval around (x, u).  If `next` is provided it
/// anchors the result chart and the defect c = local_error(f(x,u), next);
/// otherwise the anchor is f(x, u) itself and c is zero.  Computed from the
/// closed-form integrator-stage Jacobians.
LinearizedStep linearize_dynamics(const dynamics::State& x,
                                  const dynamics::Thrusts& u,
                                  const geometry::VehicleProperties& props,
                                  const dynamics::ExternalWrench& wrench,
                                  double dt,
                                  const dynamics::State* next = nullptr,
                                  int substeps = 1);

/// Per-rotor thrusts balancing gravity with zero body torque:
/// the solution of H t = (m g, 0, 0, 0).
dynamics::Thrusts hover_thrusts(const geometry::VehicleProperties& props);

/// Solve one tracking problem from the current state.  `wrench` is the
/// disturbance model used for prediction (drag only, by default nothing).
/// The mass properties are frozen over the horizon.
NmpcSolution solve(const dynamics::State& x_now, const ReferenceWindow& ref,
                   const geometry::VehicleProperties& props,
                   const NmpcConfig& config,
                   const dynamics::ExternalWrench& wrench = {},
                   const NmpcSolution* warm_start = nullptr);

}  // namespace ringrotor::nmpc
