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

/// Classical tracking controllers used as comparison points for the
/// predictive controller: a geometric PID cascade and a wrench-space LQR
/// re-linearized along the reference.  Both command per-rotor thrusts
/// through the same allocation matrix the simulator uses.

#pragma once

#include <Eigen/Dense>

#include "ringrotor/dynamics.hpp"
#include "ringrotor/geometry.hpp"

namespace ringrotor::baselines {

/// Gains of the position/attitude cascade.  Defaults give a deliberately
/// soft attitude loop; they are the stock tuning used by the benchmark.
struct PidGains {
  Eigen::Vector3d kp = Eigen::Vector3d::Constant(2.0);      ///< position
  Eigen::Vector3d kv = Eigen::Vector3d::Constant(2.2);      ///< velocity
  Eigen::Vector3d kr = Eigen::Vector3d::Constant(0.25);     ///< attitude
  Eigen::Vector3d komega = Eigen::Vector3d::Constant(0.23); ///< body rates
  double u_min = 0.05;  ///< per-rotor thrust floor [N]
  double u_max = 6.5;   ///< per-rotor thrust ceiling [N]
};

/// One tick of the cascade: outer loop turns position/velocity error into a
/// desired acceleration, the inner loop turns the implied attitude error
/// into body torque, and the allocation matrix maps the wrench to clamped
/// per-rotor thrusts.
dynamics::Thrusts pid_control(const dynamics::State& x,
                              const dynamics::ReferenceSample& ref,
                              const geometry::VehicleProperties& props,
                              const PidGains& gains = {});

/// LQR settings.  The regulator acts on the 12-dim error state and a
/// 4-dim wrench input (collective thrust + body torques); per-rotor
/// thrusts are recovered through the allocation matrix.
struct LqrConfig {
  Eigen::Matrix<double, 12, 1> q_state =
      Eigen::Matrix<double, 12, 1>::Constant(10.0);
  Eigen::Vector4d r_wrench = Eigen::Vector4d::Ones();
  double dt = 0.01;             ///< discretization step of the regulator [s]
  double u_min = 0.05;          ///< per-rotor thrust floor [N]
  double u_max = 6.5;           ///< per-rotor thrust ceiling [N]
  int max_riccati_iterations = 20000;
  double riccati_tolerance = 1e-11;  ///< fixed-point stop on |P - f(P)|_inf
};

/// Infinite-horizon discrete regulator about the current reference sample.
/// Each call re-linearizes the discrete dynamics at the sample, re-solves
/// the Riccati fixed point (warm-started from the previous call) and
/// returns clamped per-rotor thrusts.
class LqrController {
 public:
  explicit LqrController(const LqrConfig& config = {});

  dynamics::Thrusts control(const dynamics::State& x,
                            const dynamics::ReferenceSample& ref,
                            const geometry::VehicleProperties& props);

  /// Riccati solution accepted by the last control() call.
  const Eigen::Matrix<double, 12, 12>& riccati_solution() const {
    return P_;
  }
  /// Fixed-point defect |P - f(P)|_inf of the accepted solution.
  double riccati_residual() const { return residual_; }
  /// Fixed-point sweeps used by the last control() call.
  int riccati_iterations() const { return iterations_; }

  const LqrConfig& config() const { return config_; }

 private:
  LqrConfig config_;
  Eigen::Matrix<double, 12, 12> P_;
  bool warm_ = false;
  double residual_ = 0.0;
  int iterations_ = 0;
};

/// Wrench that holds the reference sample: collective thrust matching the
/// commanded acceleration along the reference body z axis, torque matching
/// the gyroscopic term at the reference rates.
Eigen::Vector4d equilibrium_wrench(const dynamics::ReferenceSample& ref,
                                   const geometry::VehicleProperties& props);

}  // namespace ringrotor::baselines
