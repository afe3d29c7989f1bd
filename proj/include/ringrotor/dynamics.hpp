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

#include "ringrotor/geometry.hpp"

namespace ringrotor::dynamics {

inline constexpr double kGravity = 9.81;  // [m/s^2]

using Thrusts = Eigen::Vector4d;  ///< per-rotor thrusts [N]

/// Rigid-body state.  The quaternion rotates body vectors into the world
/// frame (Hamilton convention, scalar first); rates are the angular
/// velocity used by the kinematics qdot = 0.5 * (0, w) * q.
struct State {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();   ///< world [m]
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();   ///< world [m/s]
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d rates = Eigen::Vector3d::Zero();      ///< [rad/s]

  bool all_finite() const;
};

/// Constant external disturbance plus an optional linear drag force
/// -drag_coeff * velocity.  Torque is about the center of mass, body axes.
struct ExternalWrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   ///< world frame [N]
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  ///< body frame [N m]
  double drag_coeff = 0.0;                           ///< [N s/m]
};

/// One sample of a reference trajectory, everything a tracking controller
/// needs at a single instant.
struct ReferenceSample {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d rates = Eigen::Vector3d::Zero();

  /// The pose/twist part of the sample as a plain state.
  State to_state() const {
    State s;
    s.position = position;
    s.velocity = velocity;
    s.orientation = orientation;
    s.rates = rates;
    return s;
  }
};

/// Collective thrust (z body axis) and body torque produced by per-rotor
/// thrusts through the allocation matrix: (T, tau) = H * t.
Eigen::Vector4d wrench_from_thrusts(const geometry::VehicleProperties& props,
                                    const Thrusts& thrusts);

/// Steady-state rotor speed for one thrust: omega = sqrt(t / k_t) [rad/s].
/// Throws std::domain_error for negative thrust.
double rotor_speed(double thrust, double k_t);

/// Time derivative of the state under per-rotor thrusts and the external
/// wrench:
///   pdot = v
///   vdot = (T z_B + f_ext - drag_coeff v) / m + g
///   qdot = 0.5 (0, w) * q
///   wdot = J^-1 (tau + tau_ext - w x J w)
struct StateDerivative {
  Eigen::Vector3d position;
  Eigen::Vector3d velocity;
  Eigen::Vector4d orientation;  ///< quaternion derivative, (w, x, y, z)
  Eigen::Vector3d rates;
};

StateDerivative state_derivative(const State& x, const Thrusts& u,
                                 const geometry::VehicleProperties& props,
                                 const ExternalWrench& wrench = {});

/// One classic Runge-Kutta 4 step of length dt with the thrusts and mass
/// properties held constant, followed by quaternion renormalization.
/// Throws std::runtime_error if the result is not finite.
State step_rk4(const State& x, const Thrusts& u,
               const geometry::VehicleProperties& props,
               const ExternalWrench& wrench, double dt);

// --- raw-vector layout and error coordinates --------------------------------
//
// The solvers view the state as a 13-vector [p v q w] (quaternion scalar
// first) and work in 12-dimensional error coordinates [dp dv dq_vec dw],
// where the attitude block is the vector part of the relative quaternion.

inline constexpr int kStateSize = 13;
inline constexpr int kTangentSize = 12;
inline constexpr int kInputSize = 4;

Eigen::Matrix<double, kStateSize, 1> to_vector(const State& x);
State from_vector(const Eigen::Matrix<double, kStateSize, 1>& v);

/// Displace a state by a tangent step: positions/velocities/rates add,
/// the attitude becomes q * (sqrt(1 - |e|^2), e) for the attitude block e.
State retract(const State& x, const Eigen::Matrix<double, kTangentSize, 1>& d);

/// Tangent displacement of `x` relative to `ref` (inverse of retract to
/// first order).  The attitude block is the vector part of ref.q^-1 * x.q,
/// sign-flipped so the scalar part is non-negative.
Eigen::Matrix<double, kTangentSize, 1> local_error(const State& x,
                                                   const State& ref);

/// Jacobians of the RK4 step map in raw coordinates (13x13, 13x4),
/// including the renormalization, computed by differentiating the
/// integrator stages in closed form.
void step_rk4_jacobian_raw(const State& x, const Thrusts& u,
                           const geometry::VehicleProperties& props,
                           const ExternalWrench& wrench, double dt,
                           Eigen::Matrix<double, kStateSize, kStateSize>& A,
                           Eigen::Matrix<double, kStateSize, kInputSize>& B);

/// d(retract(x, d))/dd at d = 0, mapping tangent steps into raw coordinates.
Eigen::Matrix<double, kStateSize, kTangentSize> retract_jacobian(
    const State& x);

/// d(local_error(y, ref))/dy, mapping raw perturbations of y into the error
/// coordinates anchored at ref.  Exact for the linear blocks; the attitude
/// rows are the (constant) linear map of the relative-quaternion vector
/// part, including the canonical sign at the evaluation point y.
Eigen::Matrix<double, kTangentSize, kStateSize> local_error_jacobian(
    const State& y, const State& ref);

/// Heading of the body x axis (yaw of the ZYX Euler decomposition).
double yaw_angle(const Eigen::Quaterniond& q);

/// Attitude whose body z axis equals z_axis (unit vector, world frame) and
/// whose heading matches yaw.  Falls back to anchoring on the heading's y
/// axis when z_axis is (anti)parallel to the heading direction.
Eigen::Quaterniond attitude_from_thrust_axis(const Eigen::Vector3d& z_axis,
                                             double yaw);

}  // namespace ringrotor::dynamics
