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

#include "ringrotor/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "ringrotor/nmpc.hpp"

namespace ringrotor::baselines {

namespace {

/// Per-rotor thrusts for a commanded wrench, clamped to the box.
dynamics::Thrusts allocate(const Eigen::Vector4d& wrench,
                           const geometry::VehicleProperties& props,
                           double u_min, double u_max) {
  const Eigen::Vector4d t = props.allocation.fullPivLu().solve(wrench);
  return t.cwiseMax(u_min).cwiseMin(u_max);
}

}  // namespace

Eigen::Vector4d equilibrium_wrench(const dynamics::ReferenceSample& ref,
                                   const geometry::VehicleProperties& props) {
  const Eigen::Vector3d f_des =
      props.mass * (ref.acceleration +
                    Eigen::Vector3d(0.0, 0.0, dynamics::kGravity));
  const Eigen::Vector3d z_ref =
      ref.orientation.toRotationMatrix().col(2);
  const Eigen::Vector3d gyro =
      ref.rates.cross(props.inertia * ref.rates);
  Eigen::Vector4d w;
  w << f_des.dot(z_ref), gyro;
  return w;
}

dynamics::Thrusts pid_control(const dynamics::State& x,
                              const dynamics::ReferenceSample& ref,
                              const geometry::VehicleProperties& props,
                              const PidGains& gains) {
  if (!x.all_finite()) {
    throw std::invalid_argument("pid: state is not finite");
  }

  // Outer loop: desired world-frame force from position/velocity feedback
  // plus the feedforward acceleration.
  const Eigen::Vector3d e_p = ref.position - x.position;
  const Eigen::Vector3d e_v = ref.velocity - x.velocity;
  const Eigen::Vector3d a_des = gains.kp.cwiseProduct(e_p) +
                                gains.kv.cwiseProduct(e_v) +
                                ref.acceleration;
  const Eigen::Vector3d f_des =
      props.mass *
      (a_des + Eigen::Vector3d(0.0, 0.0, dynamics::kGravity));

  // Collective thrust is the projection of the desired force on the
  // current body z axis.
  const Eigen::Vector3d z_b = x.orientation.toRotationMatrix().col(2);
  const double thrust = f_des.dot(z_b);

  // Inner loop: attitude that points body z along the desired force while
  // holding the reference yaw, tracked with a PD law plus the gyroscopic
  // feedforward.
  const double f_norm = f_des.norm();
  const Eigen::Vector3d z_des =
      (f_norm > 1e-9) ? (f_des / f_norm).eval() : z_b;
  const Eigen::Quaterniond q_des = dynamics::attitude_from_thrust_axis(
      z_des, dynamics::yaw_angle(ref.orientation));

  const Eigen::Vector3d e_r = nmpc::quaternion_error(q_des, x.orientation);
  const Eigen::Vector3d e_w = x.rates - ref.rates;
  const Eigen::Vector3d torque =
      props.inertia * (-gains.kr.cwiseProduct(e_r) -
                       gains.komega.cwiseProduct(e_w)) +
      x.rates.cross(props.inertia * x.rates);

  Eigen::Vector4d wrench;
  wrench << thrust, torque;
  return allocate(wrench, props, gains.u_min, gains.u_max);
}

LqrController::LqrController(const LqrConfig& config) : config_(config) {
  if (!(config_.dt > 0.0) || !(config_.u_min < config_.u_max) ||
      config_.q_state.minCoeff() < 0.0 || config_.r_wrench.minCoeff() <= 0.0) {
    throw std::invalid_argument("lqr: invalid configuration");
  }
  P_ = config_.q_state.asDiagonal();
}

dynamics::Thrusts LqrController::control(
    const dynamics::State& x, const dynamics::ReferenceSample& ref,
    const geometry::VehicleProperties& props) {
  if (!x.all_finite()) {
    throw std::invalid_argument("lqr: state is not finite");
  }

  using Mat12 = Eigen::Matrix<double, 12, 12>;
  using Mat12x4 = Eigen::Matrix<double, 12, 4>;

  // Linearize the discrete step about the reference sample, with the wrench
  // (not per-rotor thrusts) as the input so the weights live in a
  // layout-independent space.
  const dynamics::State x_ref = ref.to_state();
  const Eigen::Vector4d w_eq = equilibrium_wrench(ref, props);
  const Eigen::FullPivLU<Eigen::Matrix4d> alloc_lu(props.allocation);
  if (!alloc_lu.isInvertible()) {
    throw std::runtime_error("lqr: allocation matrix is singular");
  }
  const Eigen::Vector4d t_eq = alloc_lu.solve(w_eq);
  const nmpc::LinearizedStep lin = nmpc::linearize_dynamics(
      x_ref, t_eq, props, dynamics::ExternalWrench{}, config_.dt);
  const Mat12& A = lin.A;
  const Mat12x4 B = lin.B * alloc_lu.inverse();

  // Riccati fixed point P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA by value
  // iteration, warm-started from the previous call.
  const Mat12 Q = config_.q_state.asDiagonal();
  const Eigen::Matrix4d R = config_.r_wrench.asDiagonal();
  if (!warm_) P_ = Q;
  const auto dare_rhs = [&](const Mat12& P) -> Mat12 {
    const Eigen::Matrix4d S = R + B.transpose() * P * B;
    const Mat12x4 APB = A.transpose() * P * B;
    const Mat12 next =
        Q + A.transpose() * P * A - APB * S.ldlt().solve(APB.transpose());
    return 0.5 * (next + next.transpose());  // keep symmetry exact
  };

  bool converged = false;
  iterations_ = 0;
  for (int i = 0; i < config_.max_riccati_iterations; ++i) {
    const Mat12 next = dare_rhs(P_);
    const double step = (next - P_).lpNorm<Eigen::Infinity>();
    P_ = next;
    ++iterations_;
    if (step <= config_.riccati_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged || !P_.allFinite()) {
    throw std::runtime_error("lqr: Riccati iteration did not converge");
  }
  residual_ = (dare_rhs(P_) - P_).lpNorm<Eigen::Infinity>();
  warm_ = true;

  const Eigen::Matrix4d S = R + B.transpose() * P_ * B;
  const Eigen::Matrix<double, 4, 12> K =
      S.ldlt().solve(B.transpose() * P_ * A);

  const Eigen::Matrix<double, 12, 1> e = dynamics::local_error(x, x_ref);
  const Eigen::Vector4d wrench = w_eq - K * e;
  return allocate(wrench, props, config_.u_min, config_.u_max);
}

}  // namespace ringrotor::baselines
