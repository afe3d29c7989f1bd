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

#include "ringrotor/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace ringrotor::dynamics {

namespace {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using StateVec = Eigen::Matrix<double, kStateSize, 1>;
using StateMat = Eigen::Matrix<double, kStateSize, kStateSize>;
using InputMat = Eigen::Matrix<double, kStateSize, kInputSize>;

Vec4 quat_coeffs(const Eigen::Quaterniond& q) {
  return {q.w(), q.x(), q.y(), q.z()};
}

/// Left-multiplication matrix: (a * b) = L(a) * coeffs(b), scalar first.
Mat4 quat_left(const Vec4& a) {
  Mat4 L;
  L << a(0), -a(1), -a(2), -a(3),
       a(1),  a(0), -a(3),  a(2),
       a(2),  a(3),  a(0), -a(1),
       a(3), -a(2),  a(1),  a(0);
  return L;
}

/// Right-multiplication matrix: (a * b) = R(b) * coeffs(a), scalar first.
Mat4 quat_right(const Vec4& b) {
  Mat4 R;
  R << b(0), -b(1), -b(2), -b(3),
       b(1),  b(0),  b(3), -b(2),
       b(2), -b(3),  b(0),  b(1),
       b(3),  b(2), -b(1),  b(0);
  return R;
}

/// Body z axis in world coordinates as a polynomial in the (possibly not
/// yet renormalized) quaternion coefficients; this is the exact expression
/// the derivative below differentiates.
Vec3 body_z(const Vec4& q) {
  return {2.0 * (q(1) * q(3) + q(0) * q(2)),
          2.0 * (q(2) * q(3) - q(0) * q(1)),
          q(0) * q(0) - q(1) * q(1) - q(2) * q(2) + q(3) * q(3)};
}

Eigen::Matrix<double, 3, 4> body_z_jacobian(const Vec4& q) {
  Eigen::Matrix<double, 3, 4> D;
  D << 2.0 * q(2), 2.0 * q(3), 2.0 * q(0), 2.0 * q(1),
      -2.0 * q(1), -2.0 * q(0), 2.0 * q(3), 2.0 * q(2),
       2.0 * q(0), -2.0 * q(1), -2.0 * q(2), 2.0 * q(3);
  return D;
}

StateVec derivative_raw(const StateVec& x, const Thrusts& u,
                        const geometry::VehicleProperties& props,
                        const ExternalWrench& wrench, const Mat3& J_inv) {
  const Vec3 v = x.segment<3>(3);
  const Vec4 q = x.segment<4>(6);
  const Vec3 w = x.segment<3>(10);

  const Vec4 tw = props.allocation * u;  // (T, tau)
  const Vec3 tau = tw.tail<3>();

  StateVec dx;
  dx.segment<3>(0) = v;
  dx.segment<3>(3) =
      (tw(0) * body_z(q) + wrench.force - wrench.drag_coeff * v) / props.mass +
      Vec3(0.0, 0.0, -kGravity);
  dx.segment<4>(6) = 0.5 * quat_left({0.0, w.x(), w.y(), w.z()}) * q;
  dx.segment<3>(10) =
      J_inv * (tau + wrench.torque - w.cross(props.inertia * w));
  return dx;
}

/// Jacobians of derivative_raw with respect to the raw state and thrusts.
void derivative_jacobian_raw(const StateVec& x, const Thrusts& u,
                             const geometry::VehicleProperties& props,
                             const ExternalWrench& wrench, const Mat3& J_inv,
                             StateMat& Dx, InputMat& Du) {
  const Vec4 q = x.segment<4>(6);
  const Vec3 w = x.segment<3>(10);
  const double T = props.allocation.row(0) * u;

  Dx.setZero();
  Du.setZero();

  Dx.block<3, 3>(0, 3).setIdentity();
  Dx.block<3, 3>(3, 3) = -(wrench.drag_coeff / props.mass) * Mat3::Identity();
  Dx.block<3, 4>(3, 6) = (T / props.mass) * body_z_jacobian(q);
  Dx.block<4, 4>(6, 6) = 0.5 * quat_left({0.0, w.x(), w.y(), w.z()});
  Dx.block<4, 3>(6, 10) = 0.5 * quat_right(q).rightCols<3>();
  Dx.block<3, 3>(10, 10) =
      -J_inv * (geometry::skew(w) * props.inertia -
                geometry::skew(props.inertia * w));

  Du.block<3, 4>(3, 0) =
      (body_z(q) / props.mass) * props.allocation.row(0);
  Du.block<3, 4>(10, 0) = J_inv * props.allocation.block<3, 4>(1, 0);
}

}  // namespace

bool State::all_finite() const {
  return position.allFinite() && velocity.allFinite() &&
         orientation.coeffs().allFinite() && rates.allFinite();
}

Eigen::Vector4d wrench_from_thrusts(const geometry::VehicleProperties& props,
                                    const Thrusts& thrusts) {
  return props.allocation * thrusts;
}

double rotor_speed(double thrust, double k_t) {
  if (thrust < 0.0) {
    throw std::domain_error("dynamics: rotor thrust must be non-negative");
  }
  if (!(k_t > 0.0)) {
    throw std::domain_error("dynamics: thrust coefficient must be positive");
  }
  return std::sqrt(thrust / k_t);
}

StateDerivative state_derivative(const State& x, const Thrusts& u,
                                 const geometry::VehicleProperties& props,
                                 const ExternalWrench& wrench) {
  const Mat3 J_inv = props.inertia.inverse();
  const StateVec dx = derivative_raw(to_vector(x), u, props, wrench, J_inv);
  StateDerivative d;
  d.position = dx.segment<3>(0);
  d.velocity = dx.segment<3>(3);
  d.orientation = dx.segment<4>(6);
  d.rates = dx.segment<3>(10);
  return d;
}

State step_rk4(const State& x, const Thrusts& u,
               const geometry::VehicleProperties& props,
               const ExternalWrench& wrench, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dynamics: step size must be positive");
  }
  const Mat3 J_inv = props.inertia.inverse();
  const StateVec x0 = to_vector(x);

  const StateVec k1 = derivative_raw(x0, u, props, wrench, J_inv);
  const StateVec k2 =
      derivative_raw(x0 + 0.5 * dt * k1, u, props, wrench, J_inv);
  const StateVec k3 =
      derivative_raw(x0 + 0.5 * dt * k2, u, props, wrench, J_inv);
  const StateVec k4 = derivative_raw(x0 + dt * k3, u, props, wrench, J_inv);

  StateVec x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  x1.segment<4>(6).normalize();

  const State next = from_vector(x1);
  if (!next.all_finite()) {
    throw std::runtime_error("dynamics: integration diverged");
  }
  return next;
}

Eigen::Matrix<double, kStateSize, 1> to_vector(const State& x) {
  StateVec v;
  v.segment<3>(0) = x.position;
  v.segment<3>(3) = x.velocity;
  v.segment<4>(6) = quat_coeffs(x.orientation);
  v.segment<3>(10) = x.rates;
  return v;
}

State from_vector(const Eigen::Matrix<double, kStateSize, 1>& v) {
  State x;
  x.position = v.segment<3>(0);
  x.velocity = v.segment<3>(3);
  x.orientation = Eigen::Quaterniond(v(6), v(7), v(8), v(9));
  x.rates = v.segment<3>(10);
  return x;
}

State retract(const State& x,
              const Eigen::Matrix<double, kTangentSize, 1>& d) {
  State out = x;
  out.position += d.segment<3>(0);
  out.velocity += d.segment<3>(3);
  const Vec3 e = d.segment<3>(6);
  const double s = std::sqrt(std::max(0.0, 1.0 - e.squaredNorm()));
  out.orientation =
      (x.orientation * Eigen::Quaterniond(s, e.x(), e.y(), e.z()))
          .normalized();
  out.rates += d.segment<3>(9);
  return out;
}

Eigen::Matrix<double, kTangentSize, 1> local_error(const State& x,
                                                   const State& ref) {
  Eigen::Matrix<double, kTangentSize, 1> d;
  d.segment<3>(0) = x.position - ref.position;
  d.segment<3>(3) = x.velocity - ref.velocity;
  Eigen::Quaterniond qe = ref.orientation.conjugate() * x.orientation;
  if (qe.w() < 0.0) qe.coeffs() = -qe.coeffs();
  d.segment<3>(6) = qe.vec();
  d.segment<3>(9) = x.rates - ref.rates;
  return d;
}

void step_rk4_jacobian_raw(const State& x, const Thrusts& u,
                           const geometry::VehicleProperties& props,
                           const ExternalWrench& wrench, double dt,
                           Eigen::Matrix<double, kStateSize, kStateSize>& A,
                           Eigen::Matrix<double, kStateSize, kInputSize>& B) {
  const Mat3 J_inv = props.inertia.inverse();
  const StateVec x0 = to_vector(x);

  // Integrator stages and their sensitivities, chained in closed form.
  StateMat Dx;
  InputMat Du;

  const StateVec k1 = derivative_raw(x0, u, props, wrench, J_inv);
  derivative_jacobian_raw(x0, u, props, wrench, J_inv, Dx, Du);
  const StateMat K1x = Dx;
  const InputMat K1u = Du;

  const StateVec x2 = x0 + 0.5 * dt * k1;
  const StateVec k2 = derivative_raw(x2, u, props, wrench, J_inv);
  derivative_jacobian_raw(x2, u, props, wrench, J_inv, Dx, Du);
  const StateMat K2x = Dx * (StateMat::Identity() + 0.5 * dt * K1x);
  const InputMat K2u = Du + Dx * (0.5 * dt * K1u);

  const StateVec x3 = x0 + 0.5 * dt * k2;
  const StateVec k3 = derivative_raw(x3, u, props, wrench, J_inv);
  derivative_jacobian_raw(x3, u, props, wrench, J_inv, Dx, Du);
  const StateMat K3x = Dx * (StateMat::Identity() + 0.5 * dt * K2x);
  const InputMat K3u = Du + Dx * (0.5 * dt * K2u);

  const StateVec x4 = x0 + dt * k3;
  derivative_jacobian_raw(x4, u, props, wrench, J_inv, Dx, Du);
  const StateMat K4x = Dx * (StateMat::Identity() + dt * K3x);
  const InputMat K4u = Du + Dx * (dt * K3u);

  A = StateMat::Identity() +
      (dt / 6.0) * (K1x + 2.0 * K2x + 2.0 * K3x + K4x);
  B = (dt / 6.0) * (K1u + 2.0 * K2u + 2.0 * K3u + K4u);

  // Renormalization: q -> q / |q| right after the RK4 update.
  const StateVec k4 = derivative_raw(x4, u, props, wrench, J_inv);
  StateVec x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const Vec4 qt = x1.segment<4>(6);
  const double n = qt.norm();
  const Vec4 qh = qt / n;
  const Mat4 N = (Mat4::Identity() - qh * qh.transpose()) / n;
  A.middleRows<4>(6) = N * A.middleRows<4>(6);
  B.middleRows<4>(6) = N * B.middleRows<4>(6);
}

Eigen::Matrix<double, kStateSize, kTangentSize> retract_jacobian(
    const State& x) {
  Eigen::Matrix<double, kStateSize, kTangentSize> T;
  T.setZero();
  T.block<3, 3>(0, 0).setIdentity();
  T.block<3, 3>(3, 3).setIdentity();
  T.block<4, 3>(6, 6) =
      quat_left(quat_coeffs(x.orientation)).rightCols<3>();
  T.block<3, 3>(10, 9).setIdentity();
  return T;
}

Eigen::Matrix<double, kTangentSize, kStateSize> local_error_jacobian(
    const State& y, const State& ref) {
  Eigen::Matrix<double, kTangentSize, kStateSize> E;
  E.setZero();
  E.block<3, 3>(0, 0).setIdentity();
  E.block<3, 3>(3, 3).setIdentity();
  // The error quaternion ref.q^-1 * y.q is linear in the coefficients of
  // y.q; the canonical sign is constant in a neighborhood of y.
  const Eigen::Quaterniond qe = ref.orientation.conjugate() * y.orientation;
  const double sign = qe.w() < 0.0 ? -1.0 : 1.0;
  const Mat4 L = quat_left(quat_coeffs(ref.orientation.conjugate()));
  E.block<3, 4>(6, 6) = sign * L.bottomRows<3>();
  E.block<3, 3>(9, 10).setIdentity();
  return E;
}

double yaw_angle(const Eigen::Quaterniond& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  return std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
}

Eigen::Quaterniond attitude_from_thrust_axis(const Eigen::Vector3d& z_axis,
                                             double yaw) {
  const Eigen::Vector3d x_c(std::cos(yaw), std::sin(yaw), 0.0);
  Eigen::Matrix3d R;
  Eigen::Vector3d y_d = z_axis.cross(x_c);
  const double n = y_d.norm();
  if (n > 1e-8) {
    y_d /= n;
    R.col(0) = y_d.cross(z_axis);
    R.col(1) = y_d;
    R.col(2) = z_axis;
  } else {
    // Thrust axis parallel to the heading: anchor on the heading's y axis.
    const Eigen::Vector3d y_c(-std::sin(yaw), std::cos(yaw), 0.0);
    const Eigen::Vector3d x_d = y_c.cross(z_axis).normalized();
    R.col(0) = x_d;
    R.col(1) = z_axis.cross(x_d);
    R.col(2) = z_axis;
  }
  return Eigen::Quaterniond(R);
}

}  // namespace ringrotor::dynamics
