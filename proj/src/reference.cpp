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

#include "ringrotor/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace ringrotor::reference {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Attitude realizing a commanded acceleration at a fixed heading: body z
/// along the total specific force (acceleration plus gravity compensation).
Eigen::Quaterniond attitude_for(const Eigen::Vector3d& acceleration,
                                double yaw) {
  const Eigen::Vector3d f =
      acceleration + Eigen::Vector3d(0.0, 0.0, dynamics::kGravity);
  const double n = f.norm();
  const Eigen::Vector3d z_des =
      (n > 1e-9) ? (f / n).eval() : Eigen::Vector3d::UnitZ();
  return dynamics::attitude_from_thrust_axis(z_des, yaw);
}

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

Eigen::Vector3d rates_from_attitude(
    const std::function<Eigen::Quaterniond(double)>& attitude_at, double t,
    double h) {
  const Eigen::Quaterniond q = attitude_at(t);
  Eigen::Quaterniond qp = attitude_at(t + h);
  Eigen::Quaterniond qm = attitude_at(t - h);
  // Both neighbors on the hemisphere of q so the difference quotient sees a
  // continuous curve.
  if (q.coeffs().dot(qp.coeffs()) < 0.0) qp.coeffs() = -qp.coeffs();
  if (q.coeffs().dot(qm.coeffs()) < 0.0) qm.coeffs() = -qm.coeffs();
  const Eigen::Vector4d dq = (qp.coeffs() - qm.coeffs()) / (2.0 * h);
  // qdot = 1/2 (0, w) x q  =>  (0, w) = 2 qdot x q^-1.
  const Eigen::Quaterniond qdot(dq(3), dq(0), dq(1), dq(2));
  const Eigen::Quaterniond wq = qdot * q.conjugate();
  return 2.0 * wq.vec();
}

dynamics::ReferenceSample hover_sample(const Eigen::Vector3d& position,
                                       double yaw) {
  dynamics::ReferenceSample s;
  s.position = position;
  s.orientation = attitude_for(Eigen::Vector3d::Zero(), yaw);
  return s;
}

TrajectoryFn hover(const Eigen::Vector3d& position, double yaw) {
  const dynamics::ReferenceSample s = hover_sample(position, yaw);
  return [s](double) { return s; };
}

double figure8_theta_rate(const Figure8Params& params) {
  if (!(params.amplitude > 0.0) || !(params.speed > 0.0)) {
    throw std::invalid_argument("figure8: amplitude and speed must be > 0");
  }
  // Ground speed |dp/dtheta| thetadot peaks where both lobes cross
  // (|dp/dtheta| = A sqrt(2) at theta = 0 mod pi).
  return params.speed / (std::sqrt(2.0) * params.amplitude);
}

TrajectoryFn figure8(const Figure8Params& params) {
  if (!(params.amplitude > 0.0) || !(params.speed > 0.0) ||
      params.ramp_time < 0.0) {
    throw std::invalid_argument("figure8: invalid parameters");
  }
  const double rate = figure8_theta_rate(params);
  const Figure8Params p = params;

  // Path parameter with a smoothstep rate ramp: theta''(t) stays bounded so
  // the reference acceleration is continuous at the start.
  const auto theta_of = [p, rate](double t, double& th, double& thd,
                                  double& thdd) {
    if (t <= 0.0) {
      th = thd = thdd = 0.0;
      return;
    }
    if (p.ramp_time <= 0.0 || t >= p.ramp_time) {
      th = rate * (t - 0.5 * p.ramp_time);
      thd = rate;
      thdd = 0.0;
      return;
    }
    const double u = t / p.ramp_time;
    th = rate * p.ramp_time * (u * u * u - 0.5 * u * u * u * u);
    thd = rate * u * u * (3.0 - 2.0 * u);
    thdd = rate * 6.0 * u * (1.0 - u) / p.ramp_time;
  };

  const auto kinematics = [p, theta_of](double t, Eigen::Vector3d& pos,
                                        Eigen::Vector3d& vel,
                                        Eigen::Vector3d& acc) {
    double th, thd, thdd;
    theta_of(t, th, thd, thdd);
    const double s = std::sin(th), c = std::cos(th);
    const double s2 = std::sin(2.0 * th), c2 = std::cos(2.0 * th);
    const double A = p.amplitude;
    pos = Eigen::Vector3d(p.center.x() + A * s, p.center.y() + A * s * c,
                          p.altitude);
    const Eigen::Vector3d dp(A * c, A * c2, 0.0);
    const Eigen::Vector3d ddp(-A * s, -2.0 * A * s2, 0.0);
    vel = dp * thd;
    acc = ddp * thd * thd + dp * thdd;
  };

  const auto attitude_at = [p, kinematics](double t) {
    Eigen::Vector3d pos, vel, acc;
    kinematics(t, pos, vel, acc);
    return attitude_for(acc, p.yaw);
  };

  return [p, kinematics, attitude_at](double t) {
    dynamics::ReferenceSample out;
    kinematics(t, out.position, out.velocity, out.acceleration);
    out.orientation = attitude_at(t);
    out.rates = rates_from_attitude(attitude_at, t);
    return out;
  };
}

TrajectoryFn waypoint_path(const std::vector<Waypoint>& waypoints) {
  if (waypoints.empty()) {
    throw std::invalid_argument("waypoint_path: need at least one waypoint");
  }
  for (size_t i = 1; i < waypoints.size(); ++i) {
    if (!(waypoints[i].time > waypoints[i - 1].time)) {
      throw std::invalid_argument(
          "waypoint_path: times must be strictly increasing");
    }
  }
  const std::vector<Waypoint> wp = waypoints;

  struct Eval {
    Eigen::Vector3d pos, vel, acc;
    double yaw;
  };
  const auto eval = [wp](double t) -> Eval {
    if (t <= wp.front().time || wp.size() == 1) {
      return {wp.front().position, Eigen::Vector3d::Zero(),
              Eigen::Vector3d::Zero(), wp.front().yaw};
    }
    if (t >= wp.back().time) {
      return {wp.back().position, Eigen::Vector3d::Zero(),
              Eigen::Vector3d::Zero(), wp.back().yaw};
    }
    size_t i = 0;
    while (t >= wp[i + 1].time) ++i;
    const double dt = wp[i + 1].time - wp[i].time;
    const double u = (t - wp[i].time) / dt;
    // Quintic smoothstep: C2, with zero velocity/acceleration at both ends.
    const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    const double sp = 30.0 * u * u * (1.0 - u) * (1.0 - u) / dt;
    const double spp = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (dt * dt);
    const Eigen::Vector3d d = wp[i + 1].position - wp[i].position;
    const double dyaw = wrap_angle(wp[i + 1].yaw - wp[i].yaw);
    return {wp[i].position + d * s, d * sp, d * spp, wp[i].yaw + dyaw * s};
  };

  const auto attitude_at = [eval](double t) {
    const Eval e = eval(t);
    return attitude_for(e.acc, e.yaw);
  };

  return [eval, attitude_at](double t) {
    const Eval e = eval(t);
    dynamics::ReferenceSample out;
    out.position = e.pos;
    out.velocity = e.vel;
    out.acceleration = e.acc;
    out.orientation = attitude_at(t);
    out.rates = rates_from_attitude(attitude_at, t);
    return out;
  };
}

}  // namespace ringrotor::reference
