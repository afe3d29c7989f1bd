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

// Reference generator tests: the derivative chain is differenced
// numerically, the figure-eight invariants (start point, peak speed,
// periodicity) are checked against closed forms, and the waypoint path is
// probed at and between its nodes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ringrotor/dynamics.hpp"
#include "ringrotor/reference.hpp"

using namespace ringrotor;
using namespace ringrotor::reference;
using dynamics::ReferenceSample;

namespace {

/// Quaternion for a rotation vector w*h (exact exponential map).
Eigen::Quaterniond rotation_step(const Eigen::Vector3d& rates, double h) {
  const double angle = rates.norm() * h;
  if (angle < 1e-14) return Eigen::Quaterniond::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, rates.normalized()));
}

}  // namespace

TEST_CASE("hover reference is constant in every field") {
  const TrajectoryFn traj = hover({1.0, -2.0, 3.0}, 0.4);
  for (double t : {0.0, 0.7, 13.0}) {
    const ReferenceSample s = traj(t);
    CHECK((s.position - Eigen::Vector3d(1.0, -2.0, 3.0)).norm() == 0.0);
    CHECK(s.velocity.norm() == 0.0);
    CHECK(s.acceleration.norm() == 0.0);
    CHECK(s.rates.norm() == 0.0);
    CHECK(dynamics::yaw_angle(s.orientation) ==
          doctest::Approx(0.4).epsilon(1e-12));
  }
}

TEST_CASE("figure-eight starts at the pattern center at rest") {
  Figure8Params params;
  params.center = {0.5, -0.5};
  const TrajectoryFn traj = figure8(params);
  const ReferenceSample s = traj(0.0);
  CHECK((s.position - Eigen::Vector3d(0.5, -0.5, params.altitude)).norm() <
        1e-12);
  CHECK(s.velocity.norm() < 1e-12);  // ramp leaves from rest
}

TEST_CASE("peak ground speed matches the configured speed") {
  Figure8Params params;
  params.speed = 2.5;
  const TrajectoryFn traj = figure8(params);
  const double period = 2.0 * std::numbers::pi / figure8_theta_rate(params);

  double peak = 0.0;
  const int samples = 40000;
  for (int i = 0; i <= samples; ++i) {
    const double t = params.ramp_time + period * i / samples;
    peak = std::max(peak, traj(t).velocity.norm());
  }
  CHECK(peak == doctest::Approx(params.speed).epsilon(1e-3));
  CHECK(peak <= params.speed * (1.0 + 1e-9));  // the configured peak binds
}

TEST_CASE("post-ramp pattern repeats with the period of the path parameter") {
  Figure8Params params;
  const TrajectoryFn traj = figure8(params);
  const double period = 2.0 * std::numbers::pi / figure8_theta_rate(params);

  for (double t : {params.ramp_time + 0.3, params.ramp_time + 2.9}) {
    const ReferenceSample a = traj(t);
    const ReferenceSample b = traj(t + period);
    CHECK((a.position - b.position).norm() < 1e-9);
    CHECK((a.velocity - b.velocity).norm() < 1e-9);
    CHECK((a.acceleration - b.acceleration).norm() < 1e-9);
    CHECK(a.orientation.angularDistance(b.orientation) < 1e-9);
  }
}

TEST_CASE("velocity and acceleration are the derivatives of position") {
  Figure8Params params;
  params.speed = 2.0;
  const TrajectoryFn traj = figure8(params);
  const double h = 1e-4;
  for (double t : {0.8, 2.7, 5.1, 9.6}) {  // on and after the ramp
    const ReferenceSample mid = traj(t);
    const ReferenceSample plus = traj(t + h);
    const ReferenceSample minus = traj(t - h);
    const Eigen::Vector3d v_fd = (plus.position - minus.position) / (2.0 * h);
    const Eigen::Vector3d a_fd =
        (plus.position - 2.0 * mid.position + minus.position) / (h * h);
    CHECK((mid.velocity - v_fd).norm() < 1e-5);
    CHECK((mid.acceleration - a_fd).norm() < 1e-4);
  }
}

TEST_CASE("reference attitude points the thrust axis along the demand") {
  Figure8Params params;
  params.speed = 2.5;
  const TrajectoryFn traj = figure8(params);
  for (double t : {2.5, 4.0, 6.3, 8.8}) {
    const ReferenceSample s = traj(t);
    const Eigen::Vector3d demand =
        (s.acceleration + Eigen::Vector3d(0.0, 0.0, dynamics::kGravity))
            .normalized();
    CHECK(std::abs(s.orientation.norm() - 1.0) < 1e-12);
    CHECK((s.orientation.toRotationMatrix().col(2) - demand).norm() < 1e-9);
  }
}

TEST_CASE("sample rates integrate the attitude forward") {
  // The rates must satisfy the same kinematics the simulator integrates,
  // q_dot = (0, w)/2 * q, or the controllers would chase a bias.
  Figure8Params params;
  params.speed = 2.5;
  const TrajectoryFn traj = figure8(params);
  const double h = 1e-4;
  for (double t : {2.6, 5.0, 7.9}) {
    // Midpoint rule: q(t+h) = exp(h w(t+h/2)) * q(t) to third order.
    const Eigen::Quaterniond predicted =
        rotation_step(traj(t + 0.5 * h).rates, h) * traj(t).orientation;
    const Eigen::Quaterniond actual = traj(t + h).orientation;
    CHECK(predicted.angularDistance(actual) < 1e-7);
  }
}

TEST_CASE("waypoint path hits the nodes at rest and holds the endpoints") {
  std::vector<Waypoint> pts(3);
  pts[0] = {1.0, {0.0, 0.0, 1.0}, 0.0};
  pts[1] = {3.0, {1.0, -1.0, 1.5}, 0.8};
  pts[2] = {6.0, {2.0, 0.5, 1.0}, -0.4};
  const TrajectoryFn traj = waypoint_path(pts);

  for (const Waypoint& wp : pts) {
    const ReferenceSample s = traj(wp.time);
    CHECK((s.position - wp.position).norm() < 1e-12);
    CHECK(s.velocity.norm() < 1e-12);      // quintic: rest at every node
    CHECK(s.acceleration.norm() < 1e-12);
    CHECK(dynamics::yaw_angle(s.orientation) ==
          doctest::Approx(wp.yaw).epsilon(1e-9));
  }

  // Clamped before the first node and after the last.
  CHECK((traj(-5.0).position - pts[0].position).norm() == 0.0);
  CHECK(traj(-5.0).velocity.norm() == 0.0);
  CHECK((traj(50.0).position - pts[2].position).norm() == 0.0);
  CHECK(traj(50.0).velocity.norm() == 0.0);

  // Between nodes the path moves monotonically along the segment chord.
  const ReferenceSample mid = traj(2.0);
  CHECK(mid.position.x() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mid.position.y() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(mid.velocity.norm() > 0.1);
}

TEST_CASE("waypoint yaw interpolates along the short way around") {
  // 3.0 -> -3.0 crosses the pi seam: the short arc is 0.283 rad, not 6.
  std::vector<Waypoint> pts(2);
  pts[0] = {0.0, {0.0, 0.0, 1.0}, 3.0};
  pts[1] = {2.0, {0.0, 0.0, 1.0}, -3.0};
  const TrajectoryFn traj = waypoint_path(pts);

  const double mid = dynamics::yaw_angle(traj(1.0).orientation);
  // Halfway along the short arc: right on the seam at +/- pi.
  CHECK(std::abs(std::remainder(mid - std::numbers::pi, 2.0 * std::numbers::pi)) <
        1e-9);

  // The long way would sweep through zero; the short way never goes below 3.
  const double quarter = dynamics::yaw_angle(traj(0.5).orientation);
  CHECK(std::abs(quarter) > 2.99);
}

TEST_CASE("waypoint times must strictly increase") {
  std::vector<Waypoint> pts(2);
  pts[0] = {1.0, {0.0, 0.0, 1.0}, 0.0};
  pts[1] = {1.0, {1.0, 0.0, 1.0}, 0.0};
  CHECK_THROWS_AS(waypoint_path(pts), std::invalid_argument);
  CHECK_THROWS_AS(waypoint_path({}), std::invalid_argument);
}

TEST_CASE("differenced rates recover a known spin") {
  // Constant-rate yaw: the differenced body rates must equal the true rate.
  const double rate = 0.9;
  const auto attitude_at = [&](double t) {
    return Eigen::Quaterniond(
        Eigen::AngleAxisd(rate * t, Eigen::Vector3d::UnitZ()));
  };
  const Eigen::Vector3d w = rates_from_attitude(attitude_at, 1.3);
  CHECK((w - Eigen::Vector3d(0.0, 0.0, rate)).norm() < 1e-7);
}
