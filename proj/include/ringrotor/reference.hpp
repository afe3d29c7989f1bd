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

/// Reference trajectory generators.  A trajectory is a total function of
/// time returning position, velocity, acceleration, the attitude that
/// realizes the acceleration at a fixed heading, and consistent body
/// rates.  All generators are smooth enough for the controllers to
/// difference through.

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ringrotor/dynamics.hpp"

namespace ringrotor::reference {

using TrajectoryFn = std::function<dynamics::ReferenceSample(double)>;

/// Constant hover sample at a position and heading.
dynamics::ReferenceSample hover_sample(const Eigen::Vector3d& position,
                                       double yaw = 0.0);
TrajectoryFn hover(const Eigen::Vector3d& position, double yaw = 0.0);

/// Figure-eight (lemniscate) in the horizontal plane:
///   p(theta) = center + (A sin(theta), A sin(theta) cos(theta), 0)
/// so the footprint is 2A x A.  The path parameter accelerates through a
/// smoothstep ramp and then advances at the constant rate that makes the
/// peak ground speed equal `speed` (attained where the lobes cross).
struct Figure8Params {
  double amplitude = 2.0;   ///< half-extent of the long axis [m]
  double speed = 1.5;       ///< peak speed after the ramp [m/s]
  double altitude = 1.0;    ///< constant height [m]
  double yaw = 0.0;         ///< constant heading [rad]
  double ramp_time = 2.0;   ///< smoothstep spin-up duration [s]
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  ///< pattern center (x, y)
};
TrajectoryFn figure8(const Figure8Params& params);

/// Angular rate of the figure-eight path parameter once the ramp is over.
double figure8_theta_rate(const Figure8Params& params);

/// Waypoints connected by quintic smoothstep segments (velocity and
/// acceleration vanish at every waypoint).  Times must be strictly
/// increasing; the pose holds before the first and after the last point.
struct Waypoint {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};
TrajectoryFn waypoint_path(const std::vector<Waypoint>& waypoints);

/// Body rates that make the trajectory's attitude self-consistent with the
/// simulated kinematics, obtained by central differencing the attitude of
/// `sample_at` around t.
Eigen::Vector3d rates_from_attitude(
    const std::function<Eigen::Quaterniond(double)>& attitude_at, double t,
    double h = 1e-4);

}  // namespace ringrotor::reference
