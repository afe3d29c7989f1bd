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

/// Closed-loop simulation harness: scenarios (trajectory + morph schedule +
/// payload events + disturbances), the control/physics loop, tracking
/// metrics, CSV logging, controller comparisons, and the canned
/// gap-crossing and grasp-transport evaluations.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ringrotor/baselines.hpp"
#include "ringrotor/calibrate.hpp"
#include "ringrotor/config.hpp"
#include "ringrotor/dynamics.hpp"
#include "ringrotor/geometry.hpp"
#include "ringrotor/nmpc.hpp"
#include "ringrotor/reference.hpp"
#include "ringrotor/servo.hpp"

namespace ringrotor::harness {

enum class ControllerKind { Pid, Lqr, Nmpc };

ControllerKind controller_from_name(const std::string& name);
std::string controller_name(ControllerKind kind);

/// Commanded side length over time.
struct MorphSchedule {
  enum class Mode { Hold, Oscillate, Steps };
  Mode mode = Mode::Hold;
  double hold_value = 0.414;  ///< command in Hold mode, and before any step
  double period = 6.0;        ///< Oscillate: full period [s]
  double low = 0.284;         ///< Oscillate: smallest commanded length [m]
  double high = 0.414;        ///< Oscillate: largest commanded length [m]
  std::vector<std::pair<double, double>> steps;  ///< Steps: (time, length)

  double command(double t) const;
};

/// A grasped object: attaches rigidly at attach_time, releases at
/// detach_time (never, if detach_time < attach_time).  Both the plant and
/// the controllers see the updated mass properties, which is the point of
/// whole-body grasping.
struct PayloadEvent {
  double attach_time = 0.0;
  double detach_time = -1.0;
  geometry::Payload payload;

  bool active(double t) const {
    return t >= attach_time && (detach_time < attach_time || t < detach_time);
  }
};

/// Homogeneous box payload, center at `position` in the body frame.
geometry::Payload box_payload(double mass, const Eigen::Vector3d& dims,
                              const Eigen::Vector3d& position);

/// External effects applied to the plant only (controllers never see them).
struct Disturbance {
  enum class Mode { None, Constant, Random };
  Mode mode = Mode::None;
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   ///< world frame [N]
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  ///< body frame [N m]
  double force_std = 0.0;   ///< Random: per-axis force sigma [N]
  double torque_std = 0.0;  ///< Random: per-axis torque sigma [N m]
  double drag_coeff = 0.0;  ///< linear velocity drag [N s/m]
  uint64_t seed = 1;        ///< Random: noise stream seed
};

struct Scenario {
  std::string name = "scenario";
  reference::TrajectoryFn trajectory;
  double duration = 20.0;
  double control_hz = 100.0;
  double physics_hz = 1000.0;
  bool start_on_reference = true;   ///< initialize the state on trajectory(0)
  dynamics::State initial_state;    ///< used when start_on_reference is false
  double initial_length = 0.414;

  geometry::MorphGeometry vehicle;
  servo::ServoParams servo;
  MorphSchedule morph;
  std::vector<PayloadEvent> payload_events;
  Disturbance disturbance;

  ControllerKind controller = ControllerKind::Nmpc;
  nmpc::NmpcConfig nmpc;
  baselines::PidGains pid;
  baselines::LqrConfig lqr;
};

/// One control tick: the state and reference the controller saw, the
/// thrusts it commanded, and the side length at that instant.
struct LogRow {
  double t = 0.0;
  dynamics::State state;
  dynamics::Thrusts thrusts = dynamics::Thrusts::Zero();
  double length = 0.0;
  dynamics::ReferenceSample reference;
};

/// Per-tick diagnostics of the predictive controller.
struct SolverTick {
  double t = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  double solve_time = 0.0;
  int active_bounds = 0;
};

struct Metrics {
  std::size_t samples = 0;
  double mean_position_error = 0.0;
  double rmse_position = 0.0;
  double max_position_error = 0.0;
  Eigen::Vector3d rmse_axes = Eigen::Vector3d::Zero();
  double rmse_velocity = 0.0;
  double saturation_fraction = 0.0;  ///< ticks with any rotor on a bound
  double mean_solve_time = 0.0;      ///< zero unless solver ticks present
  double max_solve_time = 0.0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
};

struct RunResult {
  std::vector<LogRow> log;          ///< one row per control tick
  std::vector<SolverTick> solver_log;
  Metrics metrics;
  double final_length = 0.0;
};

/// Run the closed loop: servo and mass properties update every control
/// tick, the plant integrates at the physics rate, the selected controller
/// runs at the control rate.  Throws on invalid scenarios and propagates
/// controller failures.
RunResult run_scenario(const Scenario& scenario);

/// Tracking/saturation metrics over log rows (thrust bounds define
/// saturation), plus solver statistics when ticks are supplied.
Metrics compute_metrics(const std::vector<LogRow>& log, double u_min,
                        double u_max,
                        const std::vector<SolverTick>& solver_log = {});

/// Trajectory log I/O.  Columns:
///   t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,t1,t2,t3,t4,L
/// written with enough digits to round-trip doubles exactly.  The reader
/// leaves the reference fields of each row zeroed.
void write_trajectory_csv(const std::string& path,
                          const std::vector<LogRow>& log);
std::vector<LogRow> read_trajectory_csv(const std::string& path);
void write_solver_csv(const std::string& path,
                      const std::vector<SolverTick>& log);

/// One line of the controller comparison table.  Failures of a single run
/// are caught and reported in the row instead of aborting the sweep.
struct ComparisonRow {
  std::string controller;
  double speed = 0.0;
  Metrics metrics;
  bool ok = false;
  std::string error;
};
std::vector<ComparisonRow> compare_controllers(const config::Config& cfg);
void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows);
std::string format_comparison(const std::vector<ComparisonRow>& rows);

/// A planar gap of `width` at `center`: the vehicle counts as inside while
/// its position along `axis` is within half_depth of the center, and fits
/// when its side length plus clearance margin stays below the width.
struct GapSpec {
  Eigen::Vector3d center = Eigen::Vector3d(0.0, 0.0, 1.0);
  int axis = 0;             ///< traversal axis (0 = x, 1 = y, 2 = z)
  double half_depth = 0.25; ///< half extent of the gap region [m]
  double width = 0.40;      ///< opening size [m]
  double margin = 0.05;     ///< required clearance [m]
};

struct GapResult {
  bool traversed = false;        ///< entered on one side, left on the other
  bool entered = false;
  double max_length_inside = 0.0;
  double min_length_inside = 0.0;
  double clearance = 0.0;        ///< width - margin - max_length_inside
  bool success = false;          ///< traversed && clearance >= 0
};
GapResult evaluate_gap(const std::vector<LogRow>& log, const GapSpec& gap);

/// Steady-state collective-thrust step across a payload attach event.
struct GraspResult {
  double thrust_before = 0.0;   ///< mean collective before attach [N]
  double thrust_after = 0.0;    ///< mean collective after settling [N]
  double delta = 0.0;
  double expected = 0.0;        ///< payload mass * g
  double relative_error = 0.0;
  double max_height_drop = 0.0; ///< worst altitude sag during the transient
};
GraspResult evaluate_grasp(const RunResult& run, const PayloadEvent& event,
                           double settle_time = 1.5, double window = 1.0);

/// Configuration loaders.  Every key has a default, so an empty config
/// yields the stock vehicle and controllers.
geometry::LayoutParams layout_from_config(const config::Config& cfg);
geometry::MorphGeometry vehicle_from_config(const config::Config& cfg);
nmpc::NmpcConfig nmpc_from_config(const config::Config& cfg);
baselines::PidGains pid_from_config(const config::Config& cfg);
baselines::LqrConfig lqr_from_config(const config::Config& cfg);
servo::ServoParams servo_from_config(const config::Config& cfg);
reference::Figure8Params figure8_from_config(const config::Config& cfg);
GapSpec gap_from_config(const config::Config& cfg);
Scenario scenario_from_config(const config::Config& cfg);

}  // namespace ringrotor::harness
