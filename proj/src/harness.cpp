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

#include "ringrotor/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ringrotor::harness {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Deterministic standard-normal stream (Box-Muller on the raw engine
/// output, so results do not depend on the standard library's
/// distribution implementation).
class GaussianStream {
 public:
  explicit GaussianStream(uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::Vector3d next_vec3() {
    Eigen::Vector3d v;
    v << next(), next(), next();
    return v;
  }

 private:
  double uniform() {  // top 53 bits -> [0, 1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

double collective(const dynamics::Thrusts& t) { return t.sum(); }

/// Thrust box of the scenario's active controller.
std::pair<double, double> thrust_limits(const Scenario& sc) {
  switch (sc.controller) {
    case ControllerKind::Pid:
      return {sc.pid.u_min, sc.pid.u_max};
    case ControllerKind::Lqr:
      return {sc.lqr.u_min, sc.lqr.u_max};
    case ControllerKind::Nmpc:
      return {sc.nmpc.u_min, sc.nmpc.u_max};
  }
  return {0.0, 0.0};
}

}  // namespace

ControllerKind controller_from_name(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "pid") return ControllerKind::Pid;
  if (n == "lqr") return ControllerKind::Lqr;
  if (n == "nmpc" || n == "mpc") return ControllerKind::Nmpc;
  throw std::invalid_argument("unknown controller '" + name + "'");
}

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Pid:
      return "pid";
    case ControllerKind::Lqr:
      return "lqr";
    case ControllerKind::Nmpc:
      return "nmpc";
  }
  return "?";
}

double MorphSchedule::command(double t) const {
  switch (mode) {
    case Mode::Hold:
      return hold_value;
    case Mode::Oscillate: {
      const double mid = 0.5 * (high + low);
      const double half = 0.5 * (high - low);
      // Starts fully extended and shrinks through the first half period.
      return mid + half * std::cos(2.0 * kPi * t / period);
    }
    case Mode::Steps: {
      double value = hold_value;
      for (const auto& [time, length] : steps) {
        if (t >= time) value = length;
      }
      return value;
    }
  }
  return hold_value;
}

geometry::Payload box_payload(double mass, const Eigen::Vector3d& dims,
                              const Eigen::Vector3d& position) {
  if (mass < 0.0 || (dims.array() < 0.0).any()) {
    throw std::invalid_argument("box_payload: negative mass or dimensions");
  }
  geometry::Payload p;
  p.mass = mass;
  p.position = position;
  const double c = mass / 12.0;
  p.inertia = Eigen::Vector3d(c * (dims.y() * dims.y() + dims.z() * dims.z()),
                              c * (dims.x() * dims.x() + dims.z() * dims.z()),
                              c * (dims.x() * dims.x() + dims.y() * dims.y()))
                  .asDiagonal();
  return p;
}

RunResult run_scenario(const Scenario& sc) {
  if (!sc.trajectory) {
    throw std::invalid_argument("run_scenario: scenario has no trajectory");
  }
  if (!(sc.duration > 0.0)) {
    throw std::invalid_argument("run_scenario: duration must be positive");
  }
  if (!(sc.control_hz > 0.0) || !(sc.physics_hz >= sc.control_hz)) {
    throw std::invalid_argument(
        "run_scenario: need physics_hz >= control_hz > 0");
  }

  const double dt_ctrl = 1.0 / sc.control_hz;
  const int substeps =
      std::max(1, static_cast<int>(std::lround(sc.physics_hz / sc.control_hz)));
  const double dt_phys = dt_ctrl / substeps;
  const int ticks = static_cast<int>(std::lround(sc.duration * sc.control_hz));

  GaussianStream noise(sc.disturbance.seed);

  double length = std::clamp(sc.initial_length, sc.servo.L_min, sc.servo.L_max);
  dynamics::State x = sc.start_on_reference ? sc.trajectory(0.0).to_state()
                                            : sc.initial_state;

  baselines::LqrController lqr(sc.lqr);
  nmpc::NmpcSolution warm;
  bool have_warm = false;

  RunResult out;
  out.log.reserve(ticks);

  for (int k = 0; k < ticks; ++k) {
    const double t = k * dt_ctrl;

    // Morphing servo runs at the control rate.
    const double rate = servo::servo_command(sc.morph.command(t), length,
                                             sc.servo);
    length = servo::servo_step(length, rate, dt_ctrl, sc.servo);

    // Mass properties at the current size, including any grasped payload.
    // Controllers see the same properties as the plant: a grasped object
    // becomes part of the body.
    geometry::Payload payload;
    for (const auto& event : sc.payload_events) {
      if (event.active(t)) payload = event.payload;
    }
    const geometry::VehicleProperties props =
        geometry::total_inertia(sc.vehicle, length, payload);

    const dynamics::ReferenceSample ref_now = sc.trajectory(t);

    // Plant-only disturbance, held over the control period.
    dynamics::ExternalWrench plant_wrench;
    plant_wrench.drag_coeff = sc.disturbance.drag_coeff;
    switch (sc.disturbance.mode) {
      case Disturbance::Mode::None:
        break;
      case Disturbance::Mode::Constant:
        plant_wrench.force = sc.disturbance.force;
        plant_wrench.torque = sc.disturbance.torque;
        break;
      case Disturbance::Mode::Random:
        plant_wrench.force =
            sc.disturbance.force + sc.disturbance.force_std * noise.next_vec3();
        plant_wrench.torque = sc.disturbance.torque +
                              sc.disturbance.torque_std * noise.next_vec3();
        break;
    }

    dynamics::Thrusts u = dynamics::Thrusts::Zero();
    switch (sc.controller) {
      case ControllerKind::Pid:
        u = baselines::pid_control(x, ref_now, props, sc.pid);
        break;
      case ControllerKind::Lqr:
        u = lqr.control(x, ref_now, props);
        break;
      case ControllerKind::Nmpc: {
        const int N = sc.nmpc.horizon;
        nmpc::ReferenceWindow window;
        window.states.reserve(N + 1);
        window.thrusts.reserve(N);
        const Eigen::FullPivLU<Eigen::Matrix4d> alloc_lu(props.allocation);
        for (int i = 0; i <= N; ++i) {
          const dynamics::ReferenceSample s =
              sc.trajectory(t + i * sc.nmpc.dt);
          window.states.push_back(s.to_state());
          if (i < N) {
            const Eigen::Vector4d t_ref =
                alloc_lu.solve(baselines::equilibrium_wrench(s, props));
            window.thrusts.push_back(
                t_ref.cwiseMax(sc.nmpc.u_min).cwiseMin(sc.nmpc.u_max));
          }
        }
        const nmpc::NmpcSolution sol =
            nmpc::solve(x, window, props, sc.nmpc, dynamics::ExternalWrench{},
                        have_warm ? &warm : nullptr);
        u = sol.inputs.front();
        warm = sol;
        have_warm = true;
        out.solver_log.push_back({t, sol.iterations, sol.kkt_residual,
                                  sol.solve_time, sol.active_bounds});
        break;
      }
    }

    LogRow row;
    row.t = t;
    row.state = x;
    row.thrusts = u;
    row.length = length;
    row.reference = ref_now;
    out.log.push_back(std::move(row));

    for (int s = 0; s < substeps; ++s) {
      x = dynamics::step_rk4(x, u, props, plant_wrench, dt_phys);
    }
  }

  const auto [u_min, u_max] = thrust_limits(sc);
  out.metrics = compute_metrics(out.log, u_min, u_max, out.solver_log);
  out.final_length = length;
  return out;
}

Metrics compute_metrics(const std::vector<LogRow>& log, double u_min,
                        double u_max,
                        const std::vector<SolverTick>& solver_log) {
  Metrics m;
  m.samples = log.size();
  if (log.empty()) return m;

  double sum_err = 0.0, sum_sq = 0.0, sum_vel_sq = 0.0;
  Eigen::Vector3d sum_axes_sq = Eigen::Vector3d::Zero();
  std::size_t saturated = 0;
  for (const auto& row : log) {
    const Eigen::Vector3d e = row.reference.position - row.state.position;
    const double n = e.norm();
    sum_err += n;
    sum_sq += n * n;
    sum_axes_sq += e.cwiseProduct(e);
    sum_vel_sq += (row.reference.velocity - row.state.velocity).squaredNorm();
    m.max_position_error = std::max(m.max_position_error, n);
    const bool sat = (row.thrusts.array() <= u_min).any() ||
                     (row.thrusts.array() >= u_max).any();
    if (sat) ++saturated;
  }
  const double n = static_cast<double>(log.size());
  m.mean_position_error = sum_err / n;
  m.rmse_position = std::sqrt(sum_sq / n);
  m.rmse_axes = (sum_axes_sq / n).cwiseSqrt();
  m.rmse_velocity = std::sqrt(sum_vel_sq / n);
  m.saturation_fraction = static_cast<double>(saturated) / n;

  if (!solver_log.empty()) {
    double sum_time = 0.0, sum_iter = 0.0;
    for (const auto& tick : solver_log) {
      sum_time += tick.solve_time;
      sum_iter += tick.iterations;
      m.max_solve_time = std::max(m.max_solve_time, tick.solve_time);
      m.max_iterations = std::max(m.max_iterations, tick.iterations);
    }
    m.mean_solve_time = sum_time / static_cast<double>(solver_log.size());
    m.mean_iterations = sum_iter / static_cast<double>(solver_log.size());
  }
  return m;
}

// --- CSV ---------------------------------------------------------------------

namespace {

class FileHandle {
 public:
  FileHandle(const std::string& path, const char* mode)
      : f_(std::fopen(path.c_str(), mode)) {
    if (f_ == nullptr) {
      throw std::runtime_error("cannot open '" + path + "'");
    }
  }
  ~FileHandle() {
    if (f_ != nullptr) std::fclose(f_);
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
  std::FILE* get() const { return f_; }

 private:
  std::FILE* f_;
};

}  // namespace

void write_trajectory_csv(const std::string& path,
                          const std::vector<LogRow>& log) {
  FileHandle f(path, "w");
  std::fprintf(f.get(),
               "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,t1,t2,t3,t4,L\n");
  for (const auto& r : log) {
    const auto& p = r.state.position;
    const auto& v = r.state.velocity;
    const auto& q = r.state.orientation;
    const auto& w = r.state.rates;
    const auto& u = r.thrusts;
    std::fprintf(f.get(),
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                 "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                 "%.17g\n",
                 r.t, p.x(), p.y(), p.z(), v.x(), v.y(), v.z(), q.w(), q.x(),
                 q.y(), q.z(), w.x(), w.y(), w.z(), u(0), u(1), u(2), u(3),
                 r.length);
  }
}

std::vector<LogRow> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("'" + path + "' is empty");
  }
  std::vector<LogRow> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 19> v{};
    std::istringstream ss(line);
    std::string tok;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::getline(ss, tok, ',')) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": expected 19 columns");
      }
      v[i] = std::stod(tok);
    }
    LogRow r;
    r.t = v[0];
    r.state.position = Eigen::Vector3d(v[1], v[2], v[3]);
    r.state.velocity = Eigen::Vector3d(v[4], v[5], v[6]);
    r.state.orientation = Eigen::Quaterniond(v[7], v[8], v[9], v[10]);
    r.state.rates = Eigen::Vector3d(v[11], v[12], v[13]);
    r.thrusts << v[14], v[15], v[16], v[17];
    r.length = v[18];
    out.push_back(std::move(r));
  }
  return out;
}

void write_solver_csv(const std::string& path,
                      const std::vector<SolverTick>& log) {
  FileHandle f(path, "w");
  std::fprintf(f.get(), "t,iterations,kkt_residual,solve_time,active_bounds\n");
  for (const auto& r : log) {
    std::fprintf(f.get(), "%.17g,%d,%.17g,%.17g,%d\n", r.t, r.iterations,
                 r.kkt_residual, r.solve_time, r.active_bounds);
  }
}

// --- controller comparison ----------------------------------------------------

std::vector<ComparisonRow> compare_controllers(const config::Config& cfg) {
  const Scenario base = scenario_from_config(cfg);
  reference::Figure8Params fig = figure8_from_config(cfg);

  std::vector<double> speeds = {1.5, 2.0, 2.5};
  if (cfg.has("compare.speeds")) speeds = cfg.get_list("compare.speeds");

  std::vector<ControllerKind> kinds = {ControllerKind::Pid,
                                       ControllerKind::Lqr,
                                       ControllerKind::Nmpc};
  if (cfg.has("compare.controllers")) {
    kinds.clear();
    std::istringstream ss(cfg.get_string("compare.controllers"));
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto b = name.find_first_not_of(" \t");
      const auto e = name.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      kinds.push_back(controller_from_name(name.substr(b, e - b + 1)));
    }
  }

  std::vector<ComparisonRow> rows;
  for (const double speed : speeds) {
    for (const ControllerKind kind : kinds) {
      ComparisonRow row;
      row.controller = controller_name(kind);
      row.speed = speed;
      try {
        Scenario sc = base;
        fig.speed = speed;
        sc.trajectory = reference::figure8(fig);
        sc.controller = kind;
        sc.name = base.name + "-" + row.controller;
        const RunResult result = run_scenario(sc);
        row.metrics = result.metrics;
        row.ok = true;
      } catch (const std::exception& ex) {
        row.ok = false;
        row.error = ex.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_comparison_csv(const std::string& path,
                          const std::vector<ComparisonRow>& rows) {
  FileHandle f(path, "w");
  std::fprintf(f.get(),
               "controller,speed,mean_position_error,rmse_position,"
               "max_position_error,saturation_fraction,mean_solve_time,ok,"
               "error\n");
  for (const auto& r : rows) {
    std::fprintf(f.get(), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s\n",
                 r.controller.c_str(), r.speed, r.metrics.mean_position_error,
                 r.metrics.rmse_position, r.metrics.max_position_error,
                 r.metrics.saturation_fraction, r.metrics.mean_solve_time,
                 r.ok ? 1 : 0, r.error.c_str());
  }
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-6s %-6s %-12s %-12s %-12s %-10s %s\n",
                "ctrl", "speed", "mean err", "rmse", "max err", "sat", "note");
  os << buf;
  for (const auto& r : rows) {
    if (r.ok) {
      std::snprintf(buf, sizeof(buf),
                    "%-6s %-6.2f %-12.5f %-12.5f %-12.5f %-10.3f %s\n",
                    r.controller.c_str(), r.speed,
                    r.metrics.mean_position_error, r.metrics.rmse_position,
                    r.metrics.max_position_error,
                    r.metrics.saturation_fraction, "");
    } else {
      std::snprintf(buf, sizeof(buf), "%-6s %-6.2f failed: %s\n",
                    r.controller.c_str(), r.speed, r.error.c_str());
    }
    os << buf;
  }
  return os.str();
}

// --- canned evaluations --------------------------------------------------------

GapResult evaluate_gap(const std::vector<LogRow>& log, const GapSpec& gap) {
  if (gap.axis < 0 || gap.axis > 2) {
    throw std::invalid_argument("evaluate_gap: axis must be 0, 1 or 2");
  }
  GapResult res;
  int entry_side = 0;
  bool inside_prev = false;
  for (const auto& row : log) {
    const double s = row.state.position(gap.axis) - gap.center(gap.axis);
    const bool inside = std::abs(s) <= gap.half_depth;
    if (inside) {
      if (!res.entered) {
        res.entered = true;
        res.max_length_inside = row.length;
        res.min_length_inside = row.length;
      } else {
        res.max_length_inside = std::max(res.max_length_inside, row.length);
        res.min_length_inside = std::min(res.min_length_inside, row.length);
      }
      if (!inside_prev) entry_side = (s < 0.0) ? -1 : +1;
    } else if (inside_prev && entry_side != 0) {
      const int exit_side = (s < 0.0) ? -1 : +1;
      if (exit_side != entry_side) res.traversed = true;
    }
    inside_prev = inside;
  }
  res.clearance = gap.width - gap.margin - res.max_length_inside;
  res.success = res.traversed && res.entered && res.clearance >= 0.0;
  return res;
}

GraspResult evaluate_grasp(const RunResult& run, const PayloadEvent& event,
                           double settle_time, double window) {
  GraspResult res;
  res.expected = event.payload.mass * dynamics::kGravity;

  double sum_before = 0.0, sum_after = 0.0;
  std::size_t n_before = 0, n_after = 0;
  const double t0 = event.attach_time;
  for (const auto& row : run.log) {
    if (row.t >= t0 - window && row.t < t0) {
      sum_before += collective(row.thrusts);
      ++n_before;
    }
    if (row.t >= t0 + settle_time && row.t < t0 + settle_time + window) {
      sum_after += collective(row.thrusts);
      ++n_after;
    }
    if (row.t >= t0 && row.t <= t0 + settle_time) {
      res.max_height_drop =
          std::max(res.max_height_drop,
                   row.reference.position.z() - row.state.position.z());
    }
  }
  if (n_before == 0 || n_after == 0) {
    throw std::invalid_argument(
        "evaluate_grasp: log does not cover the attach transient");
  }
  res.thrust_before = sum_before / static_cast<double>(n_before);
  res.thrust_after = sum_after / static_cast<double>(n_after);
  res.delta = res.thrust_after - res.thrust_before;
  res.relative_error = (res.expected != 0.0)
                           ? std::abs(res.delta - res.expected) / res.expected
                           : std::abs(res.delta);
  return res;
}

// --- configuration loaders ------------------------------------------------------

namespace {

Eigen::Vector3d vec3_or_scalar(const config::Config& cfg,
                               const std::string& key,
                               const Eigen::Vector3d& fallback) {
  if (!cfg.has(key)) return fallback;
  const std::vector<double> v = cfg.get_list(key);
  if (v.size() == 1) return Eigen::Vector3d::Constant(v[0]);
  if (v.size() == 3) return Eigen::Vector3d(v[0], v[1], v[2]);
  throw config::ConfigError("key '" + key + "': expected 1 or 3 numbers");
}

Eigen::Vector4d vec4_or_scalar(const config::Config& cfg,
                               const std::string& key,
                               const Eigen::Vector4d& fallback) {
  if (!cfg.has(key)) return fallback;
  const std::vector<double> v = cfg.get_list(key);
  if (v.size() == 1) return Eigen::Vector4d::Constant(v[0]);
  if (v.size() == 4) return Eigen::Vector4d(v[0], v[1], v[2], v[3]);
  throw config::ConfigError("key '" + key + "': expected 1 or 4 numbers");
}

Eigen::Matrix<double, 12, 1> vec12_or_scalar(
    const config::Config& cfg, const std::string& key,
    const Eigen::Matrix<double, 12, 1>& fallback) {
  if (!cfg.has(key)) return fallback;
  const std::vector<double> v = cfg.get_list(key);
  if (v.size() == 1) {
    return Eigen::Matrix<double, 12, 1>::Constant(v[0]);
  }
  if (v.size() == 12) {
    Eigen::Matrix<double, 12, 1> out;
    for (int i = 0; i < 12; ++i) out(i) = v[i];
    return out;
  }
  throw config::ConfigError("key '" + key + "': expected 1 or 12 numbers");
}

/// Numerically-sorted keys "<prefix><index>" (so 10 comes after 2).
std::vector<std::string> indexed_keys(const config::Config& cfg,
                                      const std::string& prefix) {
  std::vector<std::pair<long, std::string>> found;
  for (const std::string& key : cfg.keys_with_prefix(prefix)) {
    const std::string suffix = key.substr(prefix.size());
    try {
      std::size_t used = 0;
      const long idx = std::stol(suffix, &used);
      if (used == suffix.size()) found.emplace_back(idx, key);
    } catch (const std::exception&) {
      throw config::ConfigError("key '" + key + "': expected numeric suffix");
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  out.reserve(found.size());
  for (auto& [idx, key] : found) out.push_back(std::move(key));
  return out;
}

}  // namespace

geometry::LayoutParams layout_from_config(const config::Config& cfg) {
  geometry::LayoutParams p;
  const auto d = [&cfg](const char* key, double fallback) {
    return cfg.get_double(key, fallback);
  };
  p.total_mass = d("vehicle.total_mass", p.total_mass);
  p.k_t = d("vehicle.k_t", p.k_t);
  p.k_c = d("vehicle.k_c", p.k_c);
  p.L_min = d("vehicle.length_min", p.L_min);
  p.L_max = d("vehicle.length_max", p.L_max);
  p.motor_mass = d("vehicle.motor_mass", p.motor_mass);
  p.battery_mass = d("vehicle.battery_mass", p.battery_mass);
  p.servo_mass = d("vehicle.servo_mass", p.servo_mass);
  p.board_mass = d("vehicle.board_mass", p.board_mass);
  p.motor_radius = d("vehicle.motor_radius", p.motor_radius);
  p.motor_height = d("vehicle.motor_height", p.motor_height);
  p.motor_z = d("vehicle.motor_z", p.motor_z);
  p.rotor_inset = d("vehicle.rotor_inset", p.rotor_inset);
  p.module_length = d("vehicle.module_length", p.module_length);
  p.module_width = d("vehicle.module_width", p.module_width);
  p.module_height = d("vehicle.module_height", p.module_height);
  p.module_r0 = d("vehicle.module_r0", p.module_r0);
  p.module_r1 = d("vehicle.module_r1", p.module_r1);
  p.module_z = d("vehicle.module_z", p.module_z);
  p.battery_dims = vec3_or_scalar(cfg, "vehicle.battery_dims", p.battery_dims);
  p.battery_x0 = d("vehicle.battery_x0", p.battery_x0);
  p.battery_x1 = d("vehicle.battery_x1", p.battery_x1);
  p.battery_y = d("vehicle.battery_y", p.battery_y);
  p.battery_z = d("vehicle.battery_z", p.battery_z);
  p.board_dims = vec3_or_scalar(cfg, "vehicle.board_dims", p.board_dims);
  p.board_x0 = d("vehicle.board_x0", p.board_x0);
  p.board_x1 = d("vehicle.board_x1", p.board_x1);
  p.board_y = d("vehicle.board_y", p.board_y);
  p.board_z = d("vehicle.board_z", p.board_z);
  p.servo_dims = vec3_or_scalar(cfg, "vehicle.servo_dims", p.servo_dims);
  p.servo_x0 = d("vehicle.servo_x0", p.servo_x0);
  p.servo_x1 = d("vehicle.servo_x1", p.servo_x1);
  p.servo_y = d("vehicle.servo_y", p.servo_y);
  p.servo_z = d("vehicle.servo_z", p.servo_z);
  return p;
}

geometry::MorphGeometry vehicle_from_config(const config::Config& cfg) {
  return geometry::build_layout(layout_from_config(cfg));
}

nmpc::NmpcConfig nmpc_from_config(const config::Config& cfg) {
  nmpc::NmpcConfig c;
  c.horizon = cfg.get_int("controller.nmpc.horizon", c.horizon);
  c.dt = cfg.get_double("controller.nmpc.dt", c.dt);
  c.q_position = vec3_or_scalar(cfg, "controller.nmpc.q_position",
                                c.q_position);
  c.q_velocity = vec3_or_scalar(cfg, "controller.nmpc.q_velocity",
                                c.q_velocity);
  c.q_attitude = vec3_or_scalar(cfg, "controller.nmpc.q_attitude",
                                c.q_attitude);
  c.q_rates = vec3_or_scalar(cfg, "controller.nmpc.q_rates", c.q_rates);
  c.r_input = vec4_or_scalar(cfg, "controller.nmpc.r_input", c.r_input);
  c.terminal_weight_scale = cfg.get_double(
      "controller.nmpc.terminal_weight_scale", c.terminal_weight_scale);
  c.u_min = cfg.get_double("limits.u_min", c.u_min);
  c.u_max = cfg.get_double("limits.u_max", c.u_max);
  c.max_iterations =
      cfg.get_int("controller.nmpc.max_iterations", c.max_iterations);
  c.kkt_tolerance =
      cfg.get_double("controller.nmpc.kkt_tolerance", c.kkt_tolerance);
  c.integration_substeps = cfg.get_int("controller.nmpc.integration_substeps",
                                       c.integration_substeps);
  return c;
}

baselines::PidGains pid_from_config(const config::Config& cfg) {
  baselines::PidGains g;
  g.kp = vec3_or_scalar(cfg, "controller.pid.kp", g.kp);
  g.kv = vec3_or_scalar(cfg, "controller.pid.kv", g.kv);
  g.kr = vec3_or_scalar(cfg, "controller.pid.kr", g.kr);
  g.komega = vec3_or_scalar(cfg, "controller.pid.komega", g.komega);
  g.u_min = cfg.get_double("limits.u_min", g.u_min);
  g.u_max = cfg.get_double("limits.u_max", g.u_max);
  return g;
}

baselines::LqrConfig lqr_from_config(const config::Config& cfg) {
  baselines::LqrConfig c;
  c.q_state = vec12_or_scalar(cfg, "controller.lqr.q_state", c.q_state);
  c.r_wrench = vec4_or_scalar(cfg, "controller.lqr.r_wrench", c.r_wrench);
  c.dt = cfg.get_double("controller.lqr.dt", c.dt);
  c.u_min = cfg.get_double("limits.u_min", c.u_min);
  c.u_max = cfg.get_double("limits.u_max", c.u_max);
  c.max_riccati_iterations = cfg.get_int(
      "controller.lqr.max_riccati_iterations", c.max_riccati_iterations);
  c.riccati_tolerance = cfg.get_double("controller.lqr.riccati_tolerance",
                                       c.riccati_tolerance);
  return c;
}

servo::ServoParams servo_from_config(const config::Config& cfg) {
  servo::ServoParams p;
  p.time_constant = cfg.get_double("servo.time_constant", p.time_constant);
  p.rate_limit = cfg.get_double("servo.rate_limit", p.rate_limit);
  p.L_min = cfg.get_double("vehicle.length_min", p.L_min);
  p.L_max = cfg.get_double("vehicle.length_max", p.L_max);
  return p;
}

reference::Figure8Params figure8_from_config(const config::Config& cfg) {
  reference::Figure8Params p;
  p.amplitude = cfg.get_double("trajectory.amplitude", p.amplitude);
  p.speed = cfg.get_double("trajectory.speed", p.speed);
  p.altitude = cfg.get_double("trajectory.altitude", p.altitude);
  p.yaw = cfg.get_double("trajectory.yaw", p.yaw);
  p.ramp_time = cfg.get_double("trajectory.ramp_time", p.ramp_time);
  if (cfg.has("trajectory.center")) {
    const std::vector<double> c = cfg.get_list("trajectory.center");
    if (c.size() != 2) {
      throw config::ConfigError("trajectory.center: expected 2 numbers");
    }
    p.center = Eigen::Vector2d(c[0], c[1]);
  }
  return p;
}

GapSpec gap_from_config(const config::Config& cfg) {
  GapSpec g;
  g.center = vec3_or_scalar(cfg, "gap.center", g.center);
  g.axis = cfg.get_int("gap.axis", g.axis);
  g.half_depth = cfg.get_double("gap.half_depth", g.half_depth);
  g.width = cfg.get_double("gap.width", g.width);
  g.margin = cfg.get_double("gap.margin", g.margin);
  return g;
}

Scenario scenario_from_config(const config::Config& cfg) {
  Scenario sc;
  sc.name = cfg.get_string("scenario.name", sc.name);
  sc.duration = cfg.get_double("scenario.duration", sc.duration);
  sc.control_hz = cfg.get_double("scenario.control_hz", sc.control_hz);
  sc.physics_hz = cfg.get_double("scenario.physics_hz", sc.physics_hz);
  sc.controller = controller_from_name(
      cfg.get_string("scenario.controller", "nmpc"));

  sc.vehicle = vehicle_from_config(cfg);
  sc.servo = servo_from_config(cfg);
  sc.nmpc = nmpc_from_config(cfg);
  sc.pid = pid_from_config(cfg);
  sc.lqr = lqr_from_config(cfg);

  sc.initial_length =
      cfg.get_double("scenario.initial_length", sc.servo.L_max);

  const std::string type = cfg.get_string("trajectory.type", "figure8");
  if (type == "figure8") {
    sc.trajectory = reference::figure8(figure8_from_config(cfg));
  } else if (type == "hover") {
    sc.trajectory = reference::hover(
        cfg.get_vec3("trajectory.position", Eigen::Vector3d(0.0, 0.0, 1.0)),
        cfg.get_double("trajectory.yaw", 0.0));
  } else if (type == "waypoints") {
    std::vector<reference::Waypoint> wps;
    for (const std::string& key : indexed_keys(cfg, "trajectory.waypoint")) {
      const std::vector<double> v = cfg.get_list(key);
      if (v.size() != 5) {
        throw config::ConfigError("key '" + key +
                                  "': expected 't, x, y, z, yaw'");
      }
      wps.push_back({v[0], Eigen::Vector3d(v[1], v[2], v[3]), v[4]});
    }
    sc.trajectory = reference::waypoint_path(wps);
  } else {
    throw config::ConfigError("unknown trajectory type '" + type + "'");
  }

  const std::string morph = cfg.get_string("morph.mode", "hold");
  sc.morph.hold_value = cfg.get_double("morph.hold_value", sc.initial_length);
  sc.morph.low = cfg.get_double("morph.low", sc.servo.L_min);
  sc.morph.high = cfg.get_double("morph.high", sc.servo.L_max);
  sc.morph.period = cfg.get_double("morph.period", sc.morph.period);
  if (morph == "hold") {
    sc.morph.mode = MorphSchedule::Mode::Hold;
  } else if (morph == "oscillate") {
    sc.morph.mode = MorphSchedule::Mode::Oscillate;
  } else if (morph == "steps") {
    sc.morph.mode = MorphSchedule::Mode::Steps;
    for (const std::string& key : indexed_keys(cfg, "morph.step")) {
      const std::vector<double> v = cfg.get_list(key);
      if (v.size() != 2) {
        throw config::ConfigError("key '" + key +
                                  "': expected 'time, length'");
      }
      sc.morph.steps.emplace_back(v[0], v[1]);
    }
    std::sort(sc.morph.steps.begin(), sc.morph.steps.end());
  } else {
    throw config::ConfigError("unknown morph mode '" + morph + "'");
  }

  if (cfg.has("payload.mass")) {
    PayloadEvent event;
    event.attach_time = cfg.get_double("payload.attach_time", 0.0);
    event.detach_time = cfg.get_double("payload.detach_time", -1.0);
    event.payload = box_payload(
        cfg.get_double("payload.mass"),
        cfg.get_vec3("payload.dims", Eigen::Vector3d(0.19, 0.12, 0.35)),
        cfg.get_vec3("payload.position", Eigen::Vector3d(0.0, 0.0, -0.05)));
    sc.payload_events.push_back(event);
  }

  const std::string dist = cfg.get_string("disturbance.mode", "none");
  if (dist == "none") {
    sc.disturbance.mode = Disturbance::Mode::None;
  } else if (dist == "constant") {
    sc.disturbance.mode = Disturbance::Mode::Constant;
  } else if (dist == "random") {
    sc.disturbance.mode = Disturbance::Mode::Random;
  } else {
    throw config::ConfigError("unknown disturbance mode '" + dist + "'");
  }
  sc.disturbance.force =
      vec3_or_scalar(cfg, "disturbance.force", sc.disturbance.force);
  sc.disturbance.torque =
      vec3_or_scalar(cfg, "disturbance.torque", sc.disturbance.torque);
  sc.disturbance.force_std =
      cfg.get_double("disturbance.force_std", sc.disturbance.force_std);
  sc.disturbance.torque_std =
      cfg.get_double("disturbance.torque_std", sc.disturbance.torque_std);
  sc.disturbance.drag_coeff =
      cfg.get_double("disturbance.drag_coeff", sc.disturbance.drag_coeff);
  sc.disturbance.seed = static_cast<uint64_t>(
      cfg.get_int("disturbance.seed", static_cast<int>(sc.disturbance.seed)));

  return sc;
}

}  // namespace ringrotor::harness
