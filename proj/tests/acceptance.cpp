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

// End-to-end acceptance checks for the whole stack, from mass-property
// calibration through the closed-loop scenarios.  Each check prints one
// [PASS]/[FAIL] line (with supporting numbers indented below it) and the
// process exit code is the number of failed checks, so this binary doubles
// as a CI gate and as a quick health report:
//
//   ./tests/acceptance

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ringrotor/baselines.hpp"
#include "ringrotor/calibrate.hpp"
#include "ringrotor/config.hpp"
#include "ringrotor/dynamics.hpp"
#include "ringrotor/geometry.hpp"
#include "ringrotor/harness.hpp"
#include "ringrotor/nmpc.hpp"
#include "ringrotor/reference.hpp"
#include "ringrotor/servo.hpp"

using namespace ringrotor;

namespace {

// --- tiny check framework ---------------------------------------------------

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class... Args>
std::string strf(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return std::string(buf);
}

void expect(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

std::vector<std::string> g_notes;

void note(std::string line) { g_notes.push_back(std::move(line)); }

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int run_check(int index, const char* name, double budget_s,
              const std::function<void()>& body) {
  g_notes.clear();
  const auto t0 = std::chrono::steady_clock::now();
  std::string failure;
  try {
    body();
  } catch (const std::exception& ex) {
    failure = ex.what();
  }
  const double elapsed = seconds_since(t0);
  if (failure.empty() && elapsed > budget_s) {
    failure = strf("exceeded the %.0f s budget", budget_s);
  }
  std::printf("[%s] %2d. %s  (%.2f s)\n", failure.empty() ? "PASS" : "FAIL",
              index, name, elapsed);
  for (const std::string& line : g_notes) {
    std::printf("          %s\n", line.c_str());
  }
  if (!failure.empty()) {
    std::printf("          FAILURE: %s\n", failure.c_str());
  }
  std::fflush(stdout);
  return failure.empty() ? 0 : 1;
}

/// Platform-stable uniform generator, so every run sees the same layouts.
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed) {}
  double uniform() {  // [0, 1)
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

std::string shipped_config(const std::string& name) {
  return std::string(RINGROTOR_CONFIG_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  expect(in.good(), "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The calibration fit, run once and shared by the later checks.
const geometry::CalibrationResult& fitted() {
  static const geometry::CalibrationResult result =
      geometry::calibrate_layout(geometry::CalibrationTargets{});
  return result;
}

// --- 1. mass-property calibration --------------------------------------------

void check_calibration() {
  const auto t_fit = std::chrono::steady_clock::now();
  const geometry::CalibrationResult& fit = fitted();
  const double fit_time = seconds_since(t_fit);
  expect(fit_time < 60.0, strf("calibration fit took %.1f s", fit_time));

  const geometry::CalibrationTargets targets;
  const auto t_eval = std::chrono::steady_clock::now();
  const geometry::VehicleProperties large =
      geometry::total_inertia(fit.geometry, targets.L_large);
  const geometry::VehicleProperties small =
      geometry::total_inertia(fit.geometry, targets.L_small);

  double worst_rel = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double rel_l = std::abs(large.inertia(i, i) -
                                  targets.inertia_diag_large(i)) /
                         targets.inertia_diag_large(i);
    const double rel_s = std::abs(small.inertia(i, i) -
                                  targets.inertia_diag_small(i)) /
                         targets.inertia_diag_small(i);
    worst_rel = std::max({worst_rel, rel_l, rel_s});
  }
  expect(worst_rel <= 0.05,
         strf("inertia diagonal off by %.1f%% (limit 5%%)", 100.0 * worst_rel));

  const double reduction = 1.0 - small.inertia(0, 0) / large.inertia(0, 0);
  expect(std::abs(reduction - 0.621) <= 0.02,
         strf("roll-inertia reduction %.1f%% outside 62.1%% +/- 2",
              100.0 * reduction));

  const double cog_err =
      (large.r_cog - targets.r_cog).lpNorm<Eigen::Infinity>();
  expect(cog_err <= 1e-3,
         strf("center of gravity off by %.2f mm (limit 1 mm)",
              1000.0 * cog_err));
  const double eval_time = seconds_since(t_eval);
  expect(eval_time < 1.0, strf("property evaluation took %.2f s", eval_time));

  note(strf("fit %.2f s (%d iterations), evaluation %.4f s", fit_time,
            fit.iterations, eval_time));
  note(strf("worst inertia diagonal error %.2f%% (limit 5%%)",
            100.0 * worst_rel));
  note(strf("roll-inertia reduction %.1f%% (target 62.1%% +/- 2 points)",
            100.0 * reduction));
  note(strf("center-of-gravity error %.3f mm (limit 1 mm)", 1000.0 * cog_err));
}

// --- 2. morphing stroke and servo bounds --------------------------------------

void check_morphing() {
  const servo::ServoParams servo_params;
  const double reduction =
      (servo_params.L_max - servo_params.L_min) / servo_params.L_max;
  expect(std::abs(reduction - 0.314) < 5e-4,
         strf("stroke reduces the side length by %.2f%%, not 31.4%%",
              100.0 * reduction));

  // Fuzz the servo with arbitrary (often out-of-range) commands: the side
  // length must stay inside its stroke at every step of every schedule.
  Rng rng(0x5eed5eedULL);
  for (int schedule = 0; schedule < 200; ++schedule) {
    double length = rng.range(servo_params.L_min, servo_params.L_max);
    double command = rng.range(0.1, 0.6);
    for (int step = 0; step < 1000; ++step) {
      if (rng.uniform() < 0.05) command = rng.range(0.1, 0.6);
      const double rate = servo::servo_command(command, length, servo_params);
      length = servo::servo_step(length, rate, 0.01, servo_params);
      expect(length >= servo_params.L_min && length <= servo_params.L_max,
             strf("length %.6f left [%.3f, %.3f] on schedule %d",
                  length, servo_params.L_min, servo_params.L_max, schedule));
    }
  }

  // The full stroke is reachable: command the small end and wait.
  double length = servo_params.L_max;
  for (int step = 0; step < 1500; ++step) {
    const double rate =
        servo::servo_command(servo_params.L_min, length, servo_params);
    length = servo::servo_step(length, rate, 0.01, servo_params);
  }
  expect(std::abs(length - servo_params.L_min) < 1e-5,
         strf("full retraction stalled at %.6f m", length));

  note(strf("stroke %.3f -> %.3f m: %.2f%% reduction",
            servo_params.L_max, servo_params.L_min, 100.0 * reduction));
  note("200 random schedules x 1000 steps: length never left its bounds");
}

// --- 3. Monte-Carlo inertia oracle ---------------------------------------------

/// Streaming point-mass accumulator: mass, first moment and inertia about
/// the origin, shifted to the sampled center of mass at the end.
struct MomentAccumulator {
  double mass = 0.0;
  Eigen::Vector3d first = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();

  void add(const Eigen::Vector3d& p, double m) {
    mass += m;
    first += m * p;
    second += m * (p.squaredNorm() * Eigen::Matrix3d::Identity() -
                   p * p.transpose());
  }
  Eigen::Vector3d cog() const { return first / mass; }
  Eigen::Matrix3d inertia_about_cog() const {
    const Eigen::Vector3d c = cog();
    return second - mass * (c.squaredNorm() * Eigen::Matrix3d::Identity() -
                            c * c.transpose());
  }
};

Eigen::Vector3d sample_cuboid(Rng& rng, const Eigen::Vector3d& dims) {
  return {dims.x() * (rng.uniform() - 0.5), dims.y() * (rng.uniform() - 0.5),
          dims.z() * (rng.uniform() - 0.5)};
}

Eigen::Vector3d sample_cylinder(Rng& rng, double radius, double height) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi),
          height * (rng.uniform() - 0.5)};
}

/// Rejection sample inside a module solid (outer cuboid minus cutouts);
/// valid because the generated cutout masses are density-consistent.
Eigen::Vector3d sample_module(Rng& rng, const geometry::ComponentSpec& spec) {
  for (;;) {
    const Eigen::Vector3d p = sample_cuboid(rng, spec.dims);
    bool inside_cut = false;
    for (const geometry::CutoutCuboid& cut : spec.cutouts) {
      const Eigen::Vector3d d = (p - cut.offset).cwiseAbs();
      if ((d.array() < 0.5 * cut.dims.array()).all()) {
        inside_cut = true;
        break;
      }
    }
    if (!inside_cut) return p;
  }
}

void sample_component(Rng& rng, const geometry::ComponentSpec& spec, double L,
                      int n, MomentAccumulator& acc) {
  const Eigen::Matrix3d R = geometry::rotation_z(spec.yaw);
  const Eigen::Vector3d mount = spec.mount.at(L);
  const double m = spec.mass / n;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d local;
    switch (spec.kind) {
      case geometry::ComponentKind::MotorCylinder:
        local = sample_cylinder(rng, spec.radius, spec.height);
        break;
      case geometry::ComponentKind::Cuboid:
        local = sample_cuboid(rng, spec.dims);
        break;
      case geometry::ComponentKind::ModuleComposite:
        local = sample_module(rng, spec);
        break;
    }
    acc.add(R * local + mount, m);
  }
}

/// A randomized but physically valid vehicle: two central cuboids, four
/// motor cylinders on affine ring mounts, and one frame module with two
/// density-consistent pockets carved out of it.
geometry::MorphGeometry random_layout(Rng& rng) {
  geometry::MorphGeometry geo;
  geo.L_min = 0.284;
  geo.L_max = 0.414;
  geo.k_t = 7.19544e-9;
  geo.k_c = 1.07932e-10;

  geometry::ComponentSpec core;
  core.name = "core";
  core.kind = geometry::ComponentKind::Cuboid;
  core.mass = rng.range(0.3, 0.7);
  core.dims = {rng.range(0.05, 0.15), rng.range(0.05, 0.15),
               rng.range(0.05, 0.15)};
  core.mount.base = {rng.range(-0.03, 0.03), rng.range(-0.03, 0.03),
                     rng.range(-0.03, 0.03)};
  core.yaw = rng.range(0.0, 2.0 * std::numbers::pi);
  geo.components.push_back(core);

  geometry::ComponentSpec pack;
  pack.name = "pack";
  pack.kind = geometry::ComponentKind::Cuboid;
  pack.mass = rng.range(0.1, 0.3);
  pack.dims = {rng.range(0.03, 0.08), rng.range(0.03, 0.08),
               rng.range(0.03, 0.08)};
  pack.mount.base = {rng.range(-0.05, 0.05), rng.range(-0.05, 0.05),
                     rng.range(-0.05, 0.05)};
  pack.mount.direction = {rng.range(-0.4, 0.4), rng.range(-0.4, 0.4),
                          rng.range(-0.2, 0.2)};
  pack.yaw = rng.range(0.0, 2.0 * std::numbers::pi);
  geo.components.push_back(pack);

  for (int j = 0; j < 4; ++j) {
    const double sx = (j == 0 || j == 3) ? 1.0 : -1.0;
    const double sy = (j <= 1) ? 1.0 : -1.0;
    geometry::ComponentSpec motor;
    motor.name = "motor" + std::to_string(j);
    motor.kind = geometry::ComponentKind::MotorCylinder;
    motor.mass = rng.range(0.03, 0.06);
    motor.radius = rng.range(0.010, 0.020);
    motor.height = rng.range(0.02, 0.04);
    motor.mount.direction = {sx * rng.range(0.35, 0.60),
                             sy * rng.range(0.35, 0.60), 0.0};
    motor.mount.base = {0.0, 0.0, rng.range(-0.04, 0.0)};
    geo.components.push_back(motor);
    geo.rotor_mounts[j] = motor.mount;
  }

  geometry::ComponentSpec mod;
  mod.name = "module";
  mod.kind = geometry::ComponentKind::ModuleComposite;
  mod.dims = {rng.range(0.04, 0.08), rng.range(0.20, 0.30),
              rng.range(0.03, 0.05)};
  const double density = rng.range(300.0, 900.0);
  const double outer_mass = density * mod.dims.prod();
  double carved = 0.0;
  for (const double side : {1.0, -1.0}) {
    geometry::CutoutCuboid cut;
    cut.dims = {rng.range(0.30, 0.45) * mod.dims.x(),
                rng.range(0.30, 0.45) * mod.dims.y(),
                rng.range(0.30, 0.45) * mod.dims.z()};
    cut.offset = {rng.range(-0.05, 0.05) * mod.dims.x(),
                  side * 0.25 * mod.dims.y(),
                  rng.range(-0.05, 0.05) * mod.dims.z()};
    cut.mass = outer_mass * cut.dims.prod() / mod.dims.prod();
    carved += cut.mass;
    mod.cutouts.push_back(cut);
  }
  mod.mass = outer_mass - carved;
  mod.mount.base = {rng.range(-0.02, 0.02), rng.range(-0.02, 0.02),
                    rng.range(-0.02, 0.02)};
  mod.mount.direction = {rng.range(0.2, 0.8), rng.range(-0.3, 0.3), 0.0};
  mod.yaw = rng.range(0.0, 2.0 * std::numbers::pi);
  geo.components.push_back(mod);

  return geo;
}

void check_inertia_oracle() {
  Rng rng(0x0a11ce5ULL);
  const int samples_per_component = 500'000;
  double worst_diag = 0.0, worst_offdiag = 0.0, worst_cog = 0.0;

  for (int layout = 0; layout < 20; ++layout) {
    const geometry::MorphGeometry geo = random_layout(rng);
    const double L = rng.range(geo.L_min, geo.L_max);
    const geometry::VehicleProperties props = geometry::total_inertia(geo, L);

    MomentAccumulator acc;
    for (const geometry::ComponentSpec& spec : geo.components) {
      sample_component(rng, spec, L, samples_per_component, acc);
    }
    const Eigen::Vector3d cog_mc = acc.cog();
    const Eigen::Matrix3d J_mc = acc.inertia_about_cog();

    const double cog_err = (props.r_cog - cog_mc).norm();
    worst_cog = std::max(worst_cog, cog_err);
    expect(cog_err <= std::max(1e-3, 0.01 * cog_mc.norm()),
           strf("layout %d: COG off by %.2f mm", layout, 1000.0 * cog_err));

    const double scale = J_mc.diagonal().maxCoeff();
    for (int i = 0; i < 3; ++i) {
      const double rel = std::abs(props.inertia(i, i) - J_mc(i, i)) /
                         std::abs(J_mc(i, i));
      worst_diag = std::max(worst_diag, rel);
      expect(rel <= 0.01, strf("layout %d: J(%d,%d) off by %.2f%%", layout, i,
                               i, 100.0 * rel));
      for (int j = i + 1; j < 3; ++j) {
        const double rel_off = std::abs(props.inertia(i, j) - J_mc(i, j)) /
                               scale;
        worst_offdiag = std::max(worst_offdiag, rel_off);
        expect(rel_off <= 0.01,
               strf("layout %d: J(%d,%d) off by %.2f%% of the largest moment",
                    layout, i, j, 100.0 * rel_off));
      }
    }
  }

  note(strf("20 layouts x %d samples/component", samples_per_component));
  note(strf("worst diagonal error %.3f%%, worst off-diagonal %.3f%% (limit 1%%)",
            100.0 * worst_diag, 100.0 * worst_offdiag));
  note(strf("worst center-of-gravity error %.3f mm", 1000.0 * worst_cog));
}

// --- 4. integrator order and invariants ---------------------------------------

void check_integrator() {
  const geometry::VehicleProperties props =
      geometry::total_inertia(fitted().geometry, 0.414);

  // Fourth-order convergence on an aggressive tumble under unequal thrusts;
  // a dt = 1e-5 run stands in for the exact solution.
  dynamics::State x0;
  x0.position = {0.4, -0.2, 1.3};
  x0.velocity = {0.6, -0.3, 0.2};
  x0.orientation = Eigen::Quaterniond(0.9, 0.2, -0.3, 0.15).normalized();
  x0.rates = {6.0, -5.0, 4.0};
  const dynamics::Thrusts u(6.0, 0.5, 5.0, 0.8);

  const auto propagate = [&](double dt, int steps) {
    dynamics::State x = x0;
    for (int i = 0; i < steps; ++i) x = dynamics::step_rk4(x, u, props, {}, dt);
    return x;
  };
  const dynamics::State ref = propagate(1e-5, 100'000);
  const auto error_at = [&](double dt, int steps) {
    return dynamics::local_error(propagate(dt, steps), ref).norm();
  };
  const double e0 = error_at(2e-3, 500);
  const double e1 = error_at(1e-3, 1000);
  const double e2 = error_at(5e-4, 2000);
  const double r01 = e0 / e1;
  const double r12 = e1 / e2;
  expect(r01 > 12.0 && r01 < 20.0,
         strf("error ratio %.1f for dt 2e-3 -> 1e-3 (want 12-20)", r01));
  expect(r12 > 12.0 && r12 < 20.0,
         strf("error ratio %.1f for dt 1e-3 -> 5e-4 (want 12-20)", r12));

  // Torque-free spin for 10 s: rotational energy and momentum magnitude
  // are invariants; the unit quaternion never drifts.
  dynamics::State x;
  x.position = {0.0, 0.0, 1.0};
  x.rates = {2.0, -1.5, 1.0};
  const Eigen::Matrix3d& J = props.inertia;
  const double energy0 = 0.5 * x.rates.dot(J * x.rates);
  const double momentum0 = (J * x.rates).norm();
  double max_energy = 0.0, max_momentum = 0.0, max_drift = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    x = dynamics::step_rk4(x, dynamics::Thrusts::Zero(), props, {}, 1e-4);
    max_energy = std::max(
        max_energy, std::abs(0.5 * x.rates.dot(J * x.rates) - energy0) /
                        energy0);
    max_momentum = std::max(
        max_momentum, std::abs((J * x.rates).norm() - momentum0) / momentum0);
    max_drift = std::max(max_drift, std::abs(x.orientation.norm() - 1.0));
  }
  expect(max_energy < 1e-6,
         strf("kinetic energy drifted by %.2e (limit 1e-6)", max_energy));
  expect(max_momentum < 1e-6,
         strf("momentum magnitude drifted by %.2e (limit 1e-6)", max_momentum));
  expect(max_drift < 1e-9,
         strf("quaternion norm drifted by %.2e per step (limit 1e-9)",
              max_drift));

  note(strf("step-halving error ratios %.1fx and %.1fx (fourth order: ~16x)",
            r01, r12));
  note(strf("10 s torque-free spin: energy %.1e, momentum %.1e, "
            "quaternion norm %.1e",
            max_energy, max_momentum, max_drift));
}

// --- 5. predictive solver -------------------------------------------------------

/// Plain linear-time-invariant model in ordinary vector coordinates.
class LtiModel : public nmpc::OcpModel {
 public:
  LtiModel(Eigen::MatrixXd A, Eigen::MatrixXd B)
      : A_(std::move(A)), B_(std::move(B)) {}

  int state_size() const override { return static_cast<int>(A_.rows()); }
  int tangent_size() const override { return static_cast<int>(A_.rows()); }
  int input_size() const override { return static_cast<int>(B_.cols()); }

  Eigen::VectorXd step(const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) const override {
    return A_ * x + B_ * u;
  }

 private:
  Eigen::MatrixXd A_;
  Eigen::MatrixXd B_;
};

nmpc::ReferenceWindow hover_window(const geometry::VehicleProperties& props,
                                   const nmpc::NmpcConfig& config,
                                   const Eigen::Vector3d& position) {
  nmpc::ReferenceWindow ref;
  dynamics::State x;
  x.position = position;
  ref.states.assign(config.horizon + 1, x);
  ref.thrusts.assign(config.horizon, nmpc::hover_thrusts(props));
  return ref;
}

void check_nmpc() {
  const geometry::VehicleProperties props =
      geometry::total_inertia(fitted().geometry, 0.414);

  // (a) hover fixed point: the solver carries the weight with zero torque.
  {
    nmpc::NmpcConfig config;
    dynamics::State x;
    x.position = {0.0, 0.0, 1.0};
    const nmpc::NmpcSolution sol =
        nmpc::solve(x, hover_window(props, config, x.position), props, config);
    const double total = sol.inputs[0].sum();
    const Eigen::Vector4d wrench = props.allocation * sol.inputs[0];
    expect(std::abs(total - 1.665 * 9.81) <= 1e-6,
           strf("hover thrust %.8f N, want 16.33365 N within 1e-6", total));
    expect(wrench.tail<3>().lpNorm<Eigen::Infinity>() <= 1e-6,
           strf("hover torque %.2e N m, want zero",
                wrench.tail<3>().lpNorm<Eigen::Infinity>()));
    note(strf("hover: total thrust %.7f N (m g = %.7f), torque %.1e N m",
              total, 1.665 * 9.81, wrench.tail<3>().lpNorm<Eigen::Infinity>()));
  }

  // (b) the analytic linearization agrees with central finite differences.
  {
    dynamics::State x;
    x.position = {0.3, -0.1, 1.2};
    x.velocity = {0.5, 0.2, -0.3};
    x.orientation = Eigen::Quaterniond(0.95, 0.15, -0.2, 0.1).normalized();
    x.rates = {0.8, -0.6, 0.4};
    const dynamics::Thrusts u(3.2, 4.1, 3.7, 4.4);
    const double dt = 0.05, h = 1e-6;
    const nmpc::LinearizedStep lin =
        nmpc::linearize_dynamics(x, u, props, {}, dt);
    const dynamics::State anchor = dynamics::step_rk4(x, u, props, {}, dt);

    Eigen::Matrix<double, 12, 12> A_fd;
    for (int i = 0; i < 12; ++i) {
      Eigen::Matrix<double, 12, 1> d = Eigen::Matrix<double, 12, 1>::Zero();
      d(i) = h;
      const dynamics::State hi =
          dynamics::step_rk4(dynamics::retract(x, d), u, props, {}, dt);
      d(i) = -h;
      const dynamics::State lo =
          dynamics::step_rk4(dynamics::retract(x, d), u, props, {}, dt);
      A_fd.col(i) = (dynamics::local_error(hi, anchor) -
                     dynamics::local_error(lo, anchor)) /
                    (2.0 * h);
    }
    Eigen::Matrix<double, 12, 4> B_fd;
    for (int i = 0; i < 4; ++i) {
      dynamics::Thrusts hi_u = u, lo_u = u;
      hi_u(i) += h;
      lo_u(i) -= h;
      const dynamics::State hi = dynamics::step_rk4(x, hi_u, props, {}, dt);
      const dynamics::State lo = dynamics::step_rk4(x, lo_u, props, {}, dt);
      B_fd.col(i) = (dynamics::local_error(hi, anchor) -
                     dynamics::local_error(lo, anchor)) /
                    (2.0 * h);
    }
    const double err_a = (A_fd - lin.A).norm() / lin.A.norm();
    const double err_b = (B_fd - lin.B).norm() / lin.B.norm();
    expect(err_a < 1e-4, strf("state Jacobian off by %.2e relative", err_a));
    expect(err_b < 1e-4, strf("input Jacobian off by %.2e relative", err_b));
    note(strf("finite-difference Jacobians: state %.1e, input %.1e relative",
              err_a, err_b));
  }

  // (c) the generic solver reproduces the finite-horizon Riccati optimum
  //     on an unconstrained double integrator.
  {
    const double dt = 0.1;
    Eigen::MatrixXd A(2, 2), B(2, 1);
    A << 1.0, dt, 0.0, 1.0;
    B << 0.5 * dt * dt, dt;
    const LtiModel model(A, B);
    const int N = 20;
    nmpc::OcpWeights weights;
    weights.Q = Eigen::Vector2d(5.0, 1.0);
    weights.R = Eigen::VectorXd::Constant(1, 0.5);
    weights.QN = Eigen::Vector2d(50.0, 10.0);
    nmpc::SqpSettings settings;
    settings.u_lo = Eigen::VectorXd::Constant(1, -1e9);
    settings.u_hi = Eigen::VectorXd::Constant(1, 1e9);
    nmpc::OcpReference ref;
    ref.x.assign(N + 1, Eigen::VectorXd::Zero(2));
    ref.u.assign(N, Eigen::VectorXd::Zero(1));
    const Eigen::Vector2d x0(1.0, 0.5);
    const nmpc::OcpSolution sol =
        nmpc::solve_ocp(model, weights, x0, ref, settings);

    // Independent optimum from the backward Riccati sweep.
    std::vector<Eigen::MatrixXd> K(N);
    Eigen::MatrixXd P = weights.QN.asDiagonal();
    const Eigen::MatrixXd Qm = weights.Q.asDiagonal();
    const Eigen::MatrixXd Rm = weights.R.asDiagonal();
    for (int k = N - 1; k >= 0; --k) {
      const Eigen::MatrixXd S = Rm + B.transpose() * P * B;
      K[k] = S.ldlt().solve(B.transpose() * P * A);
      P = Qm + A.transpose() * P * (A - B * K[k]);
    }
    Eigen::VectorXd xk = x0;
    double worst = 0.0;
    for (int k = 0; k < N; ++k) {
      const Eigen::VectorXd uk = -K[k] * xk;
      worst = std::max(worst, std::abs(sol.u[k](0) - uk(0)));
      xk = A * xk + B * uk;
    }
    expect(worst < 1e-6,
           strf("linear toy problem off the Riccati optimum by %.2e", worst));
    note(strf("double integrator vs Riccati sweep: worst input gap %.1e",
              worst));
  }

  // (d) a saturating climb respects the thrust box exactly.
  {
    nmpc::NmpcConfig config;
    config.max_iterations = 60;  // one-shot solve, not a warm-started tick
    dynamics::State x;
    x.position = {0.0, 0.0, 1.0};
    const nmpc::NmpcSolution sol = nmpc::solve(
        x, hover_window(props, config, {0.0, 0.0, 2.5}), props, config);
    expect(sol.kkt_residual <= config.kkt_tolerance,
           strf("climb solve did not converge (KKT %.2e)", sol.kkt_residual));
    int at_max = 0;
    for (const dynamics::Thrusts& uk : sol.inputs) {
      for (int i = 0; i < 4; ++i) {
        expect(uk(i) >= config.u_min && uk(i) <= config.u_max,
               strf("input %.9f escaped [%.2f, %.2f]", uk(i), config.u_min,
                    config.u_max));
        if (uk(i) == config.u_max) ++at_max;
      }
    }
    expect(at_max > 0, "no input sits exactly on the upper bound");
    note(strf("saturating climb: %d inputs pinned exactly at %.1f N, "
              "none outside the box",
              at_max, config.u_max));
  }

  // (e) warm-started re-solve of the unchanged problem is immediate.
  {
    nmpc::NmpcConfig config;
    config.max_iterations = 60;
    dynamics::State x;
    x.position = {0.2, -0.1, 1.0};
    x.velocity = {0.3, 0.0, -0.1};
    const nmpc::ReferenceWindow ref =
        hover_window(props, config, {0.0, 0.0, 1.0});
    const nmpc::NmpcSolution cold = nmpc::solve(x, ref, props, config);
    expect(cold.kkt_residual <= config.kkt_tolerance, "cold solve stalled");
    const nmpc::NmpcSolution warm =
        nmpc::solve(x, ref, props, config, {}, &cold);
    expect(warm.iterations <= 1,
           strf("warm re-solve took %d iterations", warm.iterations));
    note(strf("warm re-solve: %d iteration(s) after a %d-iteration cold solve",
              warm.iterations, cold.iterations));
  }
}

// --- 6. controller benchmark -----------------------------------------------------

void check_benchmark() {
  const config::Config cfg =
      config::Config::from_file(shipped_config("figure8_bench.cfg"));
  const std::vector<harness::ComparisonRow> rows =
      harness::compare_controllers(cfg);
  expect(rows.size() == 9, strf("expected 9 sweep rows, got %zu", rows.size()));

  std::map<std::pair<std::string, double>, double> rmse;
  for (const harness::ComparisonRow& row : rows) {
    expect(row.ok, row.controller + " run failed: " + row.error);
    rmse[{row.controller, row.speed}] = row.metrics.rmse_position;
  }

  const std::vector<double> speeds = {1.5, 2.0, 2.5};
  for (const double v : speeds) {
    note(strf("v = %.1f m/s: rmse nmpc %.5f  lqr %.5f  pid %.3f", v,
              rmse[{"nmpc", v}], rmse[{"lqr", v}], rmse[{"pid", v}]));
    expect(rmse[{"nmpc", v}] <= rmse[{"lqr", v}],
           strf("at v=%.1f: nmpc rmse above lqr", v));
    expect(rmse[{"lqr", v}] <= rmse[{"pid", v}],
           strf("at v=%.1f: lqr rmse above pid", v));
  }
  for (const std::string c : {"nmpc", "lqr", "pid"}) {
    expect(rmse[{c, 1.5}] < rmse[{c, 2.0}] && rmse[{c, 2.0}] < rmse[{c, 2.5}],
           c + ": rmse does not grow monotonically with speed");
  }
  note("ordering nmpc <= lqr <= pid holds at every speed; "
       "each controller degrades monotonically with speed");
}

// --- 7. thrust saturation ---------------------------------------------------------

void check_saturation() {
  const config::Config cfg =
      config::Config::from_file(shipped_config("figure8_sat.cfg"));
  const harness::Scenario sc = harness::scenario_from_config(cfg);
  const harness::RunResult run = harness::run_scenario(sc);

  int ticks_at_max = 0;
  double hardest = 0.0;
  for (const harness::LogRow& row : run.log) {
    for (int i = 0; i < 4; ++i) {
      const double u = row.thrusts(i);
      expect(u >= sc.nmpc.u_min && u <= sc.nmpc.u_max,
             strf("thrust %.9f N outside [%.2f, %.2f] at t=%.2f", u,
                  sc.nmpc.u_min, sc.nmpc.u_max, row.t));
      hardest = std::max(hardest, u);
    }
    if ((row.thrusts.array() == sc.nmpc.u_max).any()) ++ticks_at_max;
  }
  expect(ticks_at_max > 0, "no rotor ever reached the 6.5 N ceiling");
  expect(hardest == sc.nmpc.u_max,
         strf("peak thrust %.9f N never hit the cap exactly", hardest));

  note(strf("%d of %zu ticks have a rotor pinned at %.1f N "
            "(saturation fraction %.2f)",
            ticks_at_max, run.log.size(), sc.nmpc.u_max,
            run.metrics.saturation_fraction));
  note(strf("tracking rmse %.3f m under saturation, zero bound violations",
            run.metrics.rmse_position));
}

// --- 8. grasp and transport --------------------------------------------------------

void check_grasp() {
  const config::Config cfg =
      config::Config::from_file(shipped_config("grasp_transport.cfg"));
  const harness::Scenario sc = harness::scenario_from_config(cfg);
  expect(sc.payload_events.size() == 1, "scenario lost its payload event");
  const harness::RunResult run = harness::run_scenario(sc);
  const harness::PayloadEvent& event = sc.payload_events[0];

  const harness::GraspResult g = harness::evaluate_grasp(run, event);
  expect(g.relative_error <= 0.01,
         strf("collective step %.4f N vs expected %.4f N (%.2f%% off)",
              g.delta, g.expected, 100.0 * g.relative_error));

  // After release the collective returns to its pre-grasp value.
  double sum_after = 0.0;
  int n_after = 0;
  for (const harness::LogRow& row : run.log) {
    if (row.t >= event.detach_time + 1.5 && row.t < event.detach_time + 2.5) {
      sum_after += row.thrusts.sum();
      ++n_after;
    }
  }
  expect(n_after > 0, "log does not cover the release transient");
  const double restored = sum_after / n_after;
  const double restore_err = std::abs(restored - g.thrust_before) /
                             g.thrust_before;
  expect(restore_err <= 0.01,
         strf("post-release collective %.4f N vs %.4f N before grasping",
              restored, g.thrust_before));

  // The altitude transient dies out within the scenario.
  double final_err = 0.0;
  for (const harness::LogRow& row : run.log) {
    if (row.t >= sc.duration - 1.0) {
      final_err = std::max(final_err,
                           std::abs(row.state.position.z() -
                                    row.reference.position.z()));
    }
  }
  expect(final_err < 5e-3,
         strf("altitude still %.1f mm off in the final second",
              1000.0 * final_err));

  note(strf("collective: %.4f N -> %.4f N on attach (step %.4f N, "
            "expected %.4f N, %.2f%% off)",
            g.thrust_before, g.thrust_after, g.delta, g.expected,
            100.0 * g.relative_error));
  note(strf("release restores %.4f N (%.2f%% off); worst sag %.1f mm; "
            "final-second altitude error %.2f mm",
            restored, 100.0 * restore_err, 1000.0 * g.max_height_drop,
            1000.0 * final_err));
}

// --- 9. narrow-gap crossing ---------------------------------------------------------

void check_gap() {
  const config::Config cfg =
      config::Config::from_file(shipped_config("gap_crossing.cfg"));
  const harness::Scenario sc = harness::scenario_from_config(cfg);
  const harness::GapSpec gap = harness::gap_from_config(cfg);

  const harness::RunResult morphing = harness::run_scenario(sc);
  const harness::GapResult with_morph =
      harness::evaluate_gap(morphing.log, gap);
  expect(with_morph.traversed, "morphing run never crossed the slot");
  expect(with_morph.max_length_inside <= 0.30,
         strf("frame was %.3f m wide inside the slot (want <= 0.30)",
              with_morph.max_length_inside));
  expect(with_morph.success, "morphing run failed the clearance check");

  harness::Scenario rigid = sc;
  rigid.morph = harness::MorphSchedule{};  // hold full size
  const harness::RunResult held = harness::run_scenario(rigid);
  const harness::GapResult no_morph = harness::evaluate_gap(held.log, gap);
  expect(!no_morph.success, "full-size run should not fit the 0.40 m slot");

  note(strf("morphing: %.3f m wide inside the %.2f m slot, clearance %+.3f m "
            "-> success",
            with_morph.max_length_inside, gap.width, with_morph.clearance));
  note(strf("held at full size: %.3f m wide, clearance %+.3f m -> failure",
            no_morph.max_length_inside, no_morph.clearance));
}

// --- 10. determinism -----------------------------------------------------------------

void check_determinism() {
  const config::Config cfg =
      config::Config::from_file(shipped_config("hover.cfg"));
  harness::Scenario sc = harness::scenario_from_config(cfg);
  sc.duration = 5.0;
  sc.disturbance.mode = harness::Disturbance::Mode::Random;
  sc.disturbance.force_std = 0.4;
  sc.disturbance.torque_std = 0.02;
  sc.disturbance.seed = 42;

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ringrotor_acceptance";
  fs::create_directories(dir);
  const std::string path_a = (dir / "run_a.csv").string();
  const std::string path_b = (dir / "run_b.csv").string();

  const harness::RunResult a = harness::run_scenario(sc);
  const harness::RunResult b = harness::run_scenario(sc);
  harness::write_trajectory_csv(path_a, a.log);
  harness::write_trajectory_csv(path_b, b.log);
  const std::string text_a = slurp(path_a);
  const std::string text_b = slurp(path_b);
  fs::remove_all(dir);

  expect(!text_a.empty(), "first run produced an empty log");
  expect(text_a == text_b, "re-run with the same seed produced a different log");
  expect(a.metrics.rmse_position > 0.0,
         "disturbance had no effect; determinism check is vacuous");

  note(strf("two 5 s disturbed runs, seed %llu: %zu rows, logs byte-identical",
            static_cast<unsigned long long>(sc.disturbance.seed),
            a.log.size()));
  note(strf("disturbed tracking rmse %.4f m (noise really is injected)",
            a.metrics.rmse_position));
}

}  // namespace

int main() {
  std::printf("ringrotor acceptance checks\n");
  std::printf("---------------------------\n");
  int failures = 0;
  failures += run_check(1, "calibrated layout reproduces the measured mass"
                           " properties", 61.0, check_calibration);
  failures += run_check(2, "morphing stroke is 31.4% and the servo respects"
                           " its bounds", 1.0, check_morphing);
  failures += run_check(3, "analytic mass properties match Monte-Carlo"
                           " volume integrals", 120.0, check_inertia_oracle);
  failures += run_check(4, "integrator shows fourth-order convergence and"
                           " conserves invariants", 60.0, check_integrator);
  failures += run_check(5, "predictive solver: equilibrium, sensitivities,"
                           " optimality, bounds, warm start", 120.0,
                        check_nmpc);
  failures += run_check(6, "figure-8 benchmark: nmpc <= lqr <= pid, errors"
                           " grow with speed", 300.0, check_benchmark);
  failures += run_check(7, "aggressive tracking rides the thrust ceiling"
                           " without violations", 60.0, check_saturation);
  failures += run_check(8, "grasped payload shifts the steady collective"
                           " thrust by its weight", 60.0, check_grasp);
  failures += run_check(9, "narrow slot is passable only with morphing",
                        60.0, check_gap);
  failures += run_check(10, "equal seeds reproduce the trajectory log"
                            " byte-for-byte", 60.0, check_determinism);

  std::printf("---------------------------\n");
  std::printf("%d/10 checks passed\n", 10 - failures);
  return failures;
}
