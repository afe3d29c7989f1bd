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

/// Command-line front end: run a scenario, sweep the controller comparison,
/// or re-fit the vehicle layout to the mass-property targets.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ringrotor/calibrate.hpp"
#include "ringrotor/config.hpp"
#include "ringrotor/harness.hpp"

namespace {

std::string default_config_path() {
#ifdef RINGROTOR_CONFIG_DIR
  return std::string(RINGROTOR_CONFIG_DIR) + "/ringrotor_default.cfg";
#else
  return "configs/ringrotor_default.cfg";
#endif
}

void print_metrics(const ringrotor::harness::Metrics& m) {
  std::printf("samples            %zu\n", m.samples);
  std::printf("mean position err  %.5f m\n", m.mean_position_error);
  std::printf("rmse position      %.5f m\n", m.rmse_position);
  std::printf("max position err   %.5f m\n", m.max_position_error);
  std::printf("rmse per axis      %.5f %.5f %.5f m\n", m.rmse_axes.x(),
              m.rmse_axes.y(), m.rmse_axes.z());
  std::printf("saturation         %.1f%% of ticks\n",
              100.0 * m.saturation_fraction);
  if (m.mean_solve_time > 0.0) {
    std::printf("solver time        %.3f ms mean / %.3f ms max\n",
                1e3 * m.mean_solve_time, 1e3 * m.max_solve_time);
    std::printf("solver iterations  %.2f mean / %d max\n", m.mean_iterations,
                m.max_iterations);
  }
}

/// Machine-readable run summary: one `key = value` per line, full
/// precision, loadable with the same config reader.
void write_metrics_kv(const std::string& path,
                      const ringrotor::harness::Metrics& m,
                      double final_length) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::fprintf(f, "samples = %zu\n", m.samples);
  std::fprintf(f, "mean_position_error = %.17g\n", m.mean_position_error);
  std::fprintf(f, "rmse_position = %.17g\n", m.rmse_position);
  std::fprintf(f, "max_position_error = %.17g\n", m.max_position_error);
  std::fprintf(f, "rmse_x = %.17g\n", m.rmse_axes.x());
  std::fprintf(f, "rmse_y = %.17g\n", m.rmse_axes.y());
  std::fprintf(f, "rmse_z = %.17g\n", m.rmse_axes.z());
  std::fprintf(f, "rmse_velocity = %.17g\n", m.rmse_velocity);
  std::fprintf(f, "saturation_fraction = %.17g\n", m.saturation_fraction);
  std::fprintf(f, "mean_solve_time = %.17g\n", m.mean_solve_time);
  std::fprintf(f, "max_solve_time = %.17g\n", m.max_solve_time);
  std::fprintf(f, "mean_iterations = %.17g\n", m.mean_iterations);
  std::fprintf(f, "max_iterations = %d\n", m.max_iterations);
  std::fprintf(f, "final_length = %.17g\n", final_length);
  std::fclose(f);
}

/// The fitted layout as a config [vehicle] section, ready to paste or
/// include.
void write_layout_config(const std::string& path,
                         const ringrotor::geometry::LayoutParams& p) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot write " + path);
  std::fprintf(f, "# Calibrated vehicle layout\n[vehicle]\n");
  const auto kv = [f](const char* key, double v) {
    std::fprintf(f, "%s = %.17g\n", key, v);
  };
  const auto kv3 = [f](const char* key, const Eigen::Vector3d& v) {
    std::fprintf(f, "%s = %.17g, %.17g, %.17g\n", key, v.x(), v.y(), v.z());
  };
  kv("total_mass", p.total_mass);
  kv("k_t", p.k_t);
  kv("k_c", p.k_c);
  kv("length_min", p.L_min);
  kv("length_max", p.L_max);
  kv("motor_mass", p.motor_mass);
  kv("battery_mass", p.battery_mass);
  kv("servo_mass", p.servo_mass);
  kv("board_mass", p.board_mass);
  kv("motor_radius", p.motor_radius);
  kv("motor_height", p.motor_height);
  kv("motor_z", p.motor_z);
  kv("rotor_inset", p.rotor_inset);
  kv("module_length", p.module_length);
  kv("module_width", p.module_width);
  kv("module_height", p.module_height);
  kv("module_r0", p.module_r0);
  kv("module_r1", p.module_r1);
  kv("module_z", p.module_z);
  kv3("battery_dims", p.battery_dims);
  kv("battery_x0", p.battery_x0);
  kv("battery_x1", p.battery_x1);
  kv("battery_y", p.battery_y);
  kv("battery_z", p.battery_z);
  kv3("board_dims", p.board_dims);
  kv("board_x0", p.board_x0);
  kv("board_x1", p.board_x1);
  kv("board_y", p.board_y);
  kv("board_z", p.board_z);
  kv3("servo_dims", p.servo_dims);
  kv("servo_x0", p.servo_x0);
  kv("servo_x1", p.servo_x1);
  kv("servo_y", p.servo_y);
  kv("servo_z", p.servo_z);
  std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ringrotor;

  CLI::App app{"ringrotor: size-morphing quadrotor simulation and control"};
  app.require_subcommand(1);

  std::string config_path = default_config_path();
  std::string out_dir = "out";
  std::string controller;
  int seed = -1;
  double physics_hz = 0.0;
  double duration = 0.0;
  double speed = 0.0;

  CLI::App* run = app.add_subcommand("run", "Run one closed-loop scenario");
  run->add_option("--config", config_path, "Scenario configuration file")
      ->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  CLI::Option* opt_controller = run->add_option(
      "--controller", controller, "Controller override: pid, lqr or nmpc");
  CLI::Option* opt_seed =
      run->add_option("--seed", seed, "Disturbance noise seed override");
  CLI::Option* opt_physics_hz = run->add_option(
      "--physics-hz", physics_hz, "Plant integration rate [Hz]");
  CLI::Option* opt_duration =
      run->add_option("--duration", duration, "Scenario length override [s]");
  CLI::Option* opt_speed = run->add_option(
      "--speed", speed, "Reference peak speed override [m/s]");

  CLI::App* cmp = app.add_subcommand(
      "compare", "Sweep controllers and speeds on the benchmark trajectory");
  cmp->add_option("--config", config_path, "Benchmark configuration file")
      ->capture_default_str();
  cmp->add_option("--out", out_dir, "Output directory")->capture_default_str();

  CLI::App* cal = app.add_subcommand(
      "calibrate", "Fit the layout to the measured mass properties");
  cal->add_option("--out", out_dir, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      config::Config cfg = config::Config::from_file(config_path);
      // Forward overrides verbatim whenever the flag was given, so bad
      // values fail scenario validation instead of being dropped.
      if (opt_controller->count() > 0) {
        cfg.set("scenario.controller", controller);
      }
      if (opt_seed->count() > 0) {
        cfg.set("disturbance.seed", std::to_string(seed));
      }
      char buf[64];
      if (opt_physics_hz->count() > 0) {
        std::snprintf(buf, sizeof(buf), "%.17g", physics_hz);
        cfg.set("scenario.physics_hz", buf);
      }
      if (opt_duration->count() > 0) {
        std::snprintf(buf, sizeof(buf), "%.17g", duration);
        cfg.set("scenario.duration", buf);
      }
      if (opt_speed->count() > 0) {
        std::snprintf(buf, sizeof(buf), "%.17g", speed);
        cfg.set("trajectory.speed", buf);
      }

      const harness::Scenario sc = harness::scenario_from_config(cfg);
      std::printf("scenario '%s': %s, %.1f s, %.0f Hz control / %.0f Hz"
                  " physics\n",
                  sc.name.c_str(), harness::controller_name(sc.controller)
                  .c_str(), sc.duration, sc.control_hz, sc.physics_hz);
      const harness::RunResult result = harness::run_scenario(sc);
      print_metrics(result.metrics);
      std::printf("final side length  %.4f m\n", result.final_length);

      if (!sc.payload_events.empty()) {
        const harness::GraspResult g =
            harness::evaluate_grasp(result, sc.payload_events.front());
        std::printf("grasp: thrust %.4f -> %.4f N, step %.4f N "
                    "(expected %.4f, error %.2f%%)\n",
                    g.thrust_before, g.thrust_after, g.delta, g.expected,
                    100.0 * g.relative_error);
      }
      if (cfg.has("gap.width")) {
        const harness::GapResult g =
            harness::evaluate_gap(result.log, harness::gap_from_config(cfg));
        std::printf("gap: %s, side length %.4f..%.4f m inside, clearance "
                    "%+.4f m -> %s\n",
                    g.traversed ? "traversed" : "not traversed",
                    g.min_length_inside, g.max_length_inside, g.clearance,
                    g.success ? "pass" : "fail");
      }

      std::filesystem::create_directories(out_dir);
      const std::string traj = out_dir + "/" + sc.name + "_trajectory.csv";
      harness::write_trajectory_csv(traj, result.log);
      std::printf("wrote %s\n", traj.c_str());
      const std::string summary = out_dir + "/" + sc.name + "_metrics.kv";
      write_metrics_kv(summary, result.metrics, result.final_length);
      std::printf("wrote %s\n", summary.c_str());
      if (!result.solver_log.empty()) {
        const std::string diag = out_dir + "/" + sc.name + "_solver.csv";
        harness::write_solver_csv(diag, result.solver_log);
        std::printf("wrote %s\n", diag.c_str());
      }
      return 0;
    }

    if (cmp->parsed()) {
      const config::Config cfg = config::Config::from_file(config_path);
      const std::vector<harness::ComparisonRow> rows =
          harness::compare_controllers(cfg);
      std::cout << harness::format_comparison(rows);
      std::filesystem::create_directories(out_dir);
      const std::string path = out_dir + "/comparison.csv";
      harness::write_comparison_csv(path, rows);
      std::printf("wrote %s\n", path.c_str());
      for (const auto& row : rows) {
        if (!row.ok) return 1;
      }
      return 0;
    }

    if (cal->parsed()) {
      const geometry::CalibrationResult result =
          geometry::calibrate_layout(geometry::CalibrationTargets{});
      std::cout << geometry::format_calibration_report(result);
      std::filesystem::create_directories(out_dir);
      geometry::write_calibration_report(
          result, out_dir + "/calibration_report.txt",
          out_dir + "/calibration_report.kv");
      write_layout_config(out_dir + "/vehicle_fitted.cfg", result.params);
      std::printf("wrote %s/calibration_report.{txt,kv} and "
                  "%s/vehicle_fitted.cfg\n",
                  out_dir.c_str(), out_dir.c_str());
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
