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

#include "ringrotor/calibrate.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace ringrotor::geometry {

MorphGeometry build_layout(const LayoutParams& p) {
  if (!(p.L_min > 0.0 && p.L_max > p.L_min)) {
    throw std::invalid_argument("layout: stroke range [L_min, L_max] empty");
  }
  const double m_mod = p.module_mass();
  if (!(m_mod > 0.0)) {
    throw std::invalid_argument(
        "layout: component masses exceed the total; no mass left for the "
        "frame modules");
  }

  MorphGeometry geom;
  geom.L_min = p.L_min;
  geom.L_max = p.L_max;
  geom.k_t = p.k_t;
  geom.k_c = p.k_c;
  geom.spin_signs = {+1, -1, +1, -1};

  // Rotors/motors at the square corners, inset from the outer edge.
  // Corner order runs counterclockwise so the spin pattern alternates
  // around the ring.
  const double sx[4] = {+1.0, -1.0, -1.0, +1.0};
  const double sy[4] = {+1.0, +1.0, -1.0, -1.0};
  for (int j = 0; j < 4; ++j) {
    AffineMount mount;
    mount.base = {-sx[j] * p.rotor_inset, -sy[j] * p.rotor_inset, p.motor_z};
    mount.direction = {0.5 * sx[j], 0.5 * sy[j], 0.0};
    geom.rotor_mounts[j] = mount;

    ComponentSpec motor;
    motor.name = "motor_" + std::to_string(j);
    motor.kind = ComponentKind::MotorCylinder;
    motor.mass = p.motor_mass;
    motor.radius = p.motor_radius;
    motor.height = p.motor_height;
    motor.mount = mount;
    geom.components.push_back(motor);
  }

  // Frame modules: a slotted bar per side.  Two cutouts are carved from the
  // inner face; their masses follow from the uniform density of the bar so
  // the net module mass is preserved exactly.
  const Eigen::Vector3d outer_dims{p.module_width, p.module_length,
                                   p.module_height};
  const Eigen::Vector3d cut_dims{0.5 * p.module_width, 0.28 * p.module_length,
                                 0.6 * p.module_height};
  const double v_outer = outer_dims.prod();
  const double v_cut = cut_dims.prod();
  const double cut_mass = m_mod * v_cut / (v_outer - 2.0 * v_cut);
  for (int i = 0; i < 4; ++i) {
    const double theta = i * std::numbers::pi / 2.0;
    const Eigen::Matrix3d R = rotation_z(theta);

    ComponentSpec module;
    module.name = "module_" + std::to_string(i);
    module.kind = ComponentKind::ModuleComposite;
    module.mass = m_mod;
    module.dims = outer_dims;
    module.yaw = theta;
    module.mount.base = R * Eigen::Vector3d(p.module_r0, 0.0, p.module_z);
    module.mount.direction = R * Eigen::Vector3d(p.module_r1, 0.0, 0.0);
    for (const double side : {-1.0, +1.0}) {
      CutoutCuboid cut;
      cut.mass = cut_mass;
      cut.dims = cut_dims;
      cut.offset = {-0.25 * p.module_width, side * 0.30 * p.module_length,
                    0.0};
      module.cutouts.push_back(cut);
    }
    geom.components.push_back(module);
  }

  const auto central = [](const std::string& name, double mass,
                          const Eigen::Vector3d& dims, double x0, double x1,
                          double y, double z) {
    ComponentSpec c;
    c.name = name;
    c.kind = ComponentKind::Cuboid;
    c.mass = mass;
    c.dims = dims;
    c.mount.base = {x0, y, z};
    c.mount.direction = {x1, 0.0, 0.0};
    return c;
  };
  geom.components.push_back(central("battery", p.battery_mass, p.battery_dims,
                                    p.battery_x0, p.battery_x1, p.battery_y,
                                    p.battery_z));
  geom.components.push_back(central("board", p.board_mass, p.board_dims,
                                    p.board_x0, p.board_x1, p.board_y,
                                    p.board_z));
  geom.components.push_back(central("servo", p.servo_mass, p.servo_dims,
                                    p.servo_x0, p.servo_x1, p.servo_y,
                                    p.servo_z));
  return geom;
}

namespace {

// The calibration's degrees of freedom, with box limits keeping the layout
// physically meaningful during the search.
struct FitParam {
  const char* name;
  double LayoutParams::* field;
  double lo;
  double hi;
};

constexpr FitParam kFitParams[] = {
    {"rotor_inset", &LayoutParams::rotor_inset, 0.005, 0.120},
    {"module_r0", &LayoutParams::module_r0, -0.350, 0.250},
    {"module_r1", &LayoutParams::module_r1, 0.050, 1.600},
    {"module_length", &LayoutParams::module_length, 0.100, 0.420},
    {"module_width", &LayoutParams::module_width, 0.020, 0.120},
    {"module_height", &LayoutParams::module_height, 0.010, 0.090},
    {"module_z", &LayoutParams::module_z, -0.060, 0.060},
    {"battery_x0", &LayoutParams::battery_x0, -0.120, 0.120},
    {"battery_x1", &LayoutParams::battery_x1, -0.600, 0.600},
    {"battery_y", &LayoutParams::battery_y, -0.120, 0.120},
    {"battery_z", &LayoutParams::battery_z, -0.080, 0.080},
    {"board_x1", &LayoutParams::board_x1, -0.600, 0.600},
    {"servo_x1", &LayoutParams::servo_x1, -0.600, 0.600},
    {"servo_z", &LayoutParams::servo_z, -0.080, 0.080},
};
constexpr int kNumFit = static_cast<int>(std::size(kFitParams));

Eigen::VectorXd pack(const LayoutParams& p) {
  Eigen::VectorXd x(kNumFit);
  for (int i = 0; i < kNumFit; ++i) x(i) = p.*(kFitParams[i].field);
  return x;
}

LayoutParams unpack(const LayoutParams& base, const Eigen::VectorXd& x) {
  LayoutParams p = base;
  for (int i = 0; i < kNumFit; ++i) {
    p.*(kFitParams[i].field) =
        std::clamp(x(i), kFitParams[i].lo, kFitParams[i].hi);
  }
  return p;
}

void validate_targets(const CalibrationTargets& t) {
  const auto fail = [](const std::string& why) {
    throw CalibrationError("calibration: infeasible targets: " + why);
  };
  if (!(t.mass > 0.0)) fail("mass must be positive");
  if (!(t.L_small > 0.0 && t.L_large > t.L_small)) {
    fail("need 0 < L_small < L_large");
  }
  for (const auto& [label, d] :
       {std::pair{"large", t.inertia_diag_large},
        std::pair{"small", t.inertia_diag_small}}) {
    if (!(d.minCoeff() > 0.0)) {
      fail(std::string("inertia diagonal (") + label + ") must be positive");
    }
    // A real mass distribution obeys Jxx + Jyy >= Jzz and permutations.
    const double slack = 1e-12;
    if (d.x() + d.y() < d.z() - slack || d.y() + d.z() < d.x() - slack ||
        d.x() + d.z() < d.y() - slack) {
      fail(std::string("inertia diagonal (") + label +
           ") violates the triangle inequality");
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (t.inertia_diag_small(i) >= t.inertia_diag_large(i)) {
      fail("shrinking must reduce every inertia diagonal");
    }
  }
}

/// Weighted residual vector for one parameter set.  Inertia entries are
/// relative errors; COG entries are scaled so 1 mm of error costs about as
/// much as 0.4% of an inertia entry; products of inertia are pushed to zero
/// with a gentle weight.
Eigen::VectorXd residuals(const CalibrationTargets& t, const LayoutParams& p) {
  const MorphGeometry geom = build_layout(p);
  const VehicleProperties large = total_inertia(geom, t.L_large);
  const VehicleProperties small = total_inertia(geom, t.L_small);

  Eigen::VectorXd r(15);
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    r(k++) = large.inertia(i, i) / t.inertia_diag_large(i) - 1.0;
  }
  for (int i = 0; i < 3; ++i) {
    r(k++) = small.inertia(i, i) / t.inertia_diag_small(i) - 1.0;
  }
  for (int i = 0; i < 3; ++i) {
    r(k++) = 4.0 * (large.r_cog(i) - t.r_cog(i)) / 1e-3;
  }
  r(k++) = 0.3 * large.inertia(0, 1) / t.inertia_diag_large.mean();
  r(k++) = 0.3 * large.inertia(0, 2) / t.inertia_diag_large.mean();
  r(k++) = 0.3 * large.inertia(1, 2) / t.inertia_diag_large.mean();
  r(k++) = 0.3 * small.inertia(0, 1) / t.inertia_diag_small.mean();
  r(k++) = 0.3 * small.inertia(0, 2) / t.inertia_diag_small.mean();
  r(k++) = 0.3 * small.inertia(1, 2) / t.inertia_diag_small.mean();
  return r;
}

}  // namespace

CalibrationResult calibrate_layout(const CalibrationTargets& targets,
                                   const LayoutParams& initial) {
  validate_targets(targets);

  LayoutParams base = initial;
  base.total_mass = targets.mass;  // matched exactly by construction
  base.L_min = std::min(base.L_min, targets.L_small);
  base.L_max = std::max(base.L_max, targets.L_large);

  const auto eval = [&](const Eigen::VectorXd& x) {
    return residuals(targets, unpack(base, x));
  };

  // Levenberg-Marquardt with a central-difference Jacobian.  The problem is
  // small (13 parameters, 15 residuals), so refactoring per step is cheap.
  Eigen::VectorXd x = pack(base);
  Eigen::VectorXd r = eval(x);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int iterations = 0;

  for (int it = 0; it < 200; ++it) {
    Eigen::MatrixXd J(r.size(), kNumFit);
    for (int i = 0; i < kNumFit; ++i) {
      const double h = std::max(1e-7, 1e-5 * std::abs(x(i)));
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      J.col(i) = (eval(xp) - eval(xm)) / (2.0 * h);
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd Jtr = J.transpose() * r;

    bool stepped = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd dx = A.ldlt().solve(-Jtr);
      const Eigen::VectorXd x_new = x + dx;
      const Eigen::VectorXd r_new = eval(x_new);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        x = x_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda * 0.3, 1e-10);
        stepped = true;
        break;
      }
      lambda *= 4.0;
    }
    iterations = it + 1;
    if (!stepped || cost < 1e-16) break;
  }

  CalibrationResult result;
  result.params = unpack(base, x);
  result.geometry = build_layout(result.params);
  result.cost = cost;
  result.iterations = iterations;

  const VehicleProperties large =
      total_inertia(result.geometry, targets.L_large);
  const VehicleProperties small =
      total_inertia(result.geometry, targets.L_small);
  const char* axis[3] = {"xx", "yy", "zz"};
  const char* cog_axis[3] = {"x", "y", "z"};
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    CalibrationEntry e;
    e.name = std::string("inertia_large_") + axis[i];
    e.target = targets.inertia_diag_large(i);
    e.achieved = large.inertia(i, i);
    e.error = std::abs(e.achieved / e.target - 1.0);
    e.ok = e.error <= targets.max_inertia_rel_error;
    ok = ok && e.ok;
    result.report.push_back(e);
  }
  for (int i = 0; i < 3; ++i) {
    CalibrationEntry e;
    e.name = std::string("inertia_small_") + axis[i];
    e.target = targets.inertia_diag_small(i);
    e.achieved = small.inertia(i, i);
    e.error = std::abs(e.achieved / e.target - 1.0);
    e.ok = e.error <= targets.max_inertia_rel_error;
    ok = ok && e.ok;
    result.report.push_back(e);
  }
  for (int i = 0; i < 3; ++i) {
    CalibrationEntry e;
    e.name = std::string("r_cog_") + cog_axis[i];
    e.target = targets.r_cog(i);
    e.achieved = large.r_cog(i);
    e.error = std::abs(e.achieved - e.target);
    e.ok = e.error <= targets.max_cog_abs_error;
    ok = ok && e.ok;
    result.report.push_back(e);
  }
  {
    CalibrationEntry e;
    e.name = "mass";
    e.target = targets.mass;
    e.achieved = large.mass;
    e.error = std::abs(e.achieved - e.target);
    e.ok = e.error <= 1e-9;
    ok = ok && e.ok;
    result.report.push_back(e);
  }

  if (!ok) {
    throw CalibrationError("calibration: fit did not reach the thresholds\n" +
                           format_calibration_report(result));
  }
  return result;
}

std::string format_calibration_report(const CalibrationResult& result) {
  std::ostringstream os;
  os << "calibration report (cost " << result.cost << ", "
     << result.iterations << " iterations)\n";
  os << "  target              expected      achieved        error  status\n";
  for (const auto& e : result.report) {
    char line[128];
    std::snprintf(line, sizeof(line), "  %-18s %12.6g  %12.6g  %11.3e  %s\n",
                  e.name.c_str(), e.target, e.achieved, e.error,
                  e.ok ? "ok" : "FAIL");
    os << line;
  }
  return os.str();
}

void write_calibration_report(const CalibrationResult& result,
                              const std::string& text_path,
                              const std::string& kv_path) {
  {
    std::ofstream out(text_path);
    if (!out) {
      throw std::runtime_error("calibration: cannot write " + text_path);
    }
    out << format_calibration_report(result);
  }
  std::ofstream kv(kv_path);
  if (!kv) throw std::runtime_error("calibration: cannot write " + kv_path);
  kv.precision(17);
  kv << "cost = " << result.cost << "\n";
  kv << "iterations = " << result.iterations << "\n";
  for (const auto& e : result.report) {
    kv << e.name << ".target = " << e.target << "\n";
    kv << e.name << ".achieved = " << e.achieved << "\n";
    kv << e.name << ".error = " << e.error << "\n";
    kv << e.name << ".ok = " << (e.ok ? 1 : 0) << "\n";
  }
  for (const auto& fp : kFitParams) {
    kv << "param." << fp.name << " = " << result.params.*(fp.field) << "\n";
  }
}

}  // namespace ringrotor::geometry
