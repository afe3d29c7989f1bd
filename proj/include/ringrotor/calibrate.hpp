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

#pragma once

#include <string>
#include <vector>

#include "ringrotor/geometry.hpp"

namespace ringrotor::geometry {

/// Parametric description of the vehicle layout.  Masses and shapes are
/// fixed engineering choices; the starred [fit] entries are the degrees of
/// freedom the calibration adjusts so the composite mass properties hit the
/// measured targets at both ends of the morphing stroke.
///
/// The layout is a square ring: four frame modules (slotted bars) on the
/// sides of the square, a motor under each corner, and battery / avionics
/// board / morphing servo near the center.  Every mount is affine in the
/// side length L, so shrinking the frame pulls everything inward.
struct LayoutParams {
  // Frame and actuation constants
  double total_mass = 1.665;   ///< [kg]
  double k_t = 7.19544e-9;     ///< thrust coefficient [N s^2]
  double k_c = 1.07932e-10;    ///< drag-torque coefficient [N m s^2]
  double L_min = 0.284;        ///< [m]
  double L_max = 0.414;        ///< [m]

  // Component masses [kg]; the module mass absorbs the remainder so the
  // total is matched exactly (see module_mass()).
  double motor_mass = 0.035;   ///< each, propeller included
  double battery_mass = 0.230;
  double servo_mass = 0.170;
  double board_mass = 0.155;

  // Motors: cylinders under the frame corners
  double motor_radius = 0.014;
  double motor_height = 0.030;
  double motor_z = -0.025;
  double rotor_inset = 0.030;  ///< [fit] corner arm per axis = L/2 - inset

  // Frame modules: outer cuboid (bar along local y) with two lightening
  // cutouts on the inner face; module 0 sits on the +x side, the others
  // are the same bar rotated by 90/180/270 degrees about body z.  The ring
  // encircles the propellers, so at full extension it reaches beyond the
  // motor square and folds inside it when retracted; its center radius
  // follows its own affine law r(L) = module_r0 + module_r1 * L instead of
  // tracking L/2.
  double module_length = 0.300;  ///< [fit] bar length (local y)
  double module_width = 0.060;   ///< [fit] bar width (local x)
  double module_height = 0.040;  ///< [fit] bar height (local z)
  double module_r0 = -0.150;     ///< [fit] ring radius offset [m]
  double module_r1 = 0.950;      ///< [fit] ring radius slope
  double module_z = 0.000;       ///< [fit]

  // Central components (cuboids).  x mounts are affine in L: x(L) = x0+x1*L.
  Eigen::Vector3d battery_dims{0.070, 0.036, 0.045};
  double battery_x0 = -0.020;  ///< [fit]
  double battery_x1 = -0.250;  ///< [fit]
  double battery_y = -0.050;   ///< [fit]
  double battery_z = 0.028;    ///< [fit]

  Eigen::Vector3d board_dims{0.090, 0.060, 0.020};
  double board_x0 = -0.020;
  double board_x1 = -0.280;    ///< [fit]
  double board_y = -0.020;
  double board_z = -0.010;

  Eigen::Vector3d servo_dims{0.040, 0.020, 0.040};
  double servo_x0 = 0.010;
  double servo_x1 = 0.220;     ///< [fit]
  double servo_y = 0.015;
  double servo_z = 0.020;      ///< [fit]

  /// Mass of one frame module: the budget left once motors, battery,
  /// servo and board are accounted for, split over the four modules.
  double module_mass() const {
    return (total_mass - 4.0 * motor_mass - battery_mass - servo_mass -
            board_mass) /
           4.0;
  }
};

/// Instantiate the component list, rotor mounts and spin pattern for a
/// parameter set.  Throws std::invalid_argument if the mass budget leaves
/// no mass for the frame modules or the stroke range is empty.
MorphGeometry build_layout(const LayoutParams& params);

/// Measured mass-property targets the calibration must reproduce.
struct CalibrationTargets {
  double mass = 1.665;
  double L_large = 0.414;
  double L_small = 0.284;
  Eigen::Vector3d inertia_diag_large{0.0380, 0.0459, 0.0823};
  Eigen::Vector3d inertia_diag_small{0.0144, 0.0188, 0.0317};
  Eigen::Vector3d r_cog{-0.027, -0.009, 0.000};

  // Acceptance thresholds for the fitted layout
  double max_inertia_rel_error = 0.05;  ///< per diagonal entry, both sizes
  double max_cog_abs_error = 1e-3;      ///< [m], per axis
};

/// One line of the calibration report.
struct CalibrationEntry {
  std::string name;
  double target = 0.0;
  double achieved = 0.0;
  double error = 0.0;  ///< relative for inertia entries, absolute [m] for COG
  bool ok = false;
};

struct CalibrationResult {
  LayoutParams params;
  MorphGeometry geometry;
  std::vector<CalibrationEntry> report;
  double cost = 0.0;  ///< final weighted sum of squared residuals
  int iterations = 0;
};

/// Thrown when the targets are unphysical or the fit cannot reach them;
/// what() carries the per-target breakdown.
class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

/// Least-squares fit (Levenberg-Marquardt over the [fit] parameters) of the
/// layout to the targets: inertia diagonals at both stroke ends, center of
/// mass at the large size, vanishing products of inertia.  The total mass is
/// matched exactly by construction.  Throws CalibrationError if the targets
/// are infeasible (e.g. diagonal triangle inequality violated) or the fitted
/// residuals exceed the thresholds.
CalibrationResult calibrate_layout(const CalibrationTargets& targets,
                                   const LayoutParams& initial = {});

/// Render the calibration report as a plain-text table.
std::string format_calibration_report(const CalibrationResult& result);

/// Write the report: a human-readable table to `text_path` and flat
/// machine-readable key=value lines to `kv_path`.
void write_calibration_report(const CalibrationResult& result,
                              const std::string& text_path,
                              const std::string& kv_path);

}  // namespace ringrotor::geometry
