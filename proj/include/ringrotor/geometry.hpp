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

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ringrotor::geometry {

/// Placement rule for a component: position(L) = base + direction * L,
/// where L is the current side length of the morphing frame.  Components
/// rigidly attached near the center use direction = 0; components riding
/// on the retractable ring have a nonzero direction so they move inward
/// as the frame contracts.
struct AffineMount {
  Eigen::Vector3d base = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::Zero();

  Eigen::Vector3d at(double L) const { return base + direction * L; }
};

enum class ComponentKind {
  MotorCylinder,    ///< solid cylinder, symmetry axis along local z
  Cuboid,           ///< solid box (battery, avionics board, servo, ...)
  ModuleComposite,  ///< frame module: outer cuboid minus carved cuboids
};

/// A cuboid carved out of a module's completed outer cuboid.  The offset
/// is the cutout center relative to the outer-cuboid center, expressed in
/// the module's local (unrotated) frame.
struct CutoutCuboid {
  double mass = 0.0;
  Eigen::Vector3d dims = Eigen::Vector3d::Zero();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

/// One rigid component of the vehicle.  For cylinders and plain cuboids
/// the mount gives the center-of-mass position directly.  For module
/// composites the mount gives the outer-cuboid center; the composite's
/// own center of mass is offset by the cutouts (see module_cog_offset).
struct ComponentSpec {
  std::string name;
  ComponentKind kind = ComponentKind::Cuboid;
  double mass = 0.0;  ///< net mass [kg]; for modules: outer minus cutouts

  // MotorCylinder
  double radius = 0.0;  ///< [m]
  double height = 0.0;  ///< [m]

  // Cuboid / ModuleComposite outer cuboid: edge lengths along local x,y,z
  Eigen::Vector3d dims = Eigen::Vector3d::Zero();

  // ModuleComposite only: at most two carved cuboids
  std::vector<CutoutCuboid> cutouts;

  AffineMount mount;
  double yaw = 0.0;  ///< placement rotation about body z [rad]
};

/// Rigidly attached external load (grasped object).  The inertia tensor is
/// given about the payload's own center of mass; the composition shifts it
/// to the vehicle center of mass internally.
struct Payload {
  double mass = 0.0;
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  ///< body frame [m]

  bool empty() const { return mass == 0.0 && inertia.isZero(0.0); }
};

/// Full morphing-vehicle description: the component list, the admissible
/// side-length range, the rotor thrust application points (affine in L),
/// rotor spin directions, and the propeller thrust/drag coefficients.
struct MorphGeometry {
  std::vector<ComponentSpec> components;
  double L_min = 0.0;
  double L_max = 0.0;
  std::array<AffineMount, 4> rotor_mounts;
  std::array<int, 4> spin_signs = {+1, -1, +1, -1};
  double k_t = 0.0;  ///< thrust coefficient [N s^2]
  double k_c = 0.0;  ///< drag-torque coefficient [N m s^2]
};

/// Mass properties and thrust mapping at one frozen configuration
/// (side length + payload).  `inertia` is about `r_cog`, body axes.
/// `allocation` maps per-rotor thrusts to (collective thrust, body torque).
struct VehicleProperties {
  double mass = 0.0;
  Eigen::Vector3d r_cog = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d allocation = Eigen::Matrix4d::Identity();
  std::array<Eigen::Vector3d, 4> rotor_positions;
  double k_t = 0.0;
  double k_c = 0.0;
};

/// Rotation about the body z axis.
Eigen::Matrix3d rotation_z(double angle);

/// Skew-symmetric cross-product matrix [v]x.
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Parallel-axis term -m [r]x [r]x: add to an inertia tensor about the
/// component COG to express it about a point displaced by r.
Eigen::Matrix3d parallel_axis_term(double mass, const Eigen::Vector3d& r);

/// Inertia of a solid primitive about its own center of mass, local axes.
/// Cylinder: m/12 * diag(3r^2+h^2, 3r^2+h^2, 6r^2).
/// Cuboid:   m/12 * diag(dy^2+dz^2, dx^2+dz^2, dx^2+dy^2).
/// Throws std::invalid_argument for ModuleComposite (use module_inertia)
/// or non-positive mass/dimensions.
Eigen::Matrix3d primitive_inertia(const ComponentSpec& spec);

/// Center of mass of a module composite relative to the outer-cuboid
/// center, in the module's local frame.
Eigen::Vector3d module_cog_offset(const ComponentSpec& spec);

/// Inertia of a module composite about its own center of mass, local axes:
/// the completed outer cuboid minus each cutout, every term transported to
/// the composite COG with the parallel-axis form J - m [r]x^2.
/// Throws std::invalid_argument on non-module input, on a cutout heavier
/// than the outer cuboid, or if a resulting principal moment is negative.
Eigen::Matrix3d module_inertia(const ComponentSpec& spec);

/// Component center-of-mass position in the body frame at side length L
/// (applies the mount rule, the module COG offset and the yaw placement).
Eigen::Vector3d component_position(const ComponentSpec& spec, double L);

/// Component inertia about its own COG expressed in body axes
/// (local inertia conjugated by the yaw placement rotation).
Eigen::Matrix3d component_inertia_body(const ComponentSpec& spec);

/// Mass-weighted mean of all component positions (plus payload) at side
/// length L.  Throws std::domain_error if L is outside [L_min, L_max] and
/// std::invalid_argument if the total mass is not positive.
Eigen::Vector3d center_of_gravity(const MorphGeometry& geom, double L,
                                  const Payload& payload = {});

/// Thrust-to-wrench map about the vehicle center of mass:
///   row 0: total thrust        (all ones)
///   row 1: roll torque arms    r_y + l_y,j
///   row 2: pitch torque arms   r_x - l_x,j
///   row 3: yaw drag arms       spin_j * k_c / k_t
/// where l_j are the rotor positions and r the center of mass, both in the
/// body frame.  Uses props.r_cog and props.k_t/k_c.
Eigen::Matrix4d allocation_matrix(
    const VehicleProperties& props,
    const std::array<Eigen::Vector3d, 4>& rotor_positions,
    const std::array<int, 4>& spin_signs);

/// Composite rigid-body properties at side length L with an optional
/// payload: total mass, center of mass, inertia about the center of mass
/// (every component and the payload transported with the parallel-axis
/// term), and the thrust allocation matrix.
VehicleProperties total_inertia(const MorphGeometry& geom, double L,
                                const Payload& payload = {});

/// Sanity checks shared by tests and the calibration pipeline: inertia
/// symmetric within tol, positive definite, principal moments satisfying
/// the triangle inequality, allocation row 0 all ones and row 3 magnitudes
/// k_c/k_t.  Throws std::runtime_error describing the first violation.
void validate(const VehicleProperties& props, double tol = 1e-9);

}  // namespace ringrotor::geometry
