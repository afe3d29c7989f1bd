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

#include "ringrotor/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace ringrotor::geometry {

namespace {

constexpr double kLengthSlack = 1e-9;  // tolerance on the [L_min, L_max] check

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("geometry: " + what);
}

}  // namespace

Eigen::Matrix3d rotation_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d R;
  R << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return R;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

Eigen::Matrix3d parallel_axis_term(double mass, const Eigen::Vector3d& r) {
  const Eigen::Matrix3d S = skew(r);
  return -mass * S * S;
}

namespace {

Eigen::Matrix3d cuboid_inertia(double mass, const Eigen::Vector3d& d) {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  J(0, 0) = mass / 12.0 * (d.y() * d.y() + d.z() * d.z());
  J(1, 1) = mass / 12.0 * (d.x() * d.x() + d.z() * d.z());
  J(2, 2) = mass / 12.0 * (d.x() * d.x() + d.y() * d.y());
  return J;
}

Eigen::Matrix3d cylinder_inertia(double mass, double r, double h) {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  J(0, 0) = mass / 12.0 * (3.0 * r * r + h * h);
  J(1, 1) = J(0, 0);
  J(2, 2) = mass / 12.0 * (6.0 * r * r);
  return J;
}

/// Gross outer-cuboid mass of a module: net mass plus everything carved out.
double module_outer_mass(const ComponentSpec& spec) {
  double m = spec.mass;
  for (const auto& c : spec.cutouts) m += c.mass;
  return m;
}

}  // namespace

Eigen::Matrix3d primitive_inertia(const ComponentSpec& spec) {
  require(spec.mass > 0.0, "component '" + spec.name + "' needs positive mass");
  switch (spec.kind) {
    case ComponentKind::MotorCylinder:
      require(spec.radius > 0.0 && spec.height > 0.0,
              "cylinder '" + spec.name + "' needs positive radius and height");
      return cylinder_inertia(spec.mass, spec.radius, spec.height);
    case ComponentKind::Cuboid:
      require((spec.dims.array() > 0.0).all(),
              "cuboid '" + spec.name + "' needs positive edge lengths");
      return cuboid_inertia(spec.mass, spec.dims);
    case ComponentKind::ModuleComposite:
      throw std::invalid_argument(
          "geometry: primitive_inertia does not apply to module composite '" +
          spec.name + "'; use module_inertia");
  }
  throw std::invalid_argument("geometry: unknown component kind");
}

Eigen::Vector3d module_cog_offset(const ComponentSpec& spec) {
  require(spec.kind == ComponentKind::ModuleComposite,
          "module_cog_offset expects a module composite");
  const double m_outer = module_outer_mass(spec);
  require(spec.mass > 0.0,
          "module '" + spec.name + "' cutouts remove the entire outer mass");
  // Signed mass-weighted mean: outer cuboid centered at the local origin,
  // each cutout subtracts mass at its offset.
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();  // m_outer * 0
  for (const auto& c : spec.cutouts) weighted -= c.mass * c.offset;
  (void)m_outer;
  return weighted / spec.mass;
}

Eigen::Matrix3d module_inertia(const ComponentSpec& spec) {
  require(spec.kind == ComponentKind::ModuleComposite,
          "module_inertia expects a module composite");
  require(spec.cutouts.size() <= 2, "module '" + spec.name +
                                        "' supports at most two cutouts");
  const double m_outer = module_outer_mass(spec);
  require(spec.mass > 0.0 && m_outer > 0.0,
          "module '" + spec.name + "' cutout mass exceeds the outer cuboid");
  require((spec.dims.array() > 0.0).all(),
          "module '" + spec.name + "' needs positive outer edge lengths");

  const Eigen::Vector3d cog = module_cog_offset(spec);

  // Outer cuboid about the composite COG (displacement: -cog from its own
  // center), minus each cutout's full contribution about the same point.
  Eigen::Matrix3d J = cuboid_inertia(m_outer, spec.dims) +
                      parallel_axis_term(m_outer, -cog);
  for (const auto& c : spec.cutouts) {
    if (c.mass == 0.0) continue;
    require(c.mass > 0.0, "module '" + spec.name + "' cutout mass negative");
    require((c.dims.array() > 0.0).all(),
            "module '" + spec.name + "' cutout needs positive edge lengths");
    J -= cuboid_inertia(c.mass, c.dims) +
         parallel_axis_term(c.mass, c.offset - cog);
  }

  const Eigen::Vector3d moments =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(J).eigenvalues();
  if (moments.minCoeff() < 0.0) {
    throw std::invalid_argument("geometry: module '" + spec.name +
                                "' has a negative principal moment; cutouts "
                                "are inconsistent with the outer cuboid");
  }
  return J;
}

Eigen::Vector3d component_position(const ComponentSpec& spec, double L) {
  Eigen::Vector3d p = spec.mount.at(L);
  if (spec.kind == ComponentKind::ModuleComposite) {
    p += rotation_z(spec.yaw) * module_cog_offset(spec);
  }
  return p;
}

Eigen::Matrix3d component_inertia_body(const ComponentSpec& spec) {
  const Eigen::Matrix3d J_local = spec.kind == ComponentKind::ModuleComposite
                                      ? module_inertia(spec)
                                      : primitive_inertia(spec);
  if (spec.yaw == 0.0) return J_local;
  const Eigen::Matrix3d R = rotation_z(spec.yaw);
  return R * J_local * R.transpose();
}

namespace {

void check_side_length(const MorphGeometry& geom, double L) {
  if (!(L >= geom.L_min - kLengthSlack && L <= geom.L_max + kLengthSlack)) {
    throw std::domain_error("geometry: side length " + std::to_string(L) +
                            " outside [" + std::to_string(geom.L_min) + ", " +
                            std::to_string(geom.L_max) + "]");
  }
}

}  // namespace

Eigen::Vector3d center_of_gravity(const MorphGeometry& geom, double L,
                                  const Payload& payload) {
  check_side_length(geom, L);
  double mass = payload.mass;
  Eigen::Vector3d weighted = payload.mass * payload.position;
  for (const auto& c : geom.components) {
    mass += c.mass;
    weighted += c.mass * component_position(c, L);
  }
  require(mass > 0.0, "total mass must be positive");
  return weighted / mass;
}

Eigen::Matrix4d allocation_matrix(
    const VehicleProperties& props,
    const std::array<Eigen::Vector3d, 4>& rotor_positions,
    const std::array<int, 4>& spin_signs) {
  require(props.k_t > 0.0 && props.k_c > 0.0,
          "allocation needs positive thrust/drag coefficients");
  Eigen::Matrix4d H;
  for (int j = 0; j < 4; ++j) {
    require(spin_signs[j] == 1 || spin_signs[j] == -1,
            "spin signs must be +1 or -1");
    H(0, j) = 1.0;
    H(1, j) = props.r_cog.y() + rotor_positions[j].y();
    H(2, j) = props.r_cog.x() - rotor_positions[j].x();
    H(3, j) = spin_signs[j] * props.k_c / props.k_t;
  }
  return H;
}

VehicleProperties total_inertia(const MorphGeometry& geom, double L,
                                const Payload& payload) {
  check_side_length(geom, L);
  require(payload.mass >= 0.0, "payload mass must be non-negative");

  VehicleProperties props;
  props.k_t = geom.k_t;
  props.k_c = geom.k_c;
  props.r_cog = center_of_gravity(geom, L, payload);

  props.mass = payload.mass;
  for (const auto& c : geom.components) props.mass += c.mass;

  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (const auto& c : geom.components) {
    const Eigen::Vector3d r = component_position(c, L) - props.r_cog;
    J += component_inertia_body(c) + parallel_axis_term(c.mass, r);
  }
  if (!payload.empty()) {
    J += payload.inertia +
         parallel_axis_term(payload.mass, payload.position - props.r_cog);
  }
  props.inertia = J;

  for (int j = 0; j < 4; ++j) {
    props.rotor_positions[j] = geom.rotor_mounts[j].at(L);
  }
  props.allocation =
      allocation_matrix(props, props.rotor_positions, geom.spin_signs);
  return props;
}

void validate(const VehicleProperties& props, double tol) {
  const auto fail = [](const std::string& what) {
    throw std::runtime_error("geometry: invalid vehicle properties: " + what);
  };
  if (!(props.mass > 0.0)) fail("mass not positive");
  if (!props.inertia.allFinite()) fail("inertia not finite");
  if (((props.inertia - props.inertia.transpose()).cwiseAbs().maxCoeff() >
       tol)) {
    fail("inertia not symmetric");
  }
  const Eigen::Vector3d moments =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(props.inertia)
          .eigenvalues();
  if (!(moments.minCoeff() > 0.0)) fail("inertia not positive definite");
  // Any physical mass distribution satisfies the triangle inequality on its
  // principal moments (each moment is a sum of the other two's integrands).
  if (moments(0) + moments(1) < moments(2) - tol) {
    fail("principal moments violate the triangle inequality");
  }
  for (int j = 0; j < 4; ++j) {
    if (std::abs(props.allocation(0, j) - 1.0) > tol) {
      fail("allocation row 0 must be all ones");
    }
    if (std::abs(std::abs(props.allocation(3, j)) -
                 props.k_c / props.k_t) > tol) {
      fail("allocation row 3 magnitude must equal k_c/k_t");
    }
  }
}

}  // namespace ringrotor::geometry
