#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>

#include "hexcpg/errors.hpp"
#include "hexcpg/mapping.hpp"

namespace hexcpg {

struct JointLimits {
  Eigen::Vector3d lower{-M_PI / 2.0, -M_PI / 2.0, -2.6};
  Eigen::Vector3d upper{M_PI / 2.0, M_PI / 2.0, -0.2};
};

// 3-DoF leg: coxa yaw about the hip vertical axis, then femur and tibia
// pitch in the leg's sagittal plane. Hip frames: x radially outward from the
// base, z up.
struct LegGeometry {
  double l_coxa = 0.05;
  double l_femur = 0.12;
  double l_tibia = 0.18;
  std::array<Eigen::Isometry3d, kNumLegs> hip_offsets;  // base -> hip

  double max_reach() const { return l_coxa + l_femur + l_tibia; }
  static LegGeometry default_geometry();
};

struct LegJointAngles {
  double hip_yaw = 0.0;
  double hip_pitch = 0.0;
  double knee = 0.0;

  Eigen::Vector3d vec() const { return {hip_yaw, hip_pitch, knee}; }
  bool within(const JointLimits& lim) const;
};

FootTarget forward_kinematics(const LegGeometry& g, const LegJointAngles& q);

// Analytic IK, knee-back branch. Throws Unreachable outside the workspace
// annulus and JointLimit when the solution violates `lim`.
LegJointAngles inverse_kinematics(const LegGeometry& g, const FootTarget& target,
                                  const JointLimits& lim = JointLimits{});

// Same solution without the limit check (used by the simulator, which clamps
// the commanded angles itself).
LegJointAngles inverse_kinematics_unchecked(const LegGeometry& g,
                                            const FootTarget& target);

// world -> hip transform for one leg given the base pose.
Eigen::Isometry3d hip_transform(const Eigen::Isometry3d& base_pose,
                                const LegGeometry& g, int leg);

// d(foot position)/d(q) in the hip frame, 3x3.
Eigen::Matrix3d leg_jacobian(const LegGeometry& g, const LegJointAngles& q);

}  // namespace hexcpg
