#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>

#include "hexcpg/kinematics.hpp"
#include "hexcpg/rng.hpp"
#include "hexcpg/terrain.hpp"

namespace hexcpg {

inline constexpr int kNumJoints = 3 * kNumLegs;

struct PdGains {
  double kp = 20.0;  // Nm/rad
  double kd = 0.5;   // Nm s/rad
};

struct ContactParams {
  double k_normal = 5000.0;   // N/m
  double c_normal = 50.0;     // N s/m
  double mu_friction = 0.8;   // Coulomb cap
  double k_tangent = 500.0;   // N s/m viscous, capped by mu * Fn
};

// Morphology, gains and contact model; loadable from the robot config file.
struct RobotConfig {
  LegGeometry geometry = LegGeometry::default_geometry();
  JointLimits joint_limits;
  PdGains gains;
  double torque_limit = 8.0;           // Nm
  double base_mass = 4.0;              // kg
  Eigen::Vector3d base_inertia{0.033, 0.057, 0.083};  // kg m^2, diagonal
  double base_half_thickness = 0.05;   // m, body-ground clearance offset
  double hip_clearance = 0.03;         // m, hip-link clearance offset
  double neutral_foot_radius = 0.14;   // m outward from hip along hip x
  double reflected_inertia = 0.02;     // kg m^2 per joint
  ContactParams contact;
  double gravity = 9.81;
};

// Joint layout: leg-major (LF RF LM RM LB RB), per leg (yaw, pitch, knee).
struct RobotState {
  Eigen::Vector3d base_position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond base_orientation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d base_lin_vel = Eigen::Vector3d::Zero();  // body frame
  Eigen::Vector3d base_ang_vel = Eigen::Vector3d::Zero();  // body frame
  Eigen::VectorXd q = Eigen::VectorXd::Zero(kNumJoints);
  Eigen::VectorXd qdot = Eigen::VectorXd::Zero(kNumJoints);
  std::array<bool, kNumLegs> foot_contact{};
  std::array<double, kNumLegs> foot_air_time{};

  Eigen::Isometry3d base_pose() const {
    Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
    T.linear() = base_orientation.toRotationMatrix();
    T.translation() = base_position;
    return T;
  }
  LegJointAngles leg_angles(int leg) const {
    return {q[3 * leg], q[3 * leg + 1], q[3 * leg + 2]};
  }
};

struct CollisionFlags {
  bool base = false;
  bool hip = false;
  bool any() const { return base || hip; }
};

struct ContactReport {
  std::array<Eigen::Vector3d, kNumLegs> foot_forces{};  // world frame
  CollisionFlags undesired_contact;
  // Air time ended by a touchdown during this step; 0 when no touchdown.
  std::array<double, kNumLegs> touchdown_air_time{};
};

// tau_j = kp (q_des_j - q_j) - kd qdot_j, clamped to +/- torque_limit.
Eigen::VectorXd pd_torque(const Eigen::VectorXd& q_des, const RobotState& state,
                          const PdGains& gains, double torque_limit);

// One semi-implicit Euler step of the floating base + quasi-static legs.
// Throws NumericalDivergence when the state leaves sanity bounds.
std::pair<RobotState, ContactReport> step_dynamics(const RobotState& state,
                                                   const Eigen::VectorXd& tau,
                                                   const Heightfield& hf,
                                                   double dt,
                                                   const RobotConfig& cfg);

CollisionFlags detect_collision(const RobotState& state, const Heightfield& hf,
                                const RobotConfig& cfg);

// Hip-frame IK target for one leg: the neutral outward offset plus the map
// output, with the horizontal step displacement rotated from the base frame
// into the hip frame.
FootTarget assemble_foot_target(const RobotConfig& cfg, int leg,
                                const FootTarget& map_output);

// IK with workspace projection and joint-limit clamping; always returns a
// commandable configuration.
LegJointAngles solve_leg_ik_clamped(const RobotConfig& cfg,
                                    const FootTarget& target);

Eigen::Vector3d foot_world_position(const RobotState& state,
                                    const RobotConfig& cfg, int leg);

// Spawn at (x, y) with uniform yaw in +/- yaw_range, neutral stance from the
// neutral map output at base height `stance_height`, zero velocities.
RobotState reset_state(const Heightfield& hf, const RobotConfig& cfg, Rng& rng,
                       const Eigen::Vector2d& spawn_xy, double stance_height,
                       double yaw_range);

}  // namespace hexcpg
