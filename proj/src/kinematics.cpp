#include "hexcpg/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace hexcpg {

LegGeometry LegGeometry::default_geometry() {
  LegGeometry g;
  // Hexagonal mount layout; x axis of each hip frame points radially outward.
  const double fx = 0.17, fy = 0.10, my = 0.13;
  struct Mount {
    double x, y, yaw;
  };
  const std::array<Mount, kNumLegs> mounts = {{
      {fx, fy, M_PI / 6.0},     // LF
      {fx, -fy, -M_PI / 6.0},   // RF
      {0.0, my, M_PI / 2.0},    // LM
      {0.0, -my, -M_PI / 2.0},  // RM
      {-fx, fy, 5.0 * M_PI / 6.0},   // LB
      {-fx, -fy, -5.0 * M_PI / 6.0}  // RB
  }};
  for (int i = 0; i < kNumLegs; ++i) {
    g.hip_offsets[i] = Eigen::Isometry3d::Identity();
    g.hip_offsets[i].translate(Eigen::Vector3d(mounts[i].x, mounts[i].y, 0.0));
    g.hip_offsets[i].rotate(
        Eigen::AngleAxisd(mounts[i].yaw, Eigen::Vector3d::UnitZ()));
  }
  return g;
}

bool LegJointAngles::within(const JointLimits& lim) const {
  const Eigen::Vector3d v = vec();
  for (int i = 0; i < 3; ++i) {
    if (v[i] < lim.lower[i] || v[i] > lim.upper[i]) return false;
  }
  return true;
}

FootTarget forward_kinematics(const LegGeometry& g, const LegJointAngles& q) {
  const double r = g.l_coxa + g.l_femur * std::cos(q.hip_pitch) +
                   g.l_tibia * std::cos(q.hip_pitch + q.knee);
  FootTarget t;
  t.position.x() = r * std::cos(q.hip_yaw);
  t.position.y() = r * std::sin(q.hip_yaw);
  t.position.z() = g.l_femur * std::sin(q.hip_pitch) +
                   g.l_tibia * std::sin(q.hip_pitch + q.knee);
  return t;
}

namespace {

LegJointAngles solve_planar(const LegGeometry& g, double yaw, double pr,
                            double pz) {
  const double d = std::hypot(pr, pz);
  const double cos_knee_int = std::clamp(
      (g.l_femur * g.l_femur + g.l_tibia * g.l_tibia - d * d) /
          (2.0 * g.l_femur * g.l_tibia),
      -1.0, 1.0);
  const double gamma = std::atan2(pz, pr);
  const double cos_beta = std::clamp(
      (g.l_femur * g.l_femur + d * d - g.l_tibia * g.l_tibia) /
          (2.0 * g.l_femur * d),
      -1.0, 1.0);
  LegJointAngles q;
  q.hip_yaw = yaw;
  q.hip_pitch = gamma + std::acos(cos_beta);  // knee-back branch
  q.knee = std::acos(cos_knee_int) - M_PI;
  return q;
}

double wrap_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

LegJointAngles inverse_kinematics_unchecked(const LegGeometry& g,
                                            const FootTarget& target) {
  const Eigen::Vector3d& p = target.position;
  const double yaw = std::atan2(p.y(), p.x());
  const double radial = std::hypot(p.x(), p.y());
  const double dmax = g.l_femur + g.l_tibia;
  const double dmin = std::abs(g.l_femur - g.l_tibia);

  // Primary plane: leg extended toward the target. Targets close to (or
  // behind) the yaw axis may only be reachable with the coxa pointing the
  // other way, i.e. a negative radial coordinate in the flipped plane.
  const double pr = radial - g.l_coxa;
  const double d = std::hypot(pr, p.z());
  if (d >= dmin && d <= dmax) return solve_planar(g, yaw, pr, p.z());

  const double pr_flip = -radial - g.l_coxa;
  const double d_flip = std::hypot(pr_flip, p.z());
  if (d_flip >= dmin && d_flip <= dmax) {
    return solve_planar(g, wrap_pi(yaw + M_PI), pr_flip, p.z());
  }

  if (d > dmax) {
    throw Unreachable("IK target beyond maximum reach", d - dmax);
  }
  throw Unreachable("IK target inside inner workspace boundary", d - dmin);
}

LegJointAngles inverse_kinematics(const LegGeometry& g, const FootTarget& target,
                                  const JointLimits& lim) {
  const LegJointAngles q = inverse_kinematics_unchecked(g, target);
  if (!q.within(lim)) {
    throw JointLimit("IK solution outside joint limits");
  }
  return q;
}

Eigen::Isometry3d hip_transform(const Eigen::Isometry3d& base_pose,
                                const LegGeometry& g, int leg) {
  return base_pose * g.hip_offsets[leg];
}

Eigen::Matrix3d leg_jacobian(const LegGeometry& g, const LegJointAngles& q) {
  const double cp = std::cos(q.hip_pitch);
  const double sp = std::sin(q.hip_pitch);
  const double cpk = std::cos(q.hip_pitch + q.knee);
  const double spk = std::sin(q.hip_pitch + q.knee);
  const double r = g.l_coxa + g.l_femur * cp + g.l_tibia * cpk;
  const double dr_dpitch = -g.l_femur * sp - g.l_tibia * spk;
  const double dr_dknee = -g.l_tibia * spk;
  const double cy = std::cos(q.hip_yaw);
  const double sy = std::sin(q.hip_yaw);
  Eigen::Matrix3d J;
  J(0, 0) = -r * sy;
  J(0, 1) = dr_dpitch * cy;
  J(0, 2) = dr_dknee * cy;
  J(1, 0) = r * cy;
  J(1, 1) = dr_dpitch * sy;
  J(1, 2) = dr_dknee * sy;
  J(2, 0) = 0.0;
  J(2, 1) = g.l_femur * cp + g.l_tibia * cpk;
  J(2, 2) = g.l_tibia * cpk;
  return J;
}

}  // namespace hexcpg
