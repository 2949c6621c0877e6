#include "hexcpg/sim.hpp"

#include <algorithm>
#include <cmath>

namespace hexcpg {

namespace {

bool state_sane(const RobotState& s) {
  if (!s.base_position.allFinite() || !s.base_lin_vel.allFinite() ||
      !s.base_ang_vel.allFinite() || !s.q.allFinite() || !s.qdot.allFinite() ||
      !std::isfinite(s.base_orientation.norm())) {
    return false;
  }
  return s.base_position.norm() < 1e3 && s.base_lin_vel.norm() < 1e2 &&
         s.base_ang_vel.norm() < 1e3 && s.qdot.lpNorm<Eigen::Infinity>() < 1e4;
}

}  // namespace

Eigen::VectorXd pd_torque(const Eigen::VectorXd& q_des, const RobotState& state,
                          const PdGains& gains, double torque_limit) {
  Eigen::VectorXd tau =
      gains.kp * (q_des - state.q) - gains.kd * state.qdot;
  return tau.cwiseMax(-torque_limit).cwiseMin(torque_limit);
}

FootTarget assemble_foot_target(const RobotConfig& cfg, int leg,
                                const FootTarget& map_output) {
  const Eigen::Matrix3d R_hip = cfg.geometry.hip_offsets[leg].linear();
  Eigen::Vector3d step(map_output.position.x(), map_output.position.y(), 0.0);
  FootTarget t;
  t.position = Eigen::Vector3d(cfg.neutral_foot_radius, 0.0, 0.0) +
               R_hip.transpose() * step;
  t.position.z() += map_output.position.z();
  return t;
}

LegJointAngles solve_leg_ik_clamped(const RobotConfig& cfg,
                                    const FootTarget& target) {
  FootTarget t = target;
  LegJointAngles q;
  try {
    q = inverse_kinematics_unchecked(cfg.geometry, t);
  } catch (const Unreachable&) {
    // Project onto the workspace: scale the planar (radial, z) vector seen
    // from the coxa tip to just inside the annulus, keeping the yaw.
    const double yaw = std::atan2(t.position.y(), t.position.x());
    const double pr = std::hypot(t.position.x(), t.position.y()) -
                      cfg.geometry.l_coxa;
    double pz = t.position.z();
    double d = std::hypot(pr, pz);
    const double dmax = 0.995 * (cfg.geometry.l_femur + cfg.geometry.l_tibia);
    const double dmin = 1.005 * std::abs(cfg.geometry.l_femur -
                                         cfg.geometry.l_tibia);
    const double scale = (d > dmax) ? dmax / d : (d < dmin ? dmin / std::max(d, 1e-9) : 1.0);
    const double pr2 = pr * scale;
    const double pz2 = pz * scale;
    const double radial = pr2 + cfg.geometry.l_coxa;
    t.position = Eigen::Vector3d(radial * std::cos(yaw),
                                 radial * std::sin(yaw), pz2);
    q = inverse_kinematics_unchecked(cfg.geometry, t);
  }
  const JointLimits& lim = cfg.joint_limits;
  q.hip_yaw = std::clamp(q.hip_yaw, lim.lower[0], lim.upper[0]);
  q.hip_pitch = std::clamp(q.hip_pitch, lim.lower[1], lim.upper[1]);
  q.knee = std::clamp(q.knee, lim.lower[2], lim.upper[2]);
  return q;
}

Eigen::Vector3d foot_world_position(const RobotState& state,
                                    const RobotConfig& cfg, int leg) {
  const Eigen::Isometry3d world_hip =
      hip_transform(state.base_pose(), cfg.geometry, leg);
  return world_hip * forward_kinematics(cfg.geometry, state.leg_angles(leg))
                         .position;
}

std::pair<RobotState, ContactReport> step_dynamics(const RobotState& state,
                                                   const Eigen::VectorXd& tau,
                                                   const Heightfield& hf,
                                                   double dt,
                                                   const RobotConfig& cfg) {
  const Eigen::Matrix3d R = state.base_orientation.toRotationMatrix();
  const Eigen::Vector3d v_world = R * state.base_lin_vel;
  const Eigen::Vector3d w_world = R * state.base_ang_vel;

  ContactReport report;
  Eigen::Vector3d force_world(0.0, 0.0, -cfg.base_mass * cfg.gravity);
  Eigen::Vector3d torque_world = Eigen::Vector3d::Zero();
  Eigen::VectorXd tau_contact = Eigen::VectorXd::Zero(kNumJoints);
  std::array<bool, kNumLegs> contact_now{};

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const LegJointAngles q_leg = state.leg_angles(leg);
    const Eigen::Isometry3d world_hip =
        hip_transform(state.base_pose(), cfg.geometry, leg);
    const Eigen::Vector3d foot_hip =
        forward_kinematics(cfg.geometry, q_leg).position;
    const Eigen::Vector3d foot = world_hip * foot_hip;

    const double ground = hf.height_at(foot.x(), foot.y());
    const double pen = ground - foot.z();
    if (pen <= 0.0) continue;
    contact_now[leg] = true;

    const Eigen::Matrix3d J = leg_jacobian(cfg.geometry, q_leg);
    const Eigen::Vector3d qd_leg = state.qdot.segment<3>(3 * leg);
    const Eigen::Matrix3d R_world_hip = world_hip.linear();
    const Eigen::Vector3d v_foot = v_world +
                                   w_world.cross(foot - state.base_position) +
                                   R_world_hip * (J * qd_leg);

    const Eigen::Vector3d n = hf.normal_at(foot.x(), foot.y());
    const double pen_rate = -v_foot.dot(n);
    const double fn = std::max(
        0.0, cfg.contact.k_normal * pen + cfg.contact.c_normal * pen_rate);
    const Eigen::Vector3d v_t = v_foot - v_foot.dot(n) * n;
    const double vt_norm = v_t.norm();
    Eigen::Vector3d ft = Eigen::Vector3d::Zero();
    if (vt_norm > 1e-9) {
      const double mag =
          std::min(cfg.contact.k_tangent * vt_norm, cfg.contact.mu_friction * fn);
      ft = -mag / vt_norm * v_t;
    }
    const Eigen::Vector3d f = fn * n + ft;
    report.foot_forces[leg] = f;

    force_world += f;
    torque_world += (foot - state.base_position).cross(f);
    tau_contact.segment<3>(3 * leg) = J.transpose() * (R_world_hip.transpose() * f);
  }

  RobotState next = state;

  // Joints: quasi-static legs with small reflected inertia.
  const Eigen::VectorXd qdd = (tau + tau_contact) / cfg.reflected_inertia;
  next.qdot += qdd * dt;
  next.q += next.qdot * dt;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (int a = 0; a < 3; ++a) {
      const int idx = 3 * leg + a;
      const double lo = cfg.joint_limits.lower[a];
      const double hi = cfg.joint_limits.upper[a];
      if (next.q[idx] < lo) {
        next.q[idx] = lo;
        next.qdot[idx] = std::max(next.qdot[idx], 0.0);
      } else if (next.q[idx] > hi) {
        next.q[idx] = hi;
        next.qdot[idx] = std::min(next.qdot[idx], 0.0);
      }
    }
  }

  // Base: semi-implicit Euler.
  const Eigen::Vector3d accel = force_world / cfg.base_mass;
  const Eigen::Vector3d v_world_next = v_world + accel * dt;
  next.base_position = state.base_position + v_world_next * dt;

  const Eigen::Vector3d torque_body = R.transpose() * torque_world;
  const Eigen::Vector3d Iw = cfg.base_inertia.cwiseProduct(state.base_ang_vel);
  const Eigen::Vector3d wdot =
      (torque_body - state.base_ang_vel.cross(Iw)).cwiseQuotient(
          cfg.base_inertia);
  const Eigen::Vector3d w_body_next = state.base_ang_vel + wdot * dt;

  const Eigen::Vector3d dphi = w_body_next * dt;
  const double angle = dphi.norm();
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (angle > 1e-12) {
    dq = Eigen::Quaterniond(Eigen::AngleAxisd(angle, dphi / angle));
  }
  next.base_orientation = (state.base_orientation * dq).normalized();
  next.base_ang_vel = w_body_next;
  next.base_lin_vel = next.base_orientation.toRotationMatrix().transpose() *
                      v_world_next;

  // Contact bookkeeping: air time grows in flight, resets at touchdown.
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (contact_now[leg]) {
      if (!state.foot_contact[leg] && state.foot_air_time[leg] > 0.0) {
        report.touchdown_air_time[leg] = state.foot_air_time[leg];
      }
      next.foot_air_time[leg] = 0.0;
    } else {
      next.foot_air_time[leg] = state.foot_air_time[leg] + dt;
    }
    next.foot_contact[leg] = contact_now[leg];
  }

  report.undesired_contact = detect_collision(next, hf, cfg);

  if (!state_sane(next)) {
    throw NumericalDivergence("simulation state left sanity bounds");
  }
  return {next, report};
}

CollisionFlags detect_collision(const RobotState& state, const Heightfield& hf,
                                const RobotConfig& cfg) {
  CollisionFlags flags;
  const Eigen::Vector3d& p = state.base_position;
  if (p.z() - cfg.base_half_thickness <
      hf.height_at(p.x(), p.y())) {
    flags.base = true;
  }
  const Eigen::Isometry3d pose = state.base_pose();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Eigen::Vector3d hip = pose * cfg.geometry.hip_offsets[leg].translation();
    if (hip.z() - cfg.hip_clearance < hf.height_at(hip.x(), hip.y())) {
      flags.hip = true;
      break;
    }
  }
  return flags;
}

RobotState reset_state(const Heightfield& hf, const RobotConfig& cfg, Rng& rng,
                       const Eigen::Vector2d& spawn_xy, double stance_height,
                       double yaw_range) {
  RobotState s;
  const double yaw = yaw_range > 0.0 ? rng.uniform(-yaw_range, yaw_range) : 0.0;
  s.base_orientation =
      Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));

  // Neutral stance: the map output at the oscillator origin is (0, 0, -h).
  FootTarget neutral;
  neutral.position = Eigen::Vector3d(0.0, 0.0, -stance_height);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const LegJointAngles q =
        solve_leg_ik_clamped(cfg, assemble_foot_target(cfg, leg, neutral));
    s.q.segment<3>(3 * leg) = q.vec();
  }

  // Base height: mean ground under the feet plus stance height, minus the
  // static spring compression so the stance starts near force balance.
  s.base_position = Eigen::Vector3d(spawn_xy.x(), spawn_xy.y(), 0.0);
  double ground = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Eigen::Vector3d foot = foot_world_position(s, cfg, leg);
    ground += hf.height_at(foot.x(), foot.y());
  }
  ground /= kNumLegs;
  const double settle =
      cfg.base_mass * cfg.gravity / (kNumLegs * cfg.contact.k_normal);
  s.base_position.z() = ground + stance_height - settle;

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Eigen::Vector3d foot = foot_world_position(s, cfg, leg);
    s.foot_contact[leg] = foot.z() <= hf.height_at(foot.x(), foot.y());
    s.foot_air_time[leg] = 0.0;
  }
  return s;
}

}  // namespace hexcpg
