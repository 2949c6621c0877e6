#include "hexcpg/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace hexcpg {

Command sample_command(Rng& rng, const CommandRanges& ranges) {
  Command c;
  c.vx = rng.uniform(ranges.vx_lo, ranges.vx_hi);
  c.vy = 0.0;
  c.wz = rng.uniform(ranges.wz_lo, ranges.wz_hi);
  return c;
}

double squash(double raw, double lo, double hi) {
  const double u = std::clamp(raw, -1.0, 1.0);
  return lo + (hi - lo) * 0.5 * (u + 1.0);
}

MapParams decode_action(const Eigen::VectorXd& raw, const MapConstants& mc) {
  MapParams mp;
  mp.h = mc.h;
  mp.k2 = mc.k2;
  mp.invert_stance_branch = mc.invert_stance_branch;
  for (int i = 0; i < kNumLegs; ++i) {
    mp.k1[i] = squash(raw[i], mc.bounds.k1_lo, mc.bounds.k1_hi);
  }
  mp.d_step = squash(raw[6], mc.bounds.d_step_lo, mc.bounds.d_step_hi);
  mp.phi_dir = squash(raw[7], mc.bounds.phi_lo, mc.bounds.phi_hi);
  return mp;
}

Eigen::VectorXd observe(const RobotState& state,
                        const Eigen::VectorXd& last_action,
                        const Command& cmd) {
  const int a = static_cast<int>(last_action.size());
  Eigen::VectorXd obs(3 + 3 + kNumJoints + kNumJoints + 3 + a + 3);
  int off = 0;
  obs.segment<3>(off) = state.base_lin_vel;
  off += 3;
  obs.segment<3>(off) = state.base_ang_vel;
  off += 3;
  obs.segment(off, kNumJoints) = state.q;
  off += kNumJoints;
  obs.segment(off, kNumJoints) = state.qdot;
  off += kNumJoints;
  // Unit gravity direction rotated into the body frame.
  obs.segment<3>(off) = state.base_orientation.toRotationMatrix().transpose() *
                        Eigen::Vector3d(0.0, 0.0, -1.0);
  off += 3;
  obs.segment(off, a) = last_action;
  off += a;
  obs[off] = cmd.vx;
  obs[off + 1] = cmd.vy;
  obs[off + 2] = cmd.wz;
  return obs;
}

Eigen::VectorXd normalize_observation(const Eigen::VectorXd& obs,
                                      int action_dim) {
  // Fixed scales: v 0.5, w 0.25, q 1.0, qdot 0.05, gravity 1.0,
  // last action 0.5, command 1.0.
  Eigen::VectorXd out = obs;
  int off = 0;
  out.segment<3>(off) *= 0.5;
  off += 3;
  out.segment<3>(off) *= 0.25;
  off += 3;
  off += kNumJoints;  // q unscaled
  out.segment(off, kNumJoints) *= 0.05;
  off += kNumJoints;
  off += 3;  // gravity unscaled
  out.segment(off, action_dim) *= 0.5;
  return out;
}

double tracking_kernel(const Eigen::VectorXd& err) {
  return std::exp(-err.squaredNorm() / 0.25);
}

double tracking_kernel(double err) { return std::exp(-err * err / 0.25); }

const std::array<const char*, kNumRewardTerms> kRewardTermNames = {
    "lin_vel_track", "ang_vel_track", "lin_vel_penalty", "ang_vel_penalty",
    "hip_rotation",  "joint_vel",     "joint_acc",       "action_rate",
    "torque",        "collision",     "feet_air_time"};

RewardConfig RewardConfig::reward1(double dt) {
  RewardConfig cfg;
  cfg.dt = dt;
  cfg.variant = "reward1";
  cfg.weights = {4.0, 1.0, -1.0, -0.05, -0.5, -0.001, -2.5e-7, -0.01, -1e-4,
                 -1.0, 1.0};
  cfg.enabled.fill(true);
  return cfg;
}

RewardConfig RewardConfig::reward2(double dt) {
  RewardConfig cfg = reward1(dt);
  cfg.variant = "reward2";
  cfg.enabled.fill(false);
  cfg.enabled[kLinVelTrack] = true;
  cfg.enabled[kAngVelTrack] = true;
  cfg.enabled[kTorque] = true;
  cfg.enabled[kCollision] = true;
  return cfg;
}

RewardBreakdown compute_reward(const RobotState& prev, const RobotState& next,
                               const Eigen::VectorXd& action,
                               const Eigen::VectorXd& last_action,
                               const StepAggregates& agg, const Command& cmd,
                               const RewardConfig& cfg) {
  std::array<double, kNumRewardTerms> raw{};

  Eigen::Vector2d v_err(cmd.vx - next.base_lin_vel.x(),
                        cmd.vy - next.base_lin_vel.y());
  raw[kLinVelTrack] = tracking_kernel(v_err.norm());
  raw[kAngVelTrack] = tracking_kernel(cmd.wz - next.base_ang_vel.z());
  raw[kLinVelPenalty] = next.base_lin_vel.z() * next.base_lin_vel.z();
  raw[kAngVelPenalty] = next.base_ang_vel.head<2>().squaredNorm();

  double hip_sq = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    hip_sq += next.q[3 * leg] * next.q[3 * leg];
  }
  raw[kHipRotation] = hip_sq;

  if (cfg.hip_only_vel_acc) {
    double qd = 0.0, qa = 0.0;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double v = next.qdot[3 * leg];
      const double a =
          (next.qdot[3 * leg] - prev.qdot[3 * leg]) / cfg.dt;
      qd += v * v;
      qa += a * a;
    }
    raw[kJointVel] = qd;
    raw[kJointAcc] = qa;
  } else {
    raw[kJointVel] = next.qdot.squaredNorm();
    raw[kJointAcc] = ((next.qdot - prev.qdot) / cfg.dt).squaredNorm();
  }

  raw[kActionRate] = (action - last_action).squaredNorm();
  raw[kTorque] = agg.mean_sq_torque;
  raw[kCollision] = agg.collision ? 1.0 : 0.0;

  double air = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (agg.touchdown_air_time[leg] > 0.0) {
      air += agg.touchdown_air_time[leg] - 0.5;
    }
  }
  raw[kFeetAirTime] = air;

  RewardBreakdown out;
  for (int i = 0; i < kNumRewardTerms; ++i) {
    out.terms[i] = cfg.enabled[i] ? cfg.weights[i] * cfg.dt * raw[i] : 0.0;
    out.total += out.terms[i];
  }
  return out;
}

Variant variant_from_name(const std::string& name) {
  if (name == "cpg_rl") return Variant::kCpgRl;
  if (name == "rl_baseline") return Variant::kRlBaseline;
  throw ConfigError("unknown variant: " + name);
}

const char* variant_name(Variant v) {
  return v == Variant::kCpgRl ? "cpg_rl" : "rl_baseline";
}

int action_dim(Variant v) { return v == Variant::kCpgRl ? 8 : kNumJoints; }

int observation_dim(Variant v) {
  return 3 + 3 + kNumJoints + kNumJoints + 3 + action_dim(v) + 3;
}

Environment::Environment(EnvConfig cfg,
                         std::shared_ptr<const Heightfield> terrain,
                         uint64_t seed)
    : cfg_(std::move(cfg)), terrain_(std::move(terrain)), rng_(seed) {
  cfg_.cpg.theta = phase_matrix_from_phases(cfg_.gait_phases);
  cfg_.cpg.validate();
  last_action_ = Eigen::VectorXd::Zero(action_dim(cfg_.variant));
}

Eigen::VectorXd Environment::reset(uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

Eigen::VectorXd Environment::reset() {
  command_ = sample_command(rng_, cfg_.commands);
  state_ = reset_state(*terrain_, cfg_.robot, rng_, cfg_.spawn, cfg_.map.h,
                       cfg_.yaw_range);
  cpg_state_ = init_network(cfg_.gait_phases, rng_);
  last_action_.setZero();
  map_params_ = decode_action(Eigen::VectorXd::Zero(8), cfg_.map);
  FootTarget neutral;
  neutral.position = Eigen::Vector3d(0.0, 0.0, -cfg_.map.h);
  foot_targets_.fill(neutral.position);
  step_count_ = 0;
  needs_reset_ = false;
  return observe_current();
}

Eigen::VectorXd Environment::observe_current() const {
  return observe(state_, last_action_, command_);
}

void Environment::apply_action_filter(const Eigen::VectorXd& raw) {
  const double alpha =
      cfg_.dt_policy() / (cfg_.action_filter_tau + cfg_.dt_policy());
  if (cfg_.variant == Variant::kCpgRl) {
    const MapParams target = decode_action(raw, cfg_.map);
    map_params_.d_step += alpha * (target.d_step - map_params_.d_step);
    map_params_.phi_dir += alpha * (target.phi_dir - map_params_.phi_dir);
    for (int i = 0; i < kNumLegs; ++i) {
      map_params_.k1[i] += alpha * (target.k1[i] - map_params_.k1[i]);
    }
  } else {
    // Baseline: raw directly encodes foot positions (x, y, z) per leg in the
    // map-output frame, squashed into the same workspace the map spans.
    const ActionBounds& b = cfg_.map.bounds;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      Eigen::Vector3d t;
      t.x() = squash(raw[3 * leg], -b.d_step_hi, b.d_step_hi);
      t.y() = squash(raw[3 * leg + 1], -b.d_step_hi, b.d_step_hi);
      t.z() = squash(raw[3 * leg + 2], -cfg_.map.h - cfg_.map.k2,
                     -cfg_.map.h + b.k1_hi);
      foot_targets_[leg] += alpha * (t - foot_targets_[leg]);
    }
  }
}

Eigen::VectorXd Environment::desired_joint_positions() const {
  Eigen::VectorXd q_des(kNumJoints);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    FootTarget map_out;
    if (cfg_.variant == Variant::kCpgRl) {
      map_out = map_foot_position(cpg_state_.states[leg], map_params_, leg);
    } else {
      map_out.position = foot_targets_[leg];
    }
    const LegJointAngles q = solve_leg_ik_clamped(
        cfg_.robot, assemble_foot_target(cfg_.robot, leg, map_out));
    q_des.segment<3>(3 * leg) = q.vec();
  }
  return q_des;
}

StepResult Environment::step(const Eigen::VectorXd& raw_action) {
  StepResult result;
  if (needs_reset_) {
    throw HexError("Environment::step called before reset");
  }
  apply_action_filter(raw_action);

  const RobotState prev = state_;
  StepAggregates agg;
  bool diverged = false;
  for (int s = 0; s < cfg_.substeps; ++s) {
    if (cfg_.variant == Variant::kCpgRl) {
      cpg_state_ = step_network(cpg_state_, cfg_.cpg, cfg_.dt_physics);
    }
    const Eigen::VectorXd q_des = desired_joint_positions();
    const Eigen::VectorXd tau =
        pd_torque(q_des, state_, cfg_.robot.gains, cfg_.robot.torque_limit);
    try {
      auto [next, creport] =
          step_dynamics(state_, tau, *terrain_, cfg_.dt_physics, cfg_.robot);
      state_ = next;
      agg.mean_sq_torque += tau.squaredNorm();
      agg.collision = agg.collision || creport.undesired_contact.any();
      for (int leg = 0; leg < kNumLegs; ++leg) {
        agg.touchdown_air_time[leg] += creport.touchdown_air_time[leg];
      }
    } catch (const NumericalDivergence&) {
      diverged = true;
      break;
    }
  }
  agg.mean_sq_torque /= cfg_.substeps;

  result.info.breakdown = compute_reward(prev, state_, raw_action,
                                         last_action_, agg, command_,
                                         cfg_.reward);
  result.reward = result.info.breakdown.total;
  last_action_ = raw_action;
  ++step_count_;

  const double clearance =
      state_.base_position.z() -
      terrain_->height_at(state_.base_position.x(), state_.base_position.y());
  result.info.diverged = diverged;
  result.info.collision = agg.collision;
  result.info.fell = clearance < cfg_.fall_height;
  result.info.timeout = step_count_ >= cfg_.episode_steps();
  result.done = diverged || result.info.collision || result.info.fell ||
                result.info.timeout;
  result.info.done = result.done;
  result.info.success = result.info.timeout && !result.info.collision &&
                        !result.info.fell && !diverged;
  result.info.lin_vel_error =
      std::hypot(state_.base_lin_vel.x() - command_.vx,
                 state_.base_lin_vel.y() - command_.vy);
  needs_reset_ = result.done;
  result.observation = observe_current();
  return result;
}

}  // namespace hexcpg
