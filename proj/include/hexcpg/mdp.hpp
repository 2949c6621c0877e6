#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>

#include "hexcpg/cpg.hpp"
#include "hexcpg/mapping.hpp"
#include "hexcpg/sim.hpp"

namespace hexcpg {

struct Command {
  double vx = 0.0;  // m/s, body x
  double vy = 0.0;  // m/s, body y (held at 0)
  double wz = 0.0;  // rad/s, yaw rate
};

struct CommandRanges {
  double vx_lo = 0.8, vx_hi = 1.0;
  double wz_lo = -0.1, wz_hi = 0.1;
};

Command sample_command(Rng& rng, const CommandRanges& ranges);

// Policy action bounds (decoded units).
struct ActionBounds {
  double k1_lo = 0.0, k1_hi = 0.12;        // m
  double d_step_lo = 0.0, d_step_hi = 0.15;  // m
  double phi_lo = -0.6, phi_hi = 0.6;      // rad
};

// Constant part of the map plus decode/filter settings.
struct MapConstants {
  double h = 0.25;
  double k2 = 0.02;
  bool invert_stance_branch = false;
  ActionBounds bounds;
};

// Affine squash of raw in [-1, 1] onto [lo, hi]; raw clamped first, so the
// bounds are attained at finite inputs and 0 maps to the midpoint.
double squash(double raw, double lo, double hi);

// 8 raw outputs -> {k1 x6, d_step, phi_dir} merged with the constants.
MapParams decode_action(const Eigen::VectorXd& raw, const MapConstants& mc);

// Observation layout: v_b(3), w_b(3), q(18), qdot(18), g_proj(3),
// last_action(action_dim), command(3). 56 entries for the 8-action policy.
Eigen::VectorXd observe(const RobotState& state,
                        const Eigen::VectorXd& last_action, const Command& cmd);

// Fixed per-component scaling applied before the policy network.
Eigen::VectorXd normalize_observation(const Eigen::VectorXd& obs,
                                      int action_dim);

// exp(-||err||^2 / 0.25)
double tracking_kernel(const Eigen::VectorXd& err);
double tracking_kernel(double err);

enum RewardTerm : int {
  kLinVelTrack = 0,
  kAngVelTrack,
  kLinVelPenalty,
  kAngVelPenalty,
  kHipRotation,
  kJointVel,
  kJointAcc,
  kActionRate,
  kTorque,
  kCollision,
  kFeetAirTime,
  kNumRewardTerms
};

extern const std::array<const char*, kNumRewardTerms> kRewardTermNames;

struct RewardConfig {
  double dt = 0.005;  // policy period (s)
  std::array<double, kNumRewardTerms> weights{};  // multiples of dt
  std::array<bool, kNumRewardTerms> enabled{};
  bool hip_only_vel_acc = false;  // qdot/qddot penalties over hips only
  std::string variant = "reward1";

  static RewardConfig reward1(double dt = 0.005);
  static RewardConfig reward2(double dt = 0.005);
};

// Per-substep quantities aggregated over one policy step.
struct StepAggregates {
  double mean_sq_torque = 0.0;  // mean over substeps of ||tau||^2
  bool collision = false;
  std::array<double, kNumLegs> touchdown_air_time{};  // 0 = no touchdown
};

struct RewardBreakdown {
  std::array<double, kNumRewardTerms> terms{};  // weighted contributions
  double total = 0.0;
};

RewardBreakdown compute_reward(const RobotState& prev, const RobotState& next,
                               const Eigen::VectorXd& action,
                               const Eigen::VectorXd& last_action,
                               const StepAggregates& agg, const Command& cmd,
                               const RewardConfig& cfg);

enum class Variant { kCpgRl, kRlBaseline };

Variant variant_from_name(const std::string& name);
const char* variant_name(Variant v);

int action_dim(Variant v);       // 8 or 18
int observation_dim(Variant v);  // 56 or 66

struct EnvConfig {
  RobotConfig robot;
  CpgParams cpg;
  std::array<double, kNumLegs> gait_phases = tripod_phases();
  MapConstants map;
  CommandRanges commands;
  RewardConfig reward = RewardConfig::reward1();
  Variant variant = Variant::kCpgRl;
  double dt_physics = 1e-3;
  int substeps = 5;  // 200 Hz policy over 1000 Hz physics
  double episode_seconds = 20.0;
  double fall_height = 0.12;     // base clearance termination threshold
  double yaw_range = 0.2;        // spawn heading randomization
  double action_filter_tau = 0.05;
  Eigen::Vector2d spawn{1.0, 0.0};

  double dt_policy() const { return dt_physics * substeps; }
  int episode_steps() const {
    return static_cast<int>(std::round(episode_seconds / dt_policy()));
  }
};

struct StepInfo {
  RewardBreakdown breakdown;
  bool done = false;
  bool success = false;
  bool timeout = false;
  bool collision = false;
  bool fell = false;
  bool diverged = false;
  double lin_vel_error = 0.0;  // ||v_xy - cmd_xy|| this step
};

struct StepResult {
  Eigen::VectorXd observation;  // raw (unnormalized)
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// One simulated robot: CPG (or direct foot targets), IK, PD, physics,
// reward and termination. Owns its RNG; instances are independent.
class Environment {
 public:
  Environment(EnvConfig cfg, std::shared_ptr<const Heightfield> terrain,
              uint64_t seed);

  Eigen::VectorXd reset(uint64_t seed);  // reseeds the env stream
  Eigen::VectorXd reset();               // continues the env stream
  StepResult step(const Eigen::VectorXd& raw_action);

  // Swap the terrain for the next episode (curriculum block changes).
  void set_terrain(std::shared_ptr<const Heightfield> terrain) {
    terrain_ = std::move(terrain);
  }

  const RobotState& state() const { return state_; }
  const Command& command() const { return command_; }
  const EnvConfig& config() const { return cfg_; }
  const OscillatorNetworkState& cpg_state() const { return cpg_state_; }
  const MapParams& filtered_params() const { return map_params_; }
  Rng& rng() { return rng_; }
  int steps_taken() const { return step_count_; }
  double time() const { return step_count_ * cfg_.dt_policy(); }

 private:
  Eigen::VectorXd observe_current() const;
  void apply_action_filter(const Eigen::VectorXd& raw);
  Eigen::VectorXd desired_joint_positions() const;

  EnvConfig cfg_;
  std::shared_ptr<const Heightfield> terrain_;
  Rng rng_;
  RobotState state_;
  OscillatorNetworkState cpg_state_;
  MapParams map_params_;  // filtered (cpg_rl variant)
  std::array<Eigen::Vector3d, kNumLegs> foot_targets_;  // filtered (baseline)
  Eigen::VectorXd last_action_;
  Command command_;
  int step_count_ = 0;
  bool needs_reset_ = true;
};

}  // namespace hexcpg
