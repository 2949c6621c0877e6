#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hexcpg/config.hpp"
#include "hexcpg/ppo.hpp"

namespace hexcpg {

// Terrain instantiation for one env; curriculum runs promote/demote blocks
// on episode boundaries.
std::shared_ptr<const Heightfield> make_terrain(const TerrainSpec& spec,
                                                uint64_t seed);

std::unique_ptr<Environment> make_environment(const RunConfig& cfg,
                                              uint64_t env_seed);

struct UpdateRecord {
  int update = 0;
  double mean_step_reward = 0.0;
  double mean_episode_return = 0.0;  // NaN when no episode finished
  int episodes_finished = 0;
  double success_rate = 0.0;
  double mean_lin_vel_error = 0.0;
  std::array<double, kNumRewardTerms> term_means{};  // per-step means
  double kl = 0.0;
  double clip_fraction = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<UpdateRecord> records;
  std::string checkpoint_path;
  std::string metrics_path;
  PolicyNetwork net;
};

// Full PPO run: writes the resolved config, metrics CSV and checkpoints to
// cfg.out_dir. `quiet` suppresses the per-update progress line.
TrainResult train_run(const RunConfig& cfg, bool quiet = false);

struct EvalRow {
  std::string terrain;
  double difficulty = 0.0;
  double success_rate = 0.0;
  double mean_lin_vel_error = 0.0;
  double mean_return = 0.0;
};

// Difficulty sweep of a checkpoint over one terrain type; one CSV row per
// (terrain, difficulty) level.
std::vector<EvalRow> eval_sweep(const std::string& checkpoint_path,
                                const RunConfig& cfg, TerrainType type,
                                int n_levels, int n_episodes,
                                const std::string& csv_path);

struct GaitPairReport {
  int leg_i = 0, leg_j = 0;
  double target = 0.0;    // rad
  double measured = 0.0;  // rad
};

struct GaitReport {
  std::vector<GaitPairReport> pairs;        // all 15 unordered pairs
  std::array<double, kNumLegs> duty_factor{};
  std::array<double, kNumLegs> swing_clearance{};  // k1 * mu
  double max_phase_error = 0.0;
};

// Open-loop CPG run (constant mid-range action): measured phase differences,
// duty factors and swing clearances vs. targets.
GaitReport gait_check(const RunConfig& cfg, double seconds = 10.0);
void print_gait_report(const GaitReport& report, std::ostream& os);

// Deterministic rollout dumped as a trajectory CSV (one row per policy step).
void export_trajectory(const std::string& checkpoint_path, const RunConfig& cfg,
                       double seconds, const std::string& csv_path);

}  // namespace hexcpg
