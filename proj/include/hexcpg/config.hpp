#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hexcpg/mdp.hpp"
#include "hexcpg/ppo.hpp"

namespace hexcpg {

struct TerrainSpec {
  TerrainType type = TerrainType::kFlat;
  bool curriculum = false;
  double difficulty = 1.0;
  double wave_wavelength = 2.0;
  TerrainExtent extent{24.0, 8.0, 0.05};
};

// Everything needed to reproduce a run. A saved config restores the run
// bit-exactly together with its seed.
struct RunConfig {
  std::string variant = "cpg_rl";
  std::string reward_variant = "reward1";
  TerrainSpec terrain;
  uint64_t seed = 1;
  int n_updates = 300;
  int checkpoint_every = 100;
  int n_threads = 2;
  std::string out_dir = "out";

  RobotConfig robot;
  CpgParams cpg;
  std::array<double, kNumLegs> gait_phases = tripod_phases();
  MapConstants map;
  CommandRanges commands;
  PpoConfig ppo;

  double dt_physics = 1e-3;
  int substeps = 5;
  double episode_seconds = 20.0;
  double fall_height = 0.12;
  double yaw_range = 0.2;
  double action_filter_tau = 0.05;

  EnvConfig make_env_config() const;
  void validate() const;  // throws ConfigError with field names
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

// Robot morphology file: link lengths, hip mounts, joint limits, mass
// properties, PD gains.
nlohmann::json robot_to_json(const RobotConfig& robot);
RobotConfig robot_from_json(const nlohmann::json& j);
RobotConfig load_robot_config(const std::string& path);

}  // namespace hexcpg
