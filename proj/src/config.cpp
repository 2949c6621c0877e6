#include "hexcpg/config.hpp"

#include <cmath>
#include <fstream>

namespace hexcpg {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

json mounts_to_json(const LegGeometry& g) {
  json arr = json::array();
  for (int i = 0; i < kNumLegs; ++i) {
    const Eigen::Vector3d t = g.hip_offsets[i].translation();
    const double yaw = std::atan2(g.hip_offsets[i].linear()(1, 0),
                                  g.hip_offsets[i].linear()(0, 0));
    arr.push_back({{"leg", kLegNames[i]},
                   {"x", t.x()},
                   {"y", t.y()},
                   {"z", t.z()},
                   {"yaw", yaw}});
  }
  return arr;
}

void mounts_from_json(const json& arr, LegGeometry& g) {
  if (!arr.is_array() || arr.size() != kNumLegs) {
    throw ConfigError("robot.hip_mounts: expected 6 entries");
  }
  for (int i = 0; i < kNumLegs; ++i) {
    const json& m = arr[i];
    g.hip_offsets[i] = Eigen::Isometry3d::Identity();
    g.hip_offsets[i].translate(Eigen::Vector3d(
        get_or(m, "x", 0.0), get_or(m, "y", 0.0), get_or(m, "z", 0.0)));
    g.hip_offsets[i].rotate(
        Eigen::AngleAxisd(get_or(m, "yaw", 0.0), Eigen::Vector3d::UnitZ()));
  }
}

}  // namespace

nlohmann::json robot_to_json(const RobotConfig& robot) {
  json j;
  j["links"] = {{"l_coxa", robot.geometry.l_coxa},
                {"l_femur", robot.geometry.l_femur},
                {"l_tibia", robot.geometry.l_tibia}};
  j["hip_mounts"] = mounts_to_json(robot.geometry);
  j["joint_limits"] = {
      {"lower", {robot.joint_limits.lower[0], robot.joint_limits.lower[1],
                 robot.joint_limits.lower[2]}},
      {"upper", {robot.joint_limits.upper[0], robot.joint_limits.upper[1],
                 robot.joint_limits.upper[2]}}};
  j["gains"] = {{"kp", robot.gains.kp}, {"kd", robot.gains.kd}};
  j["torque_limit"] = robot.torque_limit;
  j["base_mass"] = robot.base_mass;
  j["base_inertia"] = {robot.base_inertia[0], robot.base_inertia[1],
                       robot.base_inertia[2]};
  j["base_half_thickness"] = robot.base_half_thickness;
  j["hip_clearance"] = robot.hip_clearance;
  j["neutral_foot_radius"] = robot.neutral_foot_radius;
  j["reflected_inertia"] = robot.reflected_inertia;
  j["contact"] = {{"k_normal", robot.contact.k_normal},
                  {"c_normal", robot.contact.c_normal},
                  {"mu_friction", robot.contact.mu_friction},
                  {"k_tangent", robot.contact.k_tangent}};
  j["gravity"] = robot.gravity;
  return j;
}

RobotConfig robot_from_json(const nlohmann::json& j) {
  RobotConfig robot;
  if (j.contains("links")) {
    const json& l = j.at("links");
    robot.geometry.l_coxa = get_or(l, "l_coxa", robot.geometry.l_coxa);
    robot.geometry.l_femur = get_or(l, "l_femur", robot.geometry.l_femur);
    robot.geometry.l_tibia = get_or(l, "l_tibia", robot.geometry.l_tibia);
  }
  if (j.contains("hip_mounts")) mounts_from_json(j.at("hip_mounts"), robot.geometry);
  if (j.contains("joint_limits")) {
    const json& lim = j.at("joint_limits");
    const auto lo = get_or<std::vector<double>>(lim, "lower", {});
    const auto hi = get_or<std::vector<double>>(lim, "upper", {});
    if (lo.size() == 3) robot.joint_limits.lower = Eigen::Vector3d(lo[0], lo[1], lo[2]);
    if (hi.size() == 3) robot.joint_limits.upper = Eigen::Vector3d(hi[0], hi[1], hi[2]);
  }
  if (j.contains("gains")) {
    robot.gains.kp = get_or(j.at("gains"), "kp", robot.gains.kp);
    robot.gains.kd = get_or(j.at("gains"), "kd", robot.gains.kd);
  }
  robot.torque_limit = get_or(j, "torque_limit", robot.torque_limit);
  robot.base_mass = get_or(j, "base_mass", robot.base_mass);
  if (j.contains("base_inertia")) {
    const auto bi = j.at("base_inertia").get<std::vector<double>>();
    if (bi.size() != 3) throw ConfigError("robot.base_inertia: expected 3 values");
    robot.base_inertia = Eigen::Vector3d(bi[0], bi[1], bi[2]);
  }
  robot.base_half_thickness =
      get_or(j, "base_half_thickness", robot.base_half_thickness);
  robot.hip_clearance = get_or(j, "hip_clearance", robot.hip_clearance);
  robot.neutral_foot_radius =
      get_or(j, "neutral_foot_radius", robot.neutral_foot_radius);
  robot.reflected_inertia = get_or(j, "reflected_inertia", robot.reflected_inertia);
  if (j.contains("contact")) {
    const json& c = j.at("contact");
    robot.contact.k_normal = get_or(c, "k_normal", robot.contact.k_normal);
    robot.contact.c_normal = get_or(c, "c_normal", robot.contact.c_normal);
    robot.contact.mu_friction = get_or(c, "mu_friction", robot.contact.mu_friction);
    robot.contact.k_tangent = get_or(c, "k_tangent", robot.contact.k_tangent);
  }
  robot.gravity = get_or(j, "gravity", robot.gravity);
  return robot;
}

RobotConfig load_robot_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("robot config parse error: " + std::string(e.what()));
  }
  return robot_from_json(j);
}

EnvConfig RunConfig::make_env_config() const {
  EnvConfig env;
  env.robot = robot;
  env.cpg = cpg;
  env.gait_phases = gait_phases;
  env.map = map;
  env.commands = commands;
  env.reward = reward_variant == "reward2"
                   ? RewardConfig::reward2(dt_physics * substeps)
                   : RewardConfig::reward1(dt_physics * substeps);
  env.variant = variant_from_name(variant);
  env.dt_physics = dt_physics;
  env.substeps = substeps;
  env.episode_seconds = episode_seconds;
  env.fall_height = fall_height;
  env.yaw_range = yaw_range;
  env.action_filter_tau = action_filter_tau;
  env.spawn = Eigen::Vector2d(1.0, terrain.extent.width / 2.0);
  return env;
}

void RunConfig::validate() const {
  if (variant != "cpg_rl" && variant != "rl_baseline") {
    throw ConfigError("variant: must be cpg_rl or rl_baseline, got '" +
                      variant + "'");
  }
  if (reward_variant != "reward1" && reward_variant != "reward2") {
    throw ConfigError("reward: must be reward1 or reward2, got '" +
                      reward_variant + "'");
  }
  if (n_updates <= 0) throw ConfigError("n_updates: must be positive");
  if (dt_physics <= 0.0) throw ConfigError("dt_physics: must be positive");
  if (substeps <= 0) throw ConfigError("substeps: must be positive");
  if (terrain.difficulty < 0.0 || terrain.difficulty > 1.0) {
    throw ConfigError("terrain.difficulty: must lie in [0, 1]");
  }
  cpg.validate();
  ppo.validate();
  if (robot.geometry.max_reach() <= map.h + map.k2 * cpg.mu) {
    throw ConfigError("robot: leg reach must exceed nominal stance depth");
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  j["variant"] = cfg.variant;
  j["reward"] = cfg.reward_variant;
  j["terrain"] = {{"type", cfg.terrain.curriculum
                              ? "curriculum"
                              : terrain_type_name(cfg.terrain.type)},
                  {"difficulty", cfg.terrain.difficulty},
                  {"wave_wavelength", cfg.terrain.wave_wavelength},
                  {"length", cfg.terrain.extent.length},
                  {"width", cfg.terrain.extent.width},
                  {"resolution", cfg.terrain.extent.resolution}};
  j["seed"] = cfg.seed;
  j["n_updates"] = cfg.n_updates;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["n_threads"] = cfg.n_threads;
  j["out_dir"] = cfg.out_dir;
  j["robot"] = robot_to_json(cfg.robot);
  j["cpg"] = {{"alpha", cfg.cpg.alpha},
              {"beta", cfg.cpg.beta},
              {"mu", cfg.cpg.mu},
              {"omega", cfg.cpg.omega},
              {"k", cfg.cpg.k},
              {"coupling", cfg.cpg.coupling == CouplingForm::kAdditive
                               ? "additive"
                               : "rotation"},
              {"integrator",
               cfg.cpg.integrator == Integrator::kEuler ? "euler" : "rk4"},
              {"gait_phases", cfg.gait_phases}};
  j["map"] = {{"h", cfg.map.h},
              {"k2", cfg.map.k2},
              {"invert_stance_branch", cfg.map.invert_stance_branch},
              {"k1_max", cfg.map.bounds.k1_hi},
              {"d_step_max", cfg.map.bounds.d_step_hi},
              {"phi_max", cfg.map.bounds.phi_hi}};
  j["commands"] = {{"vx", {cfg.commands.vx_lo, cfg.commands.vx_hi}},
                   {"wz", {cfg.commands.wz_lo, cfg.commands.wz_hi}}};
  j["sim"] = {{"dt_physics", cfg.dt_physics},
              {"substeps", cfg.substeps},
              {"episode_seconds", cfg.episode_seconds},
              {"fall_height", cfg.fall_height},
              {"yaw_range", cfg.yaw_range},
              {"action_filter_tau", cfg.action_filter_tau}};
  j["ppo"] = {{"n_envs", cfg.ppo.n_envs},
              {"horizon", cfg.ppo.horizon},
              {"minibatch_size", cfg.ppo.minibatch_size},
              {"n_epochs", cfg.ppo.n_epochs},
              {"clip", cfg.ppo.clip},
              {"entropy_coef", cfg.ppo.entropy_coef},
              {"gamma", cfg.ppo.gamma},
              {"gae_lambda", cfg.ppo.gae_lambda},
              {"desired_kl", cfg.ppo.desired_kl},
              {"lr", cfg.ppo.lr},
              {"value_coef", cfg.ppo.value_coef},
              {"clip_value", cfg.ppo.clip_value},
              {"hidden", cfg.ppo.hidden},
              {"init_log_std", cfg.ppo.init_log_std}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.variant = get_or<std::string>(j, "variant", cfg.variant);
  cfg.reward_variant = get_or<std::string>(j, "reward", cfg.reward_variant);
  if (j.contains("terrain")) {
    const json& t = j.at("terrain");
    const std::string type = get_or<std::string>(t, "type", "flat");
    if (type == "curriculum") {
      cfg.terrain.curriculum = true;
    } else {
      cfg.terrain.type = terrain_type_from_name(type);
    }
    cfg.terrain.difficulty = get_or(t, "difficulty", cfg.terrain.difficulty);
    cfg.terrain.wave_wavelength =
        get_or(t, "wave_wavelength", cfg.terrain.wave_wavelength);
    cfg.terrain.extent.length = get_or(t, "length", cfg.terrain.extent.length);
    cfg.terrain.extent.width = get_or(t, "width", cfg.terrain.extent.width);
    cfg.terrain.extent.resolution =
        get_or(t, "resolution", cfg.terrain.extent.resolution);
  }
  cfg.seed = get_or<uint64_t>(j, "seed", cfg.seed);
  cfg.n_updates = get_or(j, "n_updates", cfg.n_updates);
  cfg.checkpoint_every = get_or(j, "checkpoint_every", cfg.checkpoint_every);
  cfg.n_threads = get_or(j, "n_threads", cfg.n_threads);
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
  if (j.contains("robot_file")) {
    cfg.robot = load_robot_config(j.at("robot_file").get<std::string>());
  }
  if (j.contains("robot")) cfg.robot = robot_from_json(j.at("robot"));
  if (j.contains("cpg")) {
    const json& c = j.at("cpg");
    cfg.cpg.alpha = get_or(c, "alpha", cfg.cpg.alpha);
    cfg.cpg.beta = get_or(c, "beta", cfg.cpg.beta);
    cfg.cpg.mu = get_or(c, "mu", cfg.cpg.mu);
    cfg.cpg.omega = get_or(c, "omega", cfg.cpg.omega);
    cfg.cpg.k = get_or(c, "k", cfg.cpg.k);
    const std::string coupling = get_or<std::string>(c, "coupling", "additive");
    if (coupling == "additive") {
      cfg.cpg.coupling = CouplingForm::kAdditive;
    } else if (coupling == "rotation") {
      cfg.cpg.coupling = CouplingForm::kRotation;
    } else {
      throw ConfigError("cpg.coupling: must be additive or rotation");
    }
    const std::string integ = get_or<std::string>(c, "integrator", "euler");
    if (integ == "euler") {
      cfg.cpg.integrator = Integrator::kEuler;
    } else if (integ == "rk4") {
      cfg.cpg.integrator = Integrator::kRk4;
    } else {
      throw ConfigError("cpg.integrator: must be euler or rk4");
    }
    if (c.contains("gait_phases")) {
      const auto phases = c.at("gait_phases").get<std::vector<double>>();
      if (phases.size() != kNumLegs) {
        throw ConfigError("cpg.gait_phases: expected 6 values");
      }
      std::copy(phases.begin(), phases.end(), cfg.gait_phases.begin());
    }
  }
  cfg.cpg.theta = phase_matrix_from_phases(cfg.gait_phases);
  if (j.contains("map")) {
    const json& m = j.at("map");
    cfg.map.h = get_or(m, "h", cfg.map.h);
    cfg.map.k2 = get_or(m, "k2", cfg.map.k2);
    cfg.map.invert_stance_branch =
        get_or(m, "invert_stance_branch", cfg.map.invert_stance_branch);
    cfg.map.bounds.k1_hi = get_or(m, "k1_max", cfg.map.bounds.k1_hi);
    cfg.map.bounds.d_step_hi = get_or(m, "d_step_max", cfg.map.bounds.d_step_hi);
    cfg.map.bounds.phi_hi = get_or(m, "phi_max", cfg.map.bounds.phi_hi);
    cfg.map.bounds.phi_lo = -cfg.map.bounds.phi_hi;
  }
  if (j.contains("commands")) {
    const json& c = j.at("commands");
    const auto vx = get_or<std::vector<double>>(c, "vx", {});
    const auto wz = get_or<std::vector<double>>(c, "wz", {});
    if (vx.size() == 2) {
      cfg.commands.vx_lo = vx[0];
      cfg.commands.vx_hi = vx[1];
    }
    if (wz.size() == 2) {
      cfg.commands.wz_lo = wz[0];
      cfg.commands.wz_hi = wz[1];
    }
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    cfg.dt_physics = get_or(s, "dt_physics", cfg.dt_physics);
    cfg.substeps = get_or(s, "substeps", cfg.substeps);
    cfg.episode_seconds = get_or(s, "episode_seconds", cfg.episode_seconds);
    cfg.fall_height = get_or(s, "fall_height", cfg.fall_height);
    cfg.yaw_range = get_or(s, "yaw_range", cfg.yaw_range);
    cfg.action_filter_tau = get_or(s, "action_filter_tau", cfg.action_filter_tau);
  }
  if (j.contains("ppo")) {
    const json& p = j.at("ppo");
    cfg.ppo.n_envs = get_or(p, "n_envs", cfg.ppo.n_envs);
    cfg.ppo.horizon = get_or(p, "horizon", cfg.ppo.horizon);
    cfg.ppo.minibatch_size = get_or(p, "minibatch_size", cfg.ppo.minibatch_size);
    cfg.ppo.n_epochs = get_or(p, "n_epochs", cfg.ppo.n_epochs);
    cfg.ppo.clip = get_or(p, "clip", cfg.ppo.clip);
    cfg.ppo.entropy_coef = get_or(p, "entropy_coef", cfg.ppo.entropy_coef);
    cfg.ppo.gamma = get_or(p, "gamma", cfg.ppo.gamma);
    cfg.ppo.gae_lambda = get_or(p, "gae_lambda", cfg.ppo.gae_lambda);
    cfg.ppo.desired_kl = get_or(p, "desired_kl", cfg.ppo.desired_kl);
    cfg.ppo.lr = get_or(p, "lr", cfg.ppo.lr);
    cfg.ppo.value_coef = get_or(p, "value_coef", cfg.ppo.value_coef);
    cfg.ppo.clip_value = get_or(p, "clip_value", cfg.ppo.clip_value);
    cfg.ppo.hidden = get_or(p, "hidden", cfg.ppo.hidden);
    cfg.ppo.init_log_std = get_or(p, "init_log_std", cfg.ppo.init_log_std);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << to_json(cfg).dump(2) << '\n';
}

}  // namespace hexcpg
