#include "hexcpg/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>

namespace hexcpg {

std::shared_ptr<const Heightfield> make_terrain(const TerrainSpec& spec,
                                                uint64_t seed) {
  Heightfield hf;
  switch (spec.type) {
    case TerrainType::kFlat:
      hf = gen_flat({2.0, 2.0, spec.extent.resolution});
      break;
    case TerrainType::kUniform:
      hf = gen_random_uniform(uniform_range_for(spec.difficulty), seed,
                              spec.extent);
      break;
    case TerrainType::kWave:
      hf = gen_wave(wave_amplitude_for(spec.difficulty), spec.wave_wavelength,
                    spec.extent);
      break;
    case TerrainType::kSlope:
      hf = gen_slope(slope_angle_for(spec.difficulty), spec.extent);
      break;
  }
  return std::make_shared<const Heightfield>(std::move(hf));
}

std::unique_ptr<Environment> make_environment(const RunConfig& cfg,
                                              uint64_t env_seed) {
  return std::make_unique<Environment>(cfg.make_env_config(),
                                       make_terrain(cfg.terrain, env_seed),
                                       env_seed);
}

namespace {

// Per-env curriculum walker over the 20x10 grid: success promotes a block,
// failure demotes. Heightfields are cached per (row, col).
class CurriculumSampler {
 public:
  CurriculumSampler(const RunConfig& cfg, int n_envs)
      : cfg_(cfg), grid_(build_curriculum(cfg.seed)) {
    rows_.resize(n_envs);
    cols_.assign(n_envs, 0);
    for (int i = 0; i < n_envs; ++i) rows_[i] = i % CurriculumGrid::kRows;
  }

  std::shared_ptr<const Heightfield> initial(int env) {
    return block_terrain(rows_[env], cols_[env]);
  }

  std::shared_ptr<const Heightfield> next(int env, bool success) {
    if (success) {
      cols_[env] = std::min(cols_[env] + 1, CurriculumGrid::kCols - 1);
    } else {
      cols_[env] = std::max(cols_[env] - 1, 0);
    }
    return block_terrain(rows_[env], cols_[env]);
  }

 private:
  std::shared_ptr<const Heightfield> block_terrain(int row, int col) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_pair(row, col);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const TerrainBlock& block = grid_.blocks[row][col];
    TerrainSpec spec = cfg_.terrain;
    spec.type = block.type;
    spec.difficulty = block.difficulty;
    auto hf = make_terrain(spec, cfg_.seed + 977 * row + col);
    cache_[key] = hf;
    return hf;
  }

  const RunConfig& cfg_;
  CurriculumGrid grid_;
  std::vector<int> rows_, cols_;
  std::map<std::pair<int, int>, std::shared_ptr<const Heightfield>> cache_;
  std::mutex mutex_;
};

void write_metrics_header(std::ofstream& out) {
  out << "update,mean_step_reward,mean_episode_return,episodes,success_rate,"
         "mean_lin_vel_error";
  for (const char* name : kRewardTermNames) out << ',' << name;
  out << ",kl,clip_fraction,lr\n";
}

void write_metrics_row(std::ofstream& out, const UpdateRecord& r) {
  out << r.update << ',' << r.mean_step_reward << ',';
  if (std::isnan(r.mean_episode_return)) {
    out << "";
  } else {
    out << r.mean_episode_return;
  }
  out << ',' << r.episodes_finished << ',' << r.success_rate << ','
      << r.mean_lin_vel_error;
  for (double v : r.term_means) out << ',' << v;
  out << ',' << r.kl << ',' << r.clip_fraction << ',' << r.lr << '\n';
}

}  // namespace

TrainResult train_run(const RunConfig& cfg, bool quiet) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  save_run_config(cfg, cfg.out_dir + "/config.json");

  const Variant variant = variant_from_name(cfg.variant);

  std::vector<std::unique_ptr<Environment>> envs;
  auto sampler = cfg.terrain.curriculum
                     ? std::make_unique<CurriculumSampler>(cfg, cfg.ppo.n_envs)
                     : nullptr;
  for (int i = 0; i < cfg.ppo.n_envs; ++i) {
    const uint64_t env_seed = cfg.seed * 1000003ULL + i;
    auto terrain = sampler ? sampler->initial(i)
                           : make_terrain(cfg.terrain, env_seed);
    envs.push_back(std::make_unique<Environment>(cfg.make_env_config(),
                                                 std::move(terrain), env_seed));
  }
  VecEnv venv(std::move(envs), cfg.n_threads);
  if (sampler) {
    venv.set_reset_hook([&sampler](int i, const StepInfo& info,
                                   Environment& env) {
      env.set_terrain(sampler->next(i, info.success));
    });
  }
  venv.reset_all(cfg.seed * 1000003ULL);

  Rng init_rng(cfg.seed);
  PolicyNetwork net =
      PolicyNetwork::make(observation_dim(variant), action_dim(variant),
                          cfg.ppo.hidden, cfg.ppo.init_log_std, init_rng);
  Adam opt(net.param_count());
  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  PpoConfig ppo_cfg = cfg.ppo;

  TrainResult result;
  result.metrics_path = cfg.out_dir + "/metrics.csv";
  std::ofstream metrics(result.metrics_path);
  if (!metrics) throw HexError("cannot write " + result.metrics_path);
  write_metrics_header(metrics);

  for (int update = 1; update <= cfg.n_updates; ++update) {
    RolloutBatch batch = collect_rollout(venv, net, cfg.ppo.horizon);

    UpdateStats stats;
    try {
      stats = ppo_update(net, opt, batch, ppo_cfg, shuffle_rng);
    } catch (const NonFiniteLoss& e) {
      std::cerr << "update " << update << " skipped: " << e.what() << '\n';
      stats.lr = ppo_cfg.lr;
    }

    UpdateRecord rec;
    rec.update = update;
    rec.mean_step_reward = batch.rewards.mean();
    const auto& eps = batch.finished_episodes;
    rec.episodes_finished = static_cast<int>(eps.size());
    if (!eps.empty()) {
      double ret = 0.0, succ = 0.0, err = 0.0;
      for (const EpisodeStats& e : eps) {
        ret += e.total_reward;
        succ += e.success ? 1.0 : 0.0;
        err += e.mean_lin_vel_error;
      }
      rec.mean_episode_return = ret / eps.size();
      rec.success_rate = succ / eps.size();
      rec.mean_lin_vel_error = err / eps.size();
    } else {
      rec.mean_episode_return = std::nan("");
    }
    {
      // Per-step term means over the episodes that finished in this window.
      std::array<double, kNumRewardTerms> sums{};
      int count = 0;
      for (const EpisodeStats& e : eps) {
        for (int k = 0; k < kNumRewardTerms; ++k) sums[k] += e.term_sums[k];
        count += e.length;
      }
      if (count > 0) {
        for (int k = 0; k < kNumRewardTerms; ++k) {
          rec.term_means[k] = sums[k] / count;
        }
      }
    }
    rec.kl = stats.kl;
    rec.clip_fraction = stats.clip_fraction;
    rec.lr = stats.lr;
    write_metrics_row(metrics, rec);
    result.records.push_back(rec);

    if (!quiet && (update % 10 == 0 || update == 1)) {
      std::cout << "update " << update << "/" << cfg.n_updates
                << "  step_reward " << rec.mean_step_reward
                << "  ep_return " << rec.mean_episode_return << "  kl "
                << rec.kl << "  lr " << rec.lr << std::endl;
    }

    if (cfg.checkpoint_every > 0 && update % cfg.checkpoint_every == 0 &&
        update < cfg.n_updates) {
      CheckpointMeta meta{cfg.variant, net.obs_dim(), net.act_dim(),
                          cfg.ppo.hidden};
      save_checkpoint(cfg.out_dir + "/checkpoint_" + std::to_string(update) +
                          ".bin",
                      net, meta);
    }
  }

  CheckpointMeta meta{cfg.variant, net.obs_dim(), net.act_dim(), cfg.ppo.hidden};
  result.checkpoint_path = cfg.out_dir + "/checkpoint_final.bin";
  save_checkpoint(result.checkpoint_path, net, meta);
  result.net = net;
  return result;
}

std::vector<EvalRow> eval_sweep(const std::string& checkpoint_path,
                                const RunConfig& cfg, TerrainType type,
                                int n_levels, int n_episodes,
                                const std::string& csv_path) {
  CheckpointMeta meta;
  PolicyNetwork net = load_checkpoint(checkpoint_path, &meta);
  RunConfig run = cfg;
  run.variant = meta.variant;

  std::vector<EvalRow> rows;
  for (int level = 0; level < n_levels; ++level) {
    const double difficulty =
        n_levels > 1 ? static_cast<double>(level) / (n_levels - 1) : 1.0;
    RunConfig level_cfg = run;
    level_cfg.terrain.type = type;
    level_cfg.terrain.curriculum = false;
    level_cfg.terrain.difficulty = difficulty;
    auto env = make_environment(level_cfg, level_cfg.seed + 31 * level);
    const EvalStats stats =
        evaluate_policy(net, *env, n_episodes, level_cfg.seed + 7777 * level);
    EvalRow row;
    row.terrain = terrain_type_name(type);
    row.difficulty = difficulty;
    row.success_rate = stats.success_rate;
    row.mean_lin_vel_error = stats.mean_lin_vel_error;
    row.mean_return = stats.mean_return;
    rows.push_back(row);
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw HexError("cannot write " + csv_path);
    out << "terrain,difficulty,success_rate,mean_lin_vel_error,mean_return\n";
    for (const EvalRow& r : rows) {
      out << r.terrain << ',' << r.difficulty << ',' << r.success_rate << ','
          << r.mean_lin_vel_error << ',' << r.mean_return << '\n';
    }
  }
  return rows;
}

GaitReport gait_check(const RunConfig& cfg, double seconds) {
  CpgParams params = cfg.cpg;
  params.theta = phase_matrix_from_phases(cfg.gait_phases);
  params.validate();

  Rng rng(cfg.seed);
  OscillatorNetworkState net = init_network(cfg.gait_phases, rng);

  const double dt = cfg.dt_physics;
  const int n_steps = static_cast<int>(seconds / dt);
  const int tail_start = n_steps / 2;  // measure after transients
  std::array<int, kNumLegs> stance_count{};
  int tail_steps = 0;
  std::array<double, kNumLegs> phase_err_sum{};

  for (int s = 0; s < n_steps; ++s) {
    net = step_network(net, params, dt);
    if (s < tail_start) continue;
    ++tail_steps;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (net.states[leg].y < 0.0) ++stance_count[leg];
    }
    for (int leg = 1; leg < kNumLegs; ++leg) {
      const double diff =
          wrap_angle(phase_of(net.states[leg]) - phase_of(net.states[0]) -
                     params.theta(leg, 0));
      phase_err_sum[leg] += std::abs(diff);
    }
  }

  GaitReport report;
  const MapParams mid = decode_action(Eigen::VectorXd::Zero(8), cfg.map);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    report.duty_factor[leg] =
        static_cast<double>(stance_count[leg]) / tail_steps;
    report.swing_clearance[leg] = swing_clearance(mid, params.mu, leg);
  }
  for (int i = 0; i < kNumLegs; ++i) {
    for (int j = i + 1; j < kNumLegs; ++j) {
      GaitPairReport pair;
      pair.leg_i = i;
      pair.leg_j = j;
      pair.target = params.theta(i, j);
      pair.measured =
          wrap_angle(phase_of(net.states[i]) - phase_of(net.states[j]));
      report.pairs.push_back(pair);
      const double err = std::abs(wrap_angle(pair.measured - pair.target));
      report.max_phase_error = std::max(report.max_phase_error, err);
    }
  }
  return report;
}

void print_gait_report(const GaitReport& report, std::ostream& os) {
  os << "pair,target_rad,measured_rad,error_rad\n";
  for (const GaitPairReport& p : report.pairs) {
    os << kLegNames[p.leg_i] << '-' << kLegNames[p.leg_j] << ',' << p.target
       << ',' << p.measured << ','
       << std::abs(wrap_angle(p.measured - p.target)) << '\n';
  }
  os << "\nleg,duty_factor,swing_clearance_m\n";
  for (int leg = 0; leg < kNumLegs; ++leg) {
    os << kLegNames[leg] << ',' << report.duty_factor[leg] << ','
       << report.swing_clearance[leg] << '\n';
  }
  os << "\nmax_phase_error_rad," << report.max_phase_error << '\n';
}

void export_trajectory(const std::string& checkpoint_path, const RunConfig& cfg,
                       double seconds, const std::string& csv_path) {
  CheckpointMeta meta;
  PolicyNetwork net = load_checkpoint(checkpoint_path, &meta);
  RunConfig run = cfg;
  run.variant = meta.variant;
  run.episode_seconds = seconds;
  auto env = make_environment(run, run.seed);
  const int adim = action_dim(variant_from_name(run.variant));

  std::ofstream out(csv_path);
  if (!out) throw HexError("cannot write " + csv_path);
  out << "time,base_x,base_y,base_z,quat_w,quat_x,quat_y,quat_z,"
         "vb_x,vb_y,vb_z,wb_x,wb_y,wb_z";
  for (int i = 0; i < kNumJoints; ++i) out << ",q" << i;
  for (int i = 0; i < kNumLegs; ++i) out << ",contact_" << kLegNames[i];
  for (const char* name : kRewardTermNames) out << ",r_" << name;
  out << ",reward_total";
  for (int i = 0; i < adim; ++i) out << ",a" << i;
  out << '\n';

  Eigen::VectorXd obs = env->reset(run.seed);
  const int n_steps = static_cast<int>(seconds / env->config().dt_policy());
  for (int s = 0; s < n_steps; ++s) {
    const Eigen::VectorXd norm = normalize_observation(obs, adim);
    const Eigen::VectorXd action =
        net.actor.forward(norm.transpose()).row(0).transpose();
    const StepResult r = env->step(action);
    obs = r.observation;

    const RobotState& st = env->state();
    out << env->time() << ',' << st.base_position.x() << ','
        << st.base_position.y() << ',' << st.base_position.z() << ','
        << st.base_orientation.w() << ',' << st.base_orientation.x() << ','
        << st.base_orientation.y() << ',' << st.base_orientation.z() << ','
        << st.base_lin_vel.x() << ',' << st.base_lin_vel.y() << ','
        << st.base_lin_vel.z() << ',' << st.base_ang_vel.x() << ','
        << st.base_ang_vel.y() << ',' << st.base_ang_vel.z();
    for (int i = 0; i < kNumJoints; ++i) out << ',' << st.q[i];
    for (int i = 0; i < kNumLegs; ++i) out << ',' << (st.foot_contact[i] ? 1 : 0);
    for (double v : r.info.breakdown.terms) out << ',' << v;
    out << ',' << r.reward;
    for (int i = 0; i < adim; ++i) out << ',' << action[i];
    out << '\n';

    if (r.done && s + 1 < n_steps) obs = env->reset();
  }
}

}  // namespace hexcpg
