#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hexcpg/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string variant;
  std::string reward;
  std::string terrain;
  int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration JSON file");
  cmd->add_option("--seed", args.seed, "Random seed (overrides config)");
  cmd->add_option("--variant", args.variant, "cpg_rl or rl_baseline")
      ->check(CLI::IsMember({"cpg_rl", "rl_baseline"}));
  cmd->add_option("--reward", args.reward, "reward1 or reward2")
      ->check(CLI::IsMember({"reward1", "reward2"}));
  cmd->add_option("--terrain", args.terrain,
                  "flat, uniform, wave, slope or curriculum")
      ->check(CLI::IsMember({"flat", "uniform", "wave", "slope", "curriculum"}));
  cmd->add_option("--out", args.out_dir, "Output directory");
}

hexcpg::RunConfig resolve_config(const CommonArgs& args) {
  hexcpg::RunConfig cfg;
  if (!args.config_path.empty()) {
    cfg = hexcpg::load_run_config(args.config_path);
  }
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  if (!args.variant.empty()) cfg.variant = args.variant;
  if (!args.reward.empty()) cfg.reward_variant = args.reward;
  if (!args.terrain.empty()) {
    if (args.terrain == "curriculum") {
      cfg.terrain.curriculum = true;
    } else {
      cfg.terrain.curriculum = false;
      cfg.terrain.type = hexcpg::terrain_type_from_name(args.terrain);
    }
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hexcpg: CPG + RL hexapod locomotion harness"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, gait_args, export_args;
  int n_updates = -1;

  CLI::App* train = app.add_subcommand("train", "Train a policy");
  add_common(train, train_args);
  train->add_option("--updates", n_updates, "Number of policy updates");

  CLI::App* eval = app.add_subcommand("eval", "Difficulty sweep of a checkpoint");
  std::string eval_checkpoint;
  int eval_episodes = 20;
  int eval_levels = 6;
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")
      ->required();
  eval->add_option("--episodes", eval_episodes, "Episodes per difficulty level");
  eval->add_option("--levels", eval_levels, "Number of difficulty levels");

  CLI::App* gait = app.add_subcommand("gait-check", "Open-loop CPG gait report");
  double gait_seconds = 10.0;
  add_common(gait, gait_args);
  gait->add_option("--seconds", gait_seconds, "Simulated seconds");

  CLI::App* exp = app.add_subcommand("export", "Export a trajectory CSV");
  std::string export_checkpoint;
  double export_seconds = 20.0;
  add_common(exp, export_args);
  exp->add_option("--checkpoint", export_checkpoint, "Checkpoint file")
      ->required();
  exp->add_option("--seconds", export_seconds, "Simulated seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      hexcpg::RunConfig cfg = resolve_config(train_args);
      if (n_updates > 0) cfg.n_updates = n_updates;
      const hexcpg::TrainResult result = hexcpg::train_run(cfg);
      std::cout << "checkpoint: " << result.checkpoint_path << '\n'
                << "metrics:    " << result.metrics_path << std::endl;
    } else if (eval->parsed()) {
      hexcpg::RunConfig cfg = resolve_config(eval_args);
      std::filesystem::create_directories(cfg.out_dir);
      const hexcpg::TerrainType type =
          cfg.terrain.curriculum ? hexcpg::TerrainType::kUniform
                                 : cfg.terrain.type;
      const std::string csv = cfg.out_dir + "/eval.csv";
      const auto rows = hexcpg::eval_sweep(eval_checkpoint, cfg, type,
                                           eval_levels, eval_episodes, csv);
      std::cout << "terrain difficulty success_rate tracking_error\n";
      for (const auto& r : rows) {
        std::cout << r.terrain << ' ' << r.difficulty << ' ' << r.success_rate
                  << ' ' << r.mean_lin_vel_error << '\n';
      }
      std::cout << "written: " << csv << std::endl;
    } else if (gait->parsed()) {
      hexcpg::RunConfig cfg = resolve_config(gait_args);
      const hexcpg::GaitReport report = hexcpg::gait_check(cfg, gait_seconds);
      hexcpg::print_gait_report(report, std::cout);
      if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream out(cfg.out_dir + "/gait_report.csv");
        hexcpg::print_gait_report(report, out);
      }
    } else if (exp->parsed()) {
      hexcpg::RunConfig cfg = resolve_config(export_args);
      std::filesystem::create_directories(cfg.out_dir);
      const std::string csv = cfg.out_dir + "/trajectory.csv";
      hexcpg::export_trajectory(export_checkpoint, cfg, export_seconds, csv);
      std::cout << "written: " << csv << std::endl;
    }
  } catch (const hexcpg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntimeError;
  }
  return kExitOk;
}
