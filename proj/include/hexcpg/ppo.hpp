#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hexcpg/mdp.hpp"
#include "hexcpg/mlp.hpp"

namespace hexcpg {

// Actor and critic share the architecture: hidden ELU layers, linear heads.
// The action distribution is diagonal Gaussian with state-independent
// log-stds.
struct PolicyNetwork {
  Mlp actor;
  Mlp critic;
  Eigen::VectorXd log_std;

  int obs_dim() const { return actor.in_dim(); }
  int act_dim() const { return actor.out_dim(); }
  int param_count() const {
    return actor.param_count() + static_cast<int>(log_std.size()) +
           critic.param_count();
  }
  // Flat layout: actor | log_std | critic.
  Eigen::VectorXd flatten() const;
  void set_flat(const Eigen::VectorXd& flat);

  static PolicyNetwork make(int obs_dim, int act_dim,
                            const std::vector<int>& hidden,
                            double init_log_std, Rng& rng);
};

struct PolicyOutput {
  Eigen::MatrixXd means;   // N x act_dim
  Eigen::VectorXd values;  // N
};

PolicyOutput policy_forward(const PolicyNetwork& net,
                            const Eigen::MatrixXd& obs);

double gaussian_log_prob(const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action);
double gaussian_entropy(const Eigen::VectorXd& log_std);

struct PpoConfig {
  int n_envs = 64;
  int horizon = 24;
  int minibatch_size = 384;
  int n_epochs = 5;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double desired_kl = 0.01;
  double lr = 1e-3;  // adapted toward desired_kl during training
  double lr_min = 1e-6, lr_max = 1e-2;
  double value_coef = 1.0;
  bool clip_value = true;
  std::vector<int> hidden = {128, 64};
  double init_log_std = -1.0;

  int batch_size() const { return n_envs * horizon; }
  void validate() const;
};

struct EpisodeStats {
  double total_reward = 0.0;
  int length = 0;
  bool success = false;
  double mean_lin_vel_error = 0.0;
  std::array<double, kNumRewardTerms> term_sums{};
};

// Time-major storage: row t * N + i holds step t of environment i.
struct RolloutBatch {
  int T = 0, N = 0;
  Eigen::MatrixXd obs;        // (T*N) x obs_dim, normalized
  Eigen::MatrixXd actions;    // (T*N) x act_dim, raw (pre-squash)
  Eigen::VectorXd log_probs;  // T*N
  Eigen::VectorXd values;     // T*N
  Eigen::VectorXd rewards;    // T*N
  std::vector<uint8_t> dones;       // T*N, 1 = episode ended at this step
  Eigen::VectorXd bootstrap_values;  // N
  std::vector<EpisodeStats> finished_episodes;

  int rows() const { return T * N; }
};

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// Standard GAE recursion with episode-boundary masking; a done at step t
// zeroes the bootstrap into step t.
GaeResult compute_gae(const Eigen::VectorXd& rewards,
                      const Eigen::VectorXd& values,
                      const std::vector<uint8_t>& dones,
                      const Eigen::VectorXd& bootstrap_values, int T, int N,
                      double gamma, double lambda);

// Clipped-surrogate loss with value loss and entropy bonus on one minibatch.
// Returns the scalar loss; when `grad` is non-null accumulates dLoss/dparams
// (flat PolicyNetwork layout). Throws NonFiniteLoss on NaN/inf.
struct LossStats {
  double total = 0.0, pg = 0.0, value = 0.0, entropy = 0.0;
  double approx_kl = 0.0, clip_fraction = 0.0;
};
LossStats ppo_loss(const PolicyNetwork& net, const Eigen::MatrixXd& obs,
                   const Eigen::MatrixXd& actions,
                   const Eigen::VectorXd& old_log_probs,
                   const Eigen::VectorXd& advantages,
                   const Eigen::VectorXd& returns,
                   const Eigen::VectorXd& old_values, const PpoConfig& cfg,
                   Eigen::VectorXd* grad);

struct UpdateStats {
  double kl = 0.0;
  double clip_fraction = 0.0;
  double pg_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double lr = 0.0;
};

// 5 epochs of shuffled minibatches; advantages normalized once per batch;
// learning rate adapted toward cfg.desired_kl afterwards (halved above twice
// the target, x1.5 below half). On non-finite loss the pre-update parameters
// are restored and NonFiniteLoss is thrown.
UpdateStats ppo_update(PolicyNetwork& net, Adam& opt, const RolloutBatch& batch,
                       PpoConfig& cfg, Rng& shuffle_rng);

// Environments stepped together; independent instances, so parallel and
// sequential stepping give identical results.
class VecEnv {
 public:
  // Called when env i finishes an episode, before its auto-reset (e.g. to
  // swap its terrain block). May run from worker threads.
  using ResetHook = std::function<void(int, const StepInfo&, Environment&)>;

  VecEnv(std::vector<std::unique_ptr<Environment>> envs, int n_threads = 1);

  void reset_all(uint64_t seed_base);
  int size() const { return static_cast<int>(envs_.size()); }
  Environment& env(int i) { return *envs_[i]; }
  const Eigen::MatrixXd& current_obs() const { return current_obs_; }
  void set_reset_hook(ResetHook hook) { reset_hook_ = std::move(hook); }

  // Steps every env; auto-resets finished episodes (continuing each env's
  // own RNG stream).
  std::vector<StepResult> step(const Eigen::MatrixXd& raw_actions);

 private:
  std::vector<std::unique_ptr<Environment>> envs_;
  Eigen::MatrixXd current_obs_;  // normalized, N x obs_dim
  int n_threads_ = 1;
  ResetHook reset_hook_;

  friend RolloutBatch collect_rollout(VecEnv&, const PolicyNetwork&, int);
  std::vector<EpisodeStats> accum_;
};

// Stochastic rollout of `horizon` steps across all environments. Exploration
// noise is drawn from each env's own RNG.
RolloutBatch collect_rollout(VecEnv& venv, const PolicyNetwork& net,
                             int horizon);

struct EvalStats {
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_lin_vel_error = 0.0;
  std::array<double, kNumRewardTerms> term_means{};
  int episodes = 0;
};

// Deterministic-action episodes on a fresh env; throws on n_episodes <= 0.
EvalStats evaluate_policy(const PolicyNetwork& net, Environment& env,
                          int n_episodes, uint64_t seed_base);

// Versioned binary checkpoint: magic, version, JSON metadata, named tensors.
struct CheckpointMeta {
  std::string variant = "cpg_rl";
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hidden;
};
void save_checkpoint(const std::string& path, const PolicyNetwork& net,
                     const CheckpointMeta& meta);
PolicyNetwork load_checkpoint(const std::string& path, CheckpointMeta* meta);

}  // namespace hexcpg
