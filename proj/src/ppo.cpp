#include "hexcpg/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

namespace hexcpg {

Eigen::VectorXd PolicyNetwork::flatten() const {
  Eigen::VectorXd flat(param_count());
  flat.head(actor.param_count()) = actor.params();
  flat.segment(actor.param_count(), log_std.size()) = log_std;
  flat.tail(critic.param_count()) = critic.params();
  return flat;
}

void PolicyNetwork::set_flat(const Eigen::VectorXd& flat) {
  actor.params() = flat.head(actor.param_count());
  log_std = flat.segment(actor.param_count(), log_std.size());
  critic.params() = flat.tail(critic.param_count());
}

PolicyNetwork PolicyNetwork::make(int obs_dim, int act_dim,
                                  const std::vector<int>& hidden,
                                  double init_log_std, Rng& rng) {
  std::vector<int> actor_sizes = {obs_dim};
  actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
  actor_sizes.push_back(act_dim);
  std::vector<int> critic_sizes = {obs_dim};
  critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
  critic_sizes.push_back(1);

  PolicyNetwork net;
  net.actor = Mlp(actor_sizes);
  net.critic = Mlp(critic_sizes);
  net.actor.init(rng, 0.01);  // near-zero initial action means
  net.critic.init(rng, 1.0);
  net.log_std = Eigen::VectorXd::Constant(act_dim, init_log_std);
  return net;
}

PolicyOutput policy_forward(const PolicyNetwork& net,
                            const Eigen::MatrixXd& obs) {
  PolicyOutput out;
  out.means = net.actor.forward(obs);
  out.values = net.critic.forward(obs).col(0);
  return out;
}

double gaussian_log_prob(const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& action) {
  double lp = -0.5 * mean.size() * std::log(2.0 * M_PI) - log_std.sum();
  for (int j = 0; j < mean.size(); ++j) {
    const double z = (action[j] - mean[j]) * std::exp(-log_std[j]);
    lp -= 0.5 * z * z;
  }
  return lp;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() +
         0.5 * log_std.size() * (1.0 + std::log(2.0 * M_PI));
}

void PpoConfig::validate() const {
  if (n_envs <= 0 || horizon <= 0) {
    throw ConfigError("ppo: n_envs and horizon must be positive");
  }
  if (minibatch_size <= 0 || batch_size() % minibatch_size != 0) {
    throw ConfigError("ppo: minibatch_size must divide n_envs * horizon");
  }
  if (!(clip > 0.0) || !(gamma > 0.0 && gamma < 1.0) ||
      !(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw ConfigError("ppo: invalid clip/gamma/lambda");
  }
}

GaeResult compute_gae(const Eigen::VectorXd& rewards,
                      const Eigen::VectorXd& values,
                      const std::vector<uint8_t>& dones,
                      const Eigen::VectorXd& bootstrap_values, int T, int N,
                      double gamma, double lambda) {
  GaeResult out;
  out.advantages = Eigen::VectorXd::Zero(T * N);
  out.returns = Eigen::VectorXd::Zero(T * N);
  for (int i = 0; i < N; ++i) {
    double gae = 0.0;
    for (int t = T - 1; t >= 0; --t) {
      const int idx = t * N + i;
      const double nonterminal = dones[idx] ? 0.0 : 1.0;
      const double next_value =
          (t == T - 1) ? bootstrap_values[i] : values[(t + 1) * N + i];
      const double delta =
          rewards[idx] + gamma * next_value * nonterminal - values[idx];
      gae = delta + gamma * lambda * nonterminal * gae;
      out.advantages[idx] = gae;
    }
  }
  out.returns = out.advantages + values;
  return out;
}

LossStats ppo_loss(const PolicyNetwork& net, const Eigen::MatrixXd& obs,
                   const Eigen::MatrixXd& actions,
                   const Eigen::VectorXd& old_log_probs,
                   const Eigen::VectorXd& advantages,
                   const Eigen::VectorXd& returns,
                   const Eigen::VectorXd& old_values, const PpoConfig& cfg,
                   Eigen::VectorXd* grad) {
  const int M = static_cast<int>(obs.rows());
  const int A = net.act_dim();

  Mlp::Cache actor_cache, critic_cache;
  const Eigen::MatrixXd means =
      net.actor.forward(obs, grad ? &actor_cache : nullptr);
  const Eigen::MatrixXd values_mat =
      net.critic.forward(obs, grad ? &critic_cache : nullptr);

  const Eigen::VectorXd sigma = net.log_std.array().exp();
  const Eigen::VectorXd inv_var = (-2.0 * net.log_std).array().exp();

  Eigen::MatrixXd d_means = Eigen::MatrixXd::Zero(M, A);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(A);
  Eigen::MatrixXd d_values = Eigen::MatrixXd::Zero(M, 1);

  LossStats stats;
  double pg_sum = 0.0, kl_sum = 0.0;
  int clipped_count = 0;

  for (int r = 0; r < M; ++r) {
    double logp = -0.5 * A * std::log(2.0 * M_PI) - net.log_std.sum();
    for (int j = 0; j < A; ++j) {
      const double d = actions(r, j) - means(r, j);
      logp -= 0.5 * d * d * inv_var[j];
    }
    const double log_ratio = logp - old_log_probs[r];
    const double ratio = std::exp(log_ratio);
    kl_sum += (ratio - 1.0) - log_ratio;
    if (std::abs(ratio - 1.0) > cfg.clip) ++clipped_count;

    const double adv = advantages[r];
    const double surr1 = ratio * adv;
    const double surr2 =
        std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
    pg_sum -= std::min(surr1, surr2);

    if (grad && surr1 <= surr2) {
      // Gradient flows through the unclipped branch only.
      const double dpg_dlogp = -adv * ratio / M;
      for (int j = 0; j < A; ++j) {
        const double d = actions(r, j) - means(r, j);
        d_means(r, j) += dpg_dlogp * d * inv_var[j];
        d_log_std[j] += dpg_dlogp * (d * d * inv_var[j] - 1.0);
      }
    }
  }
  stats.pg = pg_sum / M;

  double v_sum = 0.0;
  for (int r = 0; r < M; ++r) {
    const double v = values_mat(r, 0);
    const double diff = v - returns[r];
    const double unclipped = diff * diff;
    if (cfg.clip_value) {
      const double vc = old_values[r] +
                        std::clamp(v - old_values[r], -cfg.clip, cfg.clip);
      const double cdiff = vc - returns[r];
      const double clipped = cdiff * cdiff;
      if (unclipped >= clipped) {
        v_sum += unclipped;
        if (grad) d_values(r, 0) = cfg.value_coef * diff / M;
      } else {
        v_sum += clipped;
        if (grad && std::abs(v - old_values[r]) < cfg.clip) {
          d_values(r, 0) = cfg.value_coef * cdiff / M;
        }
      }
    } else {
      v_sum += unclipped;
      if (grad) d_values(r, 0) = cfg.value_coef * diff / M;
    }
  }
  stats.value = 0.5 * v_sum / M;

  stats.entropy = gaussian_entropy(net.log_std);
  stats.approx_kl = kl_sum / M;
  stats.clip_fraction = static_cast<double>(clipped_count) / M;
  stats.total = stats.pg + cfg.value_coef * stats.value -
                cfg.entropy_coef * stats.entropy;

  if (!std::isfinite(stats.total)) {
    throw NonFiniteLoss("ppo loss is not finite");
  }

  if (grad) {
    d_log_std.array() -= cfg.entropy_coef;  // d(-c_e * H)/d(log_std) = -c_e
    Eigen::VectorXd actor_grad = Eigen::VectorXd::Zero(net.actor.param_count());
    Eigen::VectorXd critic_grad =
        Eigen::VectorXd::Zero(net.critic.param_count());
    net.actor.backward(actor_cache, d_means, actor_grad);
    net.critic.backward(critic_cache, d_values, critic_grad);
    grad->head(actor_grad.size()) += actor_grad;
    grad->segment(actor_grad.size(), A) += d_log_std;
    grad->tail(critic_grad.size()) += critic_grad;
  }
  return stats;
}

UpdateStats ppo_update(PolicyNetwork& net, Adam& opt, const RolloutBatch& batch,
                       PpoConfig& cfg, Rng& shuffle_rng) {
  const int rows = batch.rows();
  const Eigen::VectorXd snapshot = net.flatten();
  const Adam opt_snapshot = opt;

  GaeResult gae = compute_gae(batch.rewards, batch.values, batch.dones,
                              batch.bootstrap_values, batch.T, batch.N,
                              cfg.gamma, cfg.gae_lambda);

  // Normalize advantages once over the whole batch.
  const double mean = gae.advantages.mean();
  const double std = std::sqrt(
      (gae.advantages.array() - mean).square().sum() / rows);
  Eigen::VectorXd adv_norm = (gae.advantages.array() - mean) / (std + 1e-8);

  std::vector<int> indices(rows);
  std::iota(indices.begin(), indices.end(), 0);

  UpdateStats stats;
  int n_minibatches = 0;
  Eigen::VectorXd grad(net.param_count());
  Eigen::VectorXd flat = net.flatten();

  try {
    for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
      // Fisher-Yates with the caller's RNG for reproducible shuffles.
      for (int i = rows - 1; i > 0; --i) {
        std::swap(indices[i], indices[shuffle_rng.uniform_int(0, i)]);
      }
      for (int start = 0; start < rows; start += cfg.minibatch_size) {
        const int M = std::min(cfg.minibatch_size, rows - start);
        Eigen::MatrixXd mb_obs(M, batch.obs.cols());
        Eigen::MatrixXd mb_act(M, batch.actions.cols());
        Eigen::VectorXd mb_logp(M), mb_adv(M), mb_ret(M), mb_val(M);
        for (int r = 0; r < M; ++r) {
          const int idx = indices[start + r];
          mb_obs.row(r) = batch.obs.row(idx);
          mb_act.row(r) = batch.actions.row(idx);
          mb_logp[r] = batch.log_probs[idx];
          mb_adv[r] = adv_norm[idx];
          mb_ret[r] = gae.returns[idx];
          mb_val[r] = batch.values[idx];
        }
        grad.setZero();
        const LossStats ls = ppo_loss(net, mb_obs, mb_act, mb_logp, mb_adv,
                                      mb_ret, mb_val, cfg, &grad);
        flat = net.flatten();
        opt.step(flat, grad, cfg.lr);
        net.set_flat(flat);

        stats.kl += ls.approx_kl;
        stats.clip_fraction += ls.clip_fraction;
        stats.pg_loss += ls.pg;
        stats.value_loss += ls.value;
        stats.entropy += ls.entropy;
        ++n_minibatches;
      }
    }
  } catch (const NonFiniteLoss&) {
    net.set_flat(snapshot);
    opt = opt_snapshot;
    throw;
  }

  stats.kl /= n_minibatches;
  stats.clip_fraction /= n_minibatches;
  stats.pg_loss /= n_minibatches;
  stats.value_loss /= n_minibatches;
  stats.entropy /= n_minibatches;

  // KL-adaptive learning rate.
  if (stats.kl > 2.0 * cfg.desired_kl) {
    cfg.lr = std::max(cfg.lr_min, cfg.lr / 2.0);
  } else if (stats.kl < 0.5 * cfg.desired_kl) {
    cfg.lr = std::min(cfg.lr_max, cfg.lr * 1.5);
  }
  stats.lr = cfg.lr;
  return stats;
}

VecEnv::VecEnv(std::vector<std::unique_ptr<Environment>> envs, int n_threads)
    : envs_(std::move(envs)), n_threads_(std::max(1, n_threads)) {
  accum_.resize(envs_.size());
}

void VecEnv::reset_all(uint64_t seed_base) {
  const int obs_dim = observation_dim(envs_[0]->config().variant);
  const int adim = action_dim(envs_[0]->config().variant);
  current_obs_.resize(size(), obs_dim);
  for (int i = 0; i < size(); ++i) {
    current_obs_.row(i) =
        normalize_observation(envs_[i]->reset(seed_base + i), adim);
    accum_[i] = EpisodeStats{};
  }
}

std::vector<StepResult> VecEnv::step(const Eigen::MatrixXd& raw_actions) {
  std::vector<StepResult> results(size());
  const int adim = action_dim(envs_[0]->config().variant);
  auto worker = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      results[i] = envs_[i]->step(raw_actions.row(i).transpose());
      Eigen::VectorXd obs;
      if (results[i].done) {
        if (reset_hook_) reset_hook_(i, results[i].info, *envs_[i]);
        obs = envs_[i]->reset();
      } else {
        obs = results[i].observation;
      }
      current_obs_.row(i) = normalize_observation(obs, adim);
    }
  };
  if (n_threads_ <= 1 || size() == 1) {
    worker(0, size());
  } else {
    std::vector<std::thread> threads;
    const int chunk = (size() + n_threads_ - 1) / n_threads_;
    for (int t = 0; t < n_threads_; ++t) {
      const int begin = t * chunk;
      const int end = std::min(size(), begin + chunk);
      if (begin < end) threads.emplace_back(worker, begin, end);
    }
    for (auto& th : threads) th.join();
  }
  return results;
}

RolloutBatch collect_rollout(VecEnv& venv, const PolicyNetwork& net,
                             int horizon) {
  const int N = venv.size();
  RolloutBatch batch;
  batch.T = horizon;
  batch.N = N;
  batch.obs.resize(horizon * N, net.obs_dim());
  batch.actions.resize(horizon * N, net.act_dim());
  batch.log_probs.resize(horizon * N);
  batch.values.resize(horizon * N);
  batch.rewards.resize(horizon * N);
  batch.dones.assign(horizon * N, 0);
  batch.bootstrap_values.resize(N);

  const Eigen::VectorXd sigma = net.log_std.array().exp();

  for (int t = 0; t < horizon; ++t) {
    const PolicyOutput po = policy_forward(net, venv.current_obs());
    Eigen::MatrixXd actions(N, net.act_dim());
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < net.act_dim(); ++j) {
        actions(i, j) = po.means(i, j) + sigma[j] * venv.env(i).rng().normal();
      }
      const int idx = t * N + i;
      batch.obs.row(idx) = venv.current_obs().row(i);
      batch.actions.row(idx) = actions.row(i);
      batch.log_probs[idx] = gaussian_log_prob(
          po.means.row(i).transpose(), net.log_std, actions.row(i).transpose());
      batch.values[idx] = po.values[i];
    }

    const std::vector<StepResult> results = venv.step(actions);
    for (int i = 0; i < N; ++i) {
      const int idx = t * N + i;
      batch.rewards[idx] = results[i].reward;
      batch.dones[idx] = results[i].done ? 1 : 0;

      EpisodeStats& acc = venv.accum_[i];
      acc.total_reward += results[i].reward;
      acc.length += 1;
      acc.mean_lin_vel_error += results[i].info.lin_vel_error;
      for (int k = 0; k < kNumRewardTerms; ++k) {
        acc.term_sums[k] += results[i].info.breakdown.terms[k];
      }
      if (results[i].done) {
        acc.success = results[i].info.success;
        acc.mean_lin_vel_error /= acc.length;
        batch.finished_episodes.push_back(acc);
        acc = EpisodeStats{};
      }
    }
  }
  batch.bootstrap_values = policy_forward(net, venv.current_obs()).values;
  return batch;
}

EvalStats evaluate_policy(const PolicyNetwork& net, Environment& env,
                          int n_episodes, uint64_t seed_base) {
  if (n_episodes <= 0) {
    throw std::invalid_argument("evaluate_policy: n_episodes must be > 0");
  }
  const int adim = action_dim(env.config().variant);
  EvalStats stats;
  stats.episodes = n_episodes;
  for (int ep = 0; ep < n_episodes; ++ep) {
    Eigen::VectorXd obs = env.reset(seed_base + ep);
    double ep_reward = 0.0;
    double ep_err = 0.0;
    int steps = 0;
    std::array<double, kNumRewardTerms> term_sums{};
    while (true) {
      const Eigen::VectorXd norm = normalize_observation(obs, adim);
      const Eigen::VectorXd mean =
          net.actor.forward(norm.transpose()).row(0).transpose();
      const StepResult r = env.step(mean);
      obs = r.observation;
      ep_reward += r.reward;
      ep_err += r.info.lin_vel_error;
      for (int k = 0; k < kNumRewardTerms; ++k) {
        term_sums[k] += r.info.breakdown.terms[k];
      }
      ++steps;
      if (r.done) {
        if (r.info.success) stats.success_rate += 1.0;
        break;
      }
    }
    stats.mean_return += ep_reward;
    stats.mean_lin_vel_error += ep_err / steps;
    for (int k = 0; k < kNumRewardTerms; ++k) {
      stats.term_means[k] += term_sums[k] / steps;
    }
  }
  stats.success_rate /= n_episodes;
  stats.mean_return /= n_episodes;
  stats.mean_lin_vel_error /= n_episodes;
  for (int k = 0; k < kNumRewardTerms; ++k) stats.term_means[k] /= n_episodes;
  return stats;
}

namespace {

constexpr char kCheckpointMagic[8] = {'H', 'X', 'C', 'P', 'G', 'C', 'K', '1'};
constexpr uint32_t kCheckpointVersion = 1;

void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_tensor(std::ofstream& out, const std::string& name,
                  const double* data, uint64_t rows, uint64_t cols) {
  write_u32(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), name.size());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
}

struct Tensor {
  std::string name;
  Eigen::MatrixXd data;
};

Tensor read_tensor(std::ifstream& in) {
  Tensor t;
  const uint32_t name_len = read_u32(in);
  t.name.resize(name_len);
  in.read(t.name.data(), name_len);
  uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  t.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(rows * cols * sizeof(double)));
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyNetwork& net,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HexError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32(out, kCheckpointVersion);

  nlohmann::json j;
  j["variant"] = meta.variant;
  j["obs_dim"] = meta.obs_dim;
  j["act_dim"] = meta.act_dim;
  j["hidden"] = meta.hidden;
  const std::string meta_str = j.dump();
  write_u32(out, static_cast<uint32_t>(meta_str.size()));
  out.write(meta_str.data(), meta_str.size());

  const uint32_t n_tensors = static_cast<uint32_t>(
      2 * net.actor.num_layers() + 1 + 2 * net.critic.num_layers());
  write_u32(out, n_tensors);

  const auto write_mlp = [&](const Mlp& mlp, const std::string& prefix) {
    for (int l = 0; l < mlp.num_layers(); ++l) {
      const auto W = mlp.weight(l);
      write_tensor(out, prefix + ".l" + std::to_string(l) + ".weight",
                   W.data(), W.rows(), W.cols());
      const auto b = mlp.bias(l);
      write_tensor(out, prefix + ".l" + std::to_string(l) + ".bias", b.data(),
                   b.size(), 1);
    }
  };
  write_mlp(net.actor, "actor");
  write_tensor(out, "log_std", net.log_std.data(), net.log_std.size(), 1);
  write_mlp(net.critic, "critic");
}

PolicyNetwork load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HexError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ConfigError("not a checkpoint file: " + path);
  }
  const uint32_t version = read_u32(in);
  if (version != kCheckpointVersion) {
    throw ConfigError("checkpoint version mismatch: " + std::to_string(version));
  }
  const uint32_t meta_len = read_u32(in);
  std::string meta_str(meta_len, '\0');
  in.read(meta_str.data(), meta_len);
  const nlohmann::json j = nlohmann::json::parse(meta_str);

  CheckpointMeta m;
  m.variant = j.at("variant").get<std::string>();
  m.obs_dim = j.at("obs_dim").get<int>();
  m.act_dim = j.at("act_dim").get<int>();
  m.hidden = j.at("hidden").get<std::vector<int>>();
  if (meta) *meta = m;

  Rng dummy(0);
  PolicyNetwork net =
      PolicyNetwork::make(m.obs_dim, m.act_dim, m.hidden, 0.0, dummy);

  const uint32_t n_tensors = read_u32(in);
  for (uint32_t k = 0; k < n_tensors; ++k) {
    Tensor t = read_tensor(in);
    if (t.name == "log_std") {
      net.log_std = t.data.col(0);
      continue;
    }
    const bool is_actor = t.name.rfind("actor.", 0) == 0;
    Mlp& mlp = is_actor ? net.actor : net.critic;
    const size_t lpos = t.name.find(".l") + 2;
    const int layer = std::stoi(t.name.substr(lpos));
    if (t.name.find(".weight") != std::string::npos) {
      mlp.weight(layer) = t.data;
    } else {
      mlp.bias(layer) = t.data.col(0);
    }
  }
  if (!in) throw ConfigError("truncated checkpoint: " + path);
  return net;
}

}  // namespace hexcpg
