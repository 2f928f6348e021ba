#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <ostream>
#include <thread>
#include <vector>

#include "asizer/env.hpp"
#include "asizer/net.hpp"
#include "asizer/rng.hpp"

namespace asizer {

struct TrainConfig {
  double gamma = 0.99;
  double lam = 0.95;
  double clip = 0.2;
  double lr = 3e-4;
  int epochs_per_update = 10;
  int minibatch = 256;
  int steps_per_update = 3000;  // per batch, aggregated over all workers
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double target_mean_reward = 0.0;
  long max_env_steps = 500000;
  int workers = 4;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0) || !(lam > 0.0 && lam <= 1.0)) {
      throw std::invalid_argument("gamma and lam must be in (0, 1]");
    }
    if (!(clip > 0.0) || !(lr > 0.0)) throw std::invalid_argument("clip and lr must be positive");
    if (epochs_per_update < 1 || minibatch < 1 || steps_per_update < 1 || workers < 1 ||
        max_env_steps < 1) {
      throw std::invalid_argument("invalid train config counts");
    }
  }
};

struct GaeOut {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
// A_t = delta_t + gamma * lam * (1 - done_t) * A_{t+1}, value past the end is 0.
inline GaeOut compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                          const std::vector<std::uint8_t>& dones, double gamma, double lam) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("GAE input length mismatch");
  }
  GaeOut out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double mask = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * mask - values[i];
    next_adv = delta + gamma * lam * mask * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

// One PPO batch: flattened observations plus per-step bookkeeping. Actions
// are stored as raw head indices (0, 1, 2).
struct Batch {
  int obs_dim = 0;
  int num_heads = 0;
  std::vector<double> obs;
  std::vector<int> actions;
  std::vector<double> logp_old;
  std::vector<double> values_old;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return logp_old.size(); }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_frac = 0.0;
};

namespace detail {

struct SampleLoss {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;  // unweighted (V - ret)^2
  double entropy = 0.0;
  double kl = 0.0;
  bool clipped = false;
};

// Per-sample clipped-surrogate loss; fills dlogits/dvalue when grad is
// wanted. Loss = -min(rho*A, clip(rho)*A) + value_coef*(V-ret)^2
//               - entropy_coef * entropy.
inline SampleLoss ppo_sample_loss(const PolicyNet::Cache& cache, const int* choices,
                                  double logp_old, double adv, double ret,
                                  const TrainConfig& cfg, std::vector<double>* dlogits,
                                  double* dvalue) {
  const int heads = static_cast<int>(cache.logits.size() / 3);
  SampleLoss out;

  double logp_new = 0.0;
  double entropy = 0.0;
  std::vector<double> ls(cache.logits.size());
  for (int h = 0; h < heads; ++h) {
    head_log_softmax(cache.logits.data() + 3 * h, ls.data() + 3 * h);
    logp_new += ls[static_cast<std::size_t>(3 * h + choices[h])];
    for (int i = 0; i < 3; ++i) {
      const double l = ls[static_cast<std::size_t>(3 * h + i)];
      entropy -= std::exp(l) * l;
    }
  }

  const double rho = std::exp(logp_new - logp_old);
  const double unclipped = rho * adv;
  const double clipped = std::clamp(rho, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
  const double surr = std::min(unclipped, clipped);

  out.policy_loss = -surr;
  out.value_loss = (cache.value - ret) * (cache.value - ret);
  out.entropy = entropy;
  out.kl = logp_old - logp_new;
  out.clipped = std::abs(rho - 1.0) > cfg.clip;
  out.loss = -surr + cfg.value_coef * out.value_loss - cfg.entropy_coef * entropy;

  if (dlogits != nullptr) {
    dlogits->assign(cache.logits.size(), 0.0);
    // d(-surr)/dlogp_new: active only on the unclipped branch
    const double dsurr_dlp = unclipped <= clipped ? rho * adv : 0.0;
    for (int h = 0; h < heads; ++h) {
      double head_ent = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double l = ls[static_cast<std::size_t>(3 * h + i)];
        head_ent -= std::exp(l) * l;
      }
      for (int i = 0; i < 3; ++i) {
        const std::size_t k = static_cast<std::size_t>(3 * h + i);
        const double p = std::exp(ls[k]);
        const double onehot = i == choices[h] ? 1.0 : 0.0;
        double d = -dsurr_dlp * (onehot - p);  // policy term
        d += cfg.entropy_coef * p * (ls[k] + head_ent);  // -coef * dH/dl
        (*dlogits)[k] = d;
      }
    }
    *dvalue = cfg.value_coef * 2.0 * (cache.value - ret);
  }
  return out;
}

}  // namespace detail

// Mean loss over a batch with the current parameters; used by the
// finite-difference gradient oracle and the update itself.
inline double ppo_loss(const PolicyNet& net, const Batch& batch, const TrainConfig& cfg,
                       std::vector<double>* grad = nullptr, UpdateStats* stats = nullptr) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  if (grad != nullptr) grad->assign(net.param_count(), 0.0);

  PolicyNet::Cache cache;
  std::vector<double> dlogits;
  double dvalue = 0.0;
  double loss = 0.0;
  UpdateStats st;
  for (std::size_t s = 0; s < n; ++s) {
    net.forward(batch.obs.data() + s * static_cast<std::size_t>(batch.obs_dim), cache);
    const auto sl = detail::ppo_sample_loss(
        cache, batch.actions.data() + s * static_cast<std::size_t>(batch.num_heads),
        batch.logp_old[s], batch.advantages[s], batch.returns[s], cfg,
        grad != nullptr ? &dlogits : nullptr, &dvalue);
    loss += sl.loss;
    st.policy_loss += sl.policy_loss;
    st.value_loss += sl.value_loss;
    st.entropy += sl.entropy;
    st.approx_kl += sl.kl;
    st.clip_frac += sl.clipped ? 1.0 : 0.0;
    if (grad != nullptr) {
      // scale by 1/n afterwards; accumulate raw here
      net.backward(cache, dlogits, dvalue, *grad);
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  loss *= inv;
  if (grad != nullptr) {
    for (double& g : *grad) g *= inv;
  }
  if (stats != nullptr) {
    st.policy_loss *= inv;
    st.value_loss *= inv;
    st.entropy *= inv;
    st.approx_kl *= inv;
    st.clip_frac *= inv;
    *stats = st;
  }
  return loss;
}

// Normalize advantages in place (skipped for near-zero variance batches).
inline void normalize_advantages(Batch& batch) {
  const std::size_t n = batch.size();
  if (n == 0) return;
  double mean = 0.0;
  for (double a : batch.advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  if (var < 1e-8) return;
  const double inv_std = 1.0 / std::sqrt(var);
  for (double& a : batch.advantages) a = (a - mean) * inv_std;
}

// Clipped-surrogate update: epochs over shuffled minibatches, adaptive-moment
// steps. Throws TrainError (with the offending statistic) on non-finite loss
// or parameters.
inline UpdateStats ppo_update(PolicyNet& net, AdamState& adam, Batch& batch,
                              const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  normalize_advantages(batch);

  const std::size_t n = batch.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats total;
  std::size_t stat_batches = 0;

  Batch mb;
  mb.obs_dim = batch.obs_dim;
  mb.num_heads = batch.num_heads;
  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.minibatch));
      const std::size_t m = stop - start;
      mb.obs.assign(m * static_cast<std::size_t>(batch.obs_dim), 0.0);
      mb.actions.assign(m * static_cast<std::size_t>(batch.num_heads), 0);
      mb.logp_old.resize(m);
      mb.values_old.resize(m);
      mb.advantages.resize(m);
      mb.returns.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(batch.obs.begin() + static_cast<std::ptrdiff_t>(src * batch.obs_dim),
                    batch.obs_dim, mb.obs.begin() + static_cast<std::ptrdiff_t>(i * batch.obs_dim));
        std::copy_n(
            batch.actions.begin() + static_cast<std::ptrdiff_t>(src * batch.num_heads),
            batch.num_heads, mb.actions.begin() + static_cast<std::ptrdiff_t>(i * batch.num_heads));
        mb.logp_old[i] = batch.logp_old[src];
        mb.values_old[i] = batch.values_old[src];
        mb.advantages[i] = batch.advantages[src];
        mb.returns[i] = batch.returns[src];
      }
      UpdateStats st;
      const double loss = ppo_loss(net, mb, cfg, &grad, &st);
      if (!std::isfinite(loss)) {
        throw TrainError("non-finite loss at adam step " + std::to_string(adam.t) +
                         " (policy=" + std::to_string(st.policy_loss) +
                         ", value=" + std::to_string(st.value_loss) + ")");
      }
      adam.step(net.theta, grad, cfg.lr);
      net.check_finite();
      total.policy_loss += st.policy_loss;
      total.value_loss += st.value_loss;
      total.entropy += st.entropy;
      total.approx_kl += st.approx_kl;
      total.clip_frac += st.clip_frac;
      ++stat_batches;
    }
  }
  const double inv = stat_batches > 0 ? 1.0 / static_cast<double>(stat_batches) : 0.0;
  total.policy_loss *= inv;
  total.value_loss *= inv;
  total.entropy *= inv;
  total.approx_kl *= inv;
  total.clip_frac *= inv;
  return total;
}

// Synthetic batch for gradient verification: Gaussian observations, actions
// sampled from the current policy so logp_old matches the network and the
// clipped surrogate is smooth at the evaluation point. perturb_logp shifts
// the stored log-probabilities to exercise ratios away from 1.
inline Batch make_gradcheck_batch(const PolicyNet& net, int samples, Rng& rng,
                                  bool perturb_logp = false) {
  Batch b;
  b.obs_dim = net.in_dim();
  b.num_heads = net.num_heads();
  for (int s = 0; s < samples; ++s) {
    Observation obs(static_cast<std::size_t>(net.in_dim()));
    for (double& v : obs) v = rng.normal();
    const PolicyNet::Cache cache = net.forward(obs);
    const ActionSample as = sample_action(cache.logits, rng);
    b.obs.insert(b.obs.end(), obs.begin(), obs.end());
    b.actions.insert(b.actions.end(), as.choices.begin(), as.choices.end());
    b.logp_old.push_back(as.log_prob + (perturb_logp ? 0.05 * rng.normal() : 0.0));
    b.values_old.push_back(cache.value);
    b.advantages.push_back(rng.normal());
    b.returns.push_back(rng.normal());
  }
  return b;
}

// Worst relative disagreement between the analytic gradient and central
// finite differences over every parameter. The 1e-3 floor keeps components
// whose true gradient is below differencing noise compared absolutely.
inline double max_gradient_rel_error(PolicyNet& net, const Batch& batch, const TrainConfig& cfg,
                                     double h = 1e-5) {
  std::vector<double> grad;
  ppo_loss(net, batch, cfg, &grad);
  double worst = 0.0;
  for (std::size_t i = 0; i < net.theta.size(); ++i) {
    const double orig = net.theta[i];
    net.theta[i] = orig + h;
    const double lp = ppo_loss(net, batch, cfg);
    net.theta[i] = orig - h;
    const double lm = ppo_loss(net, batch, cfg);
    net.theta[i] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    const double denom = std::max({1e-3, std::abs(fd), std::abs(grad[i])});
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return worst;
}

struct CurvePoint {
  std::uint64_t env_steps = 0;
  double mean_reward = 0.0;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  bool reached = false;
  std::uint64_t env_steps = 0;
};

namespace detail {

struct WorkerBuf {
  std::vector<double> obs;
  std::vector<int> actions;
  std::vector<double> logp;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> episode_rewards;
  std::uint64_t episodes = 0;  // persists across batches for target cycling
};

// Collect whole episodes until the step quota is met. Targets cycle through
// the shared training set, interleaved by worker id so the set is covered.
inline void collect_rollouts(const PolicyNet& net, SizingEnv& env,
                             const std::vector<TargetSpec>& targets, int worker_id,
                             int num_workers, int quota, Rng& rng, WorkerBuf& buf) {
  buf.obs.clear();
  buf.actions.clear();
  buf.logp.clear();
  buf.values.clear();
  buf.rewards.clear();
  buf.dones.clear();
  buf.episode_rewards.clear();

  const std::size_t t_count = targets.size();
  int steps = 0;
  while (steps < quota) {
    const std::size_t ti =
        (static_cast<std::size_t>(worker_id) + buf.episodes * static_cast<std::size_t>(num_workers)) %
        t_count;
    ++buf.episodes;
    Observation obs = env.reset(targets[ti]);
    double ep_reward = 0.0;
    bool done = false;
    while (!done) {
      const PolicyNet::Cache cache = net.forward(obs);
      const ActionSample s = sample_action(cache.logits, rng);
      const SizingEnv::Step st = env.step(s.action);

      buf.obs.insert(buf.obs.end(), obs.begin(), obs.end());
      buf.actions.insert(buf.actions.end(), s.choices.begin(), s.choices.end());
      buf.logp.push_back(s.log_prob);
      buf.values.push_back(cache.value);
      buf.rewards.push_back(st.reward);
      buf.dones.push_back(st.done ? 1 : 0);

      ep_reward += st.reward;
      obs = st.obs;
      done = st.done;
      ++steps;
    }
    buf.episode_rewards.push_back(ep_reward);
  }
}

}  // namespace detail

// PPO training loop. Workers own private environment instances and RNG
// streams and only read the shared parameters during collection, so the
// result is reproducible for a fixed (seed, worker count) regardless of
// thread scheduling. Stops once the 10-batch running mean of episode reward
// reaches target_mean_reward, or at max_env_steps.
inline TrainResult train(PolicyNet& net, const Circuit& circuit, const EnvConfig& env_cfg,
                         const std::vector<TargetSpec>& train_targets, const TrainConfig& cfg,
                         std::ostream* log = nullptr) {
  cfg.validate();
  if (train_targets.empty()) throw std::invalid_argument("no training targets");

  const int W = cfg.workers;
  std::vector<SizingEnv> envs;
  envs.reserve(static_cast<std::size_t>(W));
  std::vector<Rng> rngs;
  std::vector<detail::WorkerBuf> bufs(static_cast<std::size_t>(W));
  for (int w = 0; w < W; ++w) {
    envs.emplace_back(circuit, env_cfg);
    rngs.emplace_back(cfg.seed, static_cast<std::uint64_t>(w) + 1);
  }
  Rng shuffle_rng(cfg.seed, 0);
  AdamState adam(net.param_count());

  const int quota = (cfg.steps_per_update + W - 1) / W;
  constexpr std::size_t kWindow = 10;  // batches in the stopping window

  TrainResult result;
  std::deque<double> window;
  while (result.env_steps < static_cast<std::uint64_t>(cfg.max_env_steps)) {
    if (W == 1) {
      detail::collect_rollouts(net, envs[0], train_targets, 0, W, quota, rngs[0], bufs[0]);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(W));
      for (int w = 0; w < W; ++w) {
        threads.emplace_back([&, w] {
          detail::collect_rollouts(net, envs[static_cast<std::size_t>(w)], train_targets, w, W,
                                   quota, rngs[static_cast<std::size_t>(w)],
                                   bufs[static_cast<std::size_t>(w)]);
        });
      }
      for (auto& t : threads) t.join();
    }

    Batch batch;
    batch.obs_dim = envs[0].obs_dim();
    batch.num_heads = envs[0].num_params();
    double reward_sum = 0.0;
    std::size_t episode_count = 0;
    for (int w = 0; w < W; ++w) {
      detail::WorkerBuf& b = bufs[static_cast<std::size_t>(w)];
      const GaeOut gae = compute_gae(b.rewards, b.values, b.dones, cfg.gamma, cfg.lam);
      batch.obs.insert(batch.obs.end(), b.obs.begin(), b.obs.end());
      batch.actions.insert(batch.actions.end(), b.actions.begin(), b.actions.end());
      batch.logp_old.insert(batch.logp_old.end(), b.logp.begin(), b.logp.end());
      batch.values_old.insert(batch.values_old.end(), b.values.begin(), b.values.end());
      batch.advantages.insert(batch.advantages.end(), gae.advantages.begin(),
                              gae.advantages.end());
      batch.returns.insert(batch.returns.end(), gae.returns.begin(), gae.returns.end());
      for (double er : b.episode_rewards) reward_sum += er;
      episode_count += b.episode_rewards.size();
    }
    result.env_steps += batch.size();

    const double mean_reward = reward_sum / static_cast<double>(episode_count);
    result.curve.push_back({result.env_steps, mean_reward});
    window.push_back(mean_reward);
    if (window.size() > kWindow) window.pop_front();

    const UpdateStats st = ppo_update(net, adam, batch, cfg, shuffle_rng);
    if (log != nullptr) {
      *log << "batch " << result.curve.size() << " steps " << result.env_steps
           << " mean_reward " << mean_reward << " entropy " << st.entropy << " kl "
           << st.approx_kl << "\n";
    }

    if (window.size() == kWindow) {
      double wmean = 0.0;
      for (double v : window) wmean += v;
      wmean /= static_cast<double>(window.size());
      if (wmean >= cfg.target_mean_reward) {
        result.reached = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace asizer
