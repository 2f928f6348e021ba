#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "asizer/circuits.hpp"
#include "asizer/rng.hpp"
#include "asizer/specs.hpp"

namespace asizer {

// Reward shaping constants. epsilon weights minimize-objectives;
// success_threshold is the tolerance below zero at which an episode counts
// as meeting all specs; bonus is added on success. r_floor replaces the raw
// reward of an infeasible simulation (defaults to -2*M, strictly worse than
// any feasible reward); infeasible_obs is the observation value reported for
// unmeasurable specs.
struct RewardConfig {
  double epsilon = 0.05;
  double success_threshold = 0.01;
  double bonus = 10.0;
  double r_floor = 0.0;  // 0 means "derive -2*M from the spec count"
  double infeasible_obs = -5.0;

  double floor_for(int num_specs) const {
    return r_floor != 0.0 ? r_floor : -2.0 * static_cast<double>(num_specs);
  }

  void validate() const {
    if (!(epsilon > 0.0) || !(bonus > 0.0) || !(success_threshold >= 0.0)) {
      throw std::invalid_argument("invalid reward config");
    }
  }
};

// Raw reward: each hard constraint contributes a clipped normalized
// shortfall (zero once met, negative otherwise); each minimize-objective
// contributes its signed normalized excess weighted by epsilon. The
// normalization (o - o*) / (|o| + |o*|) is scale-free per spec.
inline double compute_r(const SpecVector& o, const TargetSpec& target,
                        const std::vector<SpecDef>& defs, const RewardConfig& cfg) {
  if (!o.feasible) throw std::invalid_argument("compute_r requires a feasible SpecVector");
  if (o.values.size() != defs.size() || target.size() != defs.size()) {
    throw std::invalid_argument("spec/target size mismatch");
  }
  double r = 0.0;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const double oi = o.values[i];
    const double ti = target[i];
    const double denom = std::abs(oi) + std::abs(ti);
    const double frac = denom > 0.0 ? (oi - ti) / denom : 0.0;
    switch (defs[i].sense) {
      case SpecSense::HardGe:
        r += std::min(frac, 0.0);
        break;
      case SpecSense::HardLe:
        // meeting "at most target" contributes 0, overshoot is negative
        r += std::min(-frac, 0.0);
        break;
      case SpecSense::Minimize:
        r -= cfg.epsilon * frac;
        break;
    }
  }
  return r;
}

struct RewardOut {
  double reward = 0.0;
  bool success = false;
};

// Piecewise episode reward: r within success_threshold of zero (or better)
// earns the bonus and ends the episode.
inline RewardOut compute_reward(double r, const RewardConfig& cfg) {
  if (r >= -cfg.success_threshold) return {cfg.bonus + r, true};
  return {r, false};
}

// Ternary action, one entry in {-1, 0, +1} per parameter.
using Action = std::vector<int>;

inline std::vector<int> apply_action(const std::vector<int>& x, const Action& a,
                                     const ParamSpace& space) {
  space.check(x);
  if (a.size() != x.size()) throw std::invalid_argument("action size mismatch");
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (a[i] < -1 || a[i] > 1) throw std::invalid_argument("action entries must be in {-1,0,+1}");
    const int hi = space.k(static_cast<int>(i)) - 1;
    out[i] = std::clamp(x[i] + a[i], 0, hi);
  }
  return out;
}

// Flat observation: normalized measured specs, normalized target, then grid
// indices scaled to [0, 1].
using Observation = std::vector<double>;

struct EnvConfig {
  SpecRanges ranges;
  int horizon = 30;
  RewardConfig reward;
  ParasiticConfig parasitics;  // scale 0 = clean environment

  void validate(const Circuit& circuit) const {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    reward.validate();
    parasitics.validate();
    if (static_cast<int>(ranges.size()) != circuit.num_specs()) {
      throw std::invalid_argument("spec range count does not match circuit");
    }
    for (const SpecRange& r : ranges) {
      if (r.degenerate()) {
        throw std::invalid_argument(
            "degenerate spec range; run the calibrate verb to produce usable ranges");
      }
    }
  }
};

// Sizing environment: reset to the grid center, step by ternary parameter
// moves, reward per the shaped spec distance. One instance per rollout
// worker; instances share nothing but the (immutable) circuit.
class SizingEnv {
 public:
  SizingEnv(const Circuit& circuit, EnvConfig cfg)
      : circuit_(circuit), cfg_(std::move(cfg)) {
    cfg_.validate(circuit_);
    r_floor_ = cfg_.reward.floor_for(circuit_.num_specs());
  }

  const Circuit& circuit() const { return circuit_; }
  const EnvConfig& config() const { return cfg_; }
  int horizon() const { return cfg_.horizon; }
  int num_params() const { return circuit_.num_params(); }
  int num_specs() const { return circuit_.num_specs(); }
  int obs_dim() const { return 2 * num_specs() + num_params(); }
  double r_floor() const { return r_floor_; }

  const std::vector<int>& x() const { return x_; }
  const TargetSpec& target() const { return target_; }
  const SpecVector& last_spec() const { return last_spec_; }
  int steps_taken() const { return step_idx_; }
  int sim_count() const { return sim_count_; }
  bool episode_done() const { return done_; }

  Observation reset(TargetSpec target) {
    if (static_cast<int>(target.size()) != num_specs()) {
      throw std::invalid_argument("target size mismatch");
    }
    target_ = std::move(target);
    x_ = circuit_.param_space().center();
    step_idx_ = 0;
    sim_count_ = 0;
    done_ = false;
    simulate_current();
    return observation();
  }

  struct Step {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    double r_raw = 0.0;
    bool success = false;
    bool feasible = true;
  };

  Step step(const Action& a) {
    if (target_.empty()) throw std::logic_error("step before reset");
    if (done_) throw std::logic_error("step on a finished episode");

    x_ = apply_action(x_, a, circuit_.param_space());
    simulate_current();
    ++step_idx_;

    Step out;
    out.feasible = last_spec_.feasible;
    if (last_spec_.feasible) {
      out.r_raw = compute_r(last_spec_, target_, circuit_.spec_defs(), cfg_.reward);
      const RewardOut ro = compute_reward(out.r_raw, cfg_.reward);
      out.reward = ro.reward;
      out.success = ro.success;
    } else {
      // infeasible corners never end the episode early
      out.r_raw = r_floor_;
      out.reward = r_floor_;
      out.success = false;
    }
    done_ = out.success || step_idx_ >= cfg_.horizon;
    out.done = done_;
    out.obs = observation();
    return out;
  }

  Observation observation() const {
    Observation obs;
    obs.reserve(static_cast<std::size_t>(obs_dim()));
    for (int m = 0; m < num_specs(); ++m) {
      const auto mi = static_cast<std::size_t>(m);
      obs.push_back(last_spec_.feasible
                        ? normalize_spec(last_spec_.values[mi], cfg_.ranges[mi])
                        : cfg_.reward.infeasible_obs);
    }
    for (int m = 0; m < num_specs(); ++m) {
      const auto mi = static_cast<std::size_t>(m);
      obs.push_back(normalize_spec(target_[mi], cfg_.ranges[mi]));
    }
    const ParamSpace& space = circuit_.param_space();
    for (int i = 0; i < num_params(); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      obs.push_back(static_cast<double>(x_[ii]) / static_cast<double>(space.k(i) - 1));
    }
    return obs;
  }

 private:
  void simulate_current() {
    last_spec_ = circuit_.simulate(x_, cfg_.parasitics.active() ? &cfg_.parasitics : nullptr);
    ++sim_count_;
  }

  const Circuit& circuit_;
  EnvConfig cfg_;
  double r_floor_ = 0.0;
  std::vector<int> x_;
  TargetSpec target_;
  SpecVector last_spec_;
  int step_idx_ = 0;
  int sim_count_ = 0;
  bool done_ = true;
};

// Targets drawn independently uniform within each spec range.
inline std::vector<TargetSpec> sample_targets(const SpecRanges& ranges, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("target count must be at least 1");
  std::vector<TargetSpec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    TargetSpec t;
    t.reserve(ranges.size());
    for (const SpecRange& r : ranges) t.push_back(rng.uniform(r.lo, r.hi));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace asizer
