#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "asizer/env.hpp"
#include "asizer/rng.hpp"

namespace asizer {

struct GaConfig {
  int population = 50;
  int tournament_k = 3;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  long max_evals = 20000;
  bool uniform_resample = false;  // mutate by resampling instead of +-1 steps
  std::uint64_t seed = 1;

  void validate() const {
    if (population < 4) throw std::invalid_argument("GA population must be at least 4");
    if (tournament_k < 1 || tournament_k > population) {
      throw std::invalid_argument("invalid tournament size");
    }
    if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 ||
        mutation_rate > 1.0) {
      throw std::invalid_argument("GA rates must be probabilities");
    }
    if (max_evals < 1) throw std::invalid_argument("max_evals must be positive");
  }
};

struct GaResult {
  std::vector<int> best_x;
  double best_r = 0.0;
  long eval_count = 0;
  bool success = false;
};

// Vanilla genetic algorithm over the discrete grid. Fitness is the exact
// reward function the RL environment optimizes (compute_r, infeasible points
// get the same floor), and the success criterion is the same r >= -threshold,
// so simulation counts are directly comparable.
inline GaResult ga_optimize(const Circuit& circuit, const TargetSpec& target,
                            const RewardConfig& reward, const GaConfig& cfg,
                            const ParasiticConfig* parasitics = nullptr) {
  cfg.validate();
  reward.validate();
  const ParamSpace& space = circuit.param_space();
  const int dim = space.dim();
  const double r_floor = reward.floor_for(circuit.num_specs());
  Rng rng(cfg.seed);

  GaResult out;
  out.best_r = r_floor - 1.0;

  auto evaluate = [&](const std::vector<int>& x) -> double {
    const SpecVector sv = circuit.simulate(x, parasitics);
    ++out.eval_count;
    const double r =
        sv.feasible ? compute_r(sv, target, circuit.spec_defs(), reward) : r_floor;
    if (r > out.best_r) {
      out.best_r = r;
      out.best_x = x;
    }
    if (r >= -reward.success_threshold) out.success = true;
    return r;
  };

  std::vector<std::vector<int>> pop(static_cast<std::size_t>(cfg.population));
  std::vector<double> fit(static_cast<std::size_t>(cfg.population));
  for (auto& ind : pop) {
    ind.resize(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      ind[static_cast<std::size_t>(i)] = rng.betweeni(0, space.k(i) - 1);
    }
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    fit[i] = evaluate(pop[i]);
    if (out.success || out.eval_count >= cfg.max_evals) return out;
  }

  auto tournament = [&]() -> std::size_t {
    std::size_t best = static_cast<std::size_t>(rng.betweeni(0, cfg.population - 1));
    for (int k = 1; k < cfg.tournament_k; ++k) {
      const std::size_t c = static_cast<std::size_t>(rng.betweeni(0, cfg.population - 1));
      if (fit[c] > fit[best]) best = c;
    }
    return best;
  };

  while (true) {
    // elitism of one
    std::size_t elite = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (fit[i] > fit[elite]) elite = i;
    }
    std::vector<std::vector<int>> next;
    std::vector<double> next_fit;
    next.reserve(pop.size());
    next_fit.reserve(pop.size());
    next.push_back(pop[elite]);
    next_fit.push_back(fit[elite]);

    while (next.size() < pop.size()) {
      const std::vector<int>& pa = pop[tournament()];
      const std::vector<int>& pb = pop[tournament()];
      std::vector<int> child = pa;
      if (rng.uniform() < cfg.crossover_rate) {
        for (int i = 0; i < dim; ++i) {
          if (rng.uniform() < 0.5) child[static_cast<std::size_t>(i)] = pb[static_cast<std::size_t>(i)];
        }
      }
      for (int i = 0; i < dim; ++i) {
        if (rng.uniform() < cfg.mutation_rate) {
          auto& gene = child[static_cast<std::size_t>(i)];
          if (cfg.uniform_resample) {
            gene = rng.betweeni(0, space.k(i) - 1);
          } else {
            const int step = rng.uniform() < 0.5 ? -1 : 1;
            gene = std::clamp(gene + step, 0, space.k(i) - 1);
          }
        }
      }
      next_fit.push_back(evaluate(child));
      next.push_back(std::move(child));
      if (out.success || out.eval_count >= cfg.max_evals) return out;
    }
    pop.swap(next);
    fit.swap(next_fit);
  }
}

struct RandomAgentResult {
  int reached = 0;
  int total = 0;
  std::vector<std::uint8_t> per_target;
  std::vector<int> steps;  // env steps used per target
};

// Uniform-random ternary actions for one episode per target; the paper-style
// floor that trained policies are compared against.
inline RandomAgentResult random_agent_deploy(SizingEnv& env, const std::vector<TargetSpec>& targets,
                                             Rng& rng) {
  RandomAgentResult out;
  out.total = static_cast<int>(targets.size());
  for (const TargetSpec& t : targets) {
    env.reset(t);
    bool done = false;
    bool success = false;
    while (!done) {
      Action a(static_cast<std::size_t>(env.num_params()));
      for (int& ai : a) ai = rng.betweeni(-1, 1);
      const SizingEnv::Step st = env.step(a);
      done = st.done;
      success = st.success;
    }
    out.per_target.push_back(success ? 1 : 0);
    out.steps.push_back(env.steps_taken());
    if (success) ++out.reached;
  }
  return out;
}

}  // namespace asizer
