#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "asizer/env.hpp"
#include "asizer/ga.hpp"
#include "asizer/net.hpp"
#include "asizer/ppo.hpp"
#include "asizer/util.hpp"

namespace asizer {

struct TargetResult {
  TargetSpec target;
  bool reached = false;
  int steps = 0;      // env steps used
  int sims = 0;       // steps + the reset simulation
  SpecVector final_spec;
  std::vector<int> final_x;
};

struct DeploymentReport {
  std::vector<TargetResult> per_target;
  int total = 0;
  int reached = 0;
  double generalization = 0.0;          // reached / total
  double mean_steps_over_reached = 0.0; // env steps, reached targets only
  double mean_sims_over_reached = 0.0;
};

struct DeployOptions {
  bool stochastic = false;  // default greedy: per-head argmax, reproducible
  std::uint64_t seed = 0;   // used only when stochastic
  int workers = 1;
};

namespace detail {

inline std::uint64_t theta_hash(const PolicyNet& net) {
  return fnv1a64(net.theta.data(), net.theta.size() * sizeof(double));
}

inline void run_episode(const PolicyNet& net, SizingEnv& env, const TargetSpec& target,
                        bool stochastic, Rng* rng, TargetResult& out) {
  Observation obs = env.reset(target);
  bool done = false;
  bool success = false;
  while (!done) {
    const PolicyNet::Cache cache = net.forward(obs);
    const Action a =
        stochastic ? sample_action(cache.logits, *rng).action : greedy_action(cache.logits);
    const SizingEnv::Step st = env.step(a);
    obs = st.obs;
    done = st.done;
    success = st.success;
  }
  out.target = target;
  out.reached = success;
  out.steps = env.steps_taken();
  out.sims = env.sim_count();
  out.final_spec = env.last_spec();
  out.final_x = env.x();
}

}  // namespace detail

inline void aggregate_report(DeploymentReport& rep) {
  rep.total = static_cast<int>(rep.per_target.size());
  rep.reached = 0;
  double steps = 0.0, sims = 0.0;
  for (const TargetResult& t : rep.per_target) {
    if (t.reached) {
      ++rep.reached;
      steps += t.steps;
      sims += t.sims;
    }
  }
  rep.generalization = rep.total > 0 ? static_cast<double>(rep.reached) / rep.total : 0.0;
  rep.mean_steps_over_reached = rep.reached > 0 ? steps / rep.reached : 0.0;
  rep.mean_sims_over_reached = rep.reached > 0 ? sims / rep.reached : 0.0;
}

// Run the policy once per target. Deployment never mutates the policy; the
// parameter bytes are hashed before and after as a guard. Greedy episodes
// need no RNG, so targets can be chunked across threads with results written
// into preallocated slots (deterministic output for any worker count).
inline DeploymentReport deploy(const PolicyNet& net, const Circuit& circuit,
                               const EnvConfig& env_cfg, const std::vector<TargetSpec>& targets,
                               const DeployOptions& opts = {}) {
  if (targets.empty()) throw std::invalid_argument("no deployment targets");
  const std::uint64_t before = detail::theta_hash(net);

  DeploymentReport rep;
  rep.per_target.resize(targets.size());

  const int W = opts.stochastic ? 1 : std::max(1, opts.workers);
  if (W == 1) {
    SizingEnv env(circuit, env_cfg);
    std::optional<Rng> rng;
    if (opts.stochastic) rng.emplace(opts.seed);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      detail::run_episode(net, env, targets[i], opts.stochastic, rng ? &*rng : nullptr,
                          rep.per_target[i]);
    }
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(W));
    for (int w = 0; w < W; ++w) {
      threads.emplace_back([&, w] {
        SizingEnv env(circuit, env_cfg);
        for (std::size_t i = static_cast<std::size_t>(w); i < targets.size();
             i += static_cast<std::size_t>(W)) {
          detail::run_episode(net, env, targets[i], false, nullptr, rep.per_target[i]);
        }
      });
    }
    for (auto& t : threads) t.join();
  }

  if (detail::theta_hash(net) != before) {
    throw std::logic_error("deployment mutated policy parameters");
  }
  aggregate_report(rep);
  return rep;
}

// Comparison rows in the style of the published sample-efficiency tables.
struct ComparisonRow {
  std::string method;
  double mean_sims = 0.0;  // simulations to success, reached targets only
  int reached = 0;
  int total = 0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  double speedup = 0.0;  // GA mean evals / RL mean sims
};

inline ComparisonTable compare(const DeploymentReport& rl, const std::vector<GaResult>& ga,
                               const RandomAgentResult* random_agent = nullptr) {
  if (static_cast<int>(ga.size()) != rl.total) {
    throw std::invalid_argument("comparison needs the same target set for RL and GA");
  }
  ComparisonTable table;

  double ga_sum = 0.0;
  int ga_reached = 0;
  for (const GaResult& g : ga) {
    if (g.success) {
      ga_sum += static_cast<double>(g.eval_count);
      ++ga_reached;
    }
  }
  const double ga_mean = ga_reached > 0 ? ga_sum / ga_reached : 0.0;
  table.rows.push_back({"genetic", ga_mean, ga_reached, static_cast<int>(ga.size())});
  if (random_agent != nullptr) {
    double rnd_sum = 0.0;
    int rnd_reached = 0;
    for (std::size_t i = 0; i < random_agent->per_target.size(); ++i) {
      if (random_agent->per_target[i]) {
        rnd_sum += random_agent->steps[i] + 1.0;
        ++rnd_reached;
      }
    }
    table.rows.push_back({"random", rnd_reached > 0 ? rnd_sum / rnd_reached : 0.0, rnd_reached,
                          random_agent->total});
  }
  table.rows.push_back({"rl", rl.mean_sims_over_reached, rl.reached, rl.total});
  if (rl.mean_sims_over_reached > 0.0 && ga_reached > 0) {
    table.speedup = ga_mean / rl.mean_sims_over_reached;
  }
  return table;
}

// Percent difference per spec between clean and parasitic evaluation of the
// same parameter points.
struct SpecDeltaRow {
  std::vector<int> x;
  std::vector<double> percent_delta;
};

inline std::vector<SpecDeltaRow> spec_delta_histogram(const std::vector<std::vector<int>>& points,
                                                      const Circuit& circuit,
                                                      const ParasiticConfig& parasitics) {
  std::vector<SpecDeltaRow> rows;
  for (const std::vector<int>& x : points) {
    const SpecVector clean = circuit.simulate(x, nullptr);
    const SpecVector dirty = circuit.simulate(x, &parasitics);
    if (!clean.feasible || !dirty.feasible) continue;
    SpecDeltaRow row;
    row.x = x;
    for (std::size_t m = 0; m < clean.values.size(); ++m) {
      const double base = std::abs(clean.values[m]);
      row.percent_delta.push_back(base > 0.0 ? 100.0 * (dirty.values[m] - clean.values[m]) / base
                                             : 0.0);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- CSV emission ----

inline std::string deployment_csv(const DeploymentReport& rep, const std::vector<SpecDef>& defs) {
  std::ostringstream out;
  for (const SpecDef& d : defs) out << "target_" << d.name << ",";
  out << "reached,steps";
  for (const SpecDef& d : defs) out << ",final_" << d.name;
  out << "\n";
  for (const TargetResult& t : rep.per_target) {
    for (double v : t.target) out << fmt_double(v) << ",";
    out << (t.reached ? 1 : 0) << "," << t.steps;
    for (std::size_t m = 0; m < defs.size(); ++m) {
      out << ",";
      if (t.final_spec.feasible) {
        out << fmt_double(t.final_spec.values[m]);
      } else {
        out << "infeasible";
      }
    }
    out << "\n";
  }
  return out.str();
}

inline std::string ga_csv(const std::vector<GaResult>& results,
                          const std::vector<TargetSpec>& targets,
                          const std::vector<SpecDef>& defs) {
  std::ostringstream out;
  for (const SpecDef& d : defs) out << "target_" << d.name << ",";
  out << "success,evals,best_r\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (double v : targets[i]) out << fmt_double(v) << ",";
    out << (results[i].success ? 1 : 0) << "," << results[i].eval_count << ","
        << fmt_double(results[i].best_r) << "\n";
  }
  return out.str();
}

inline std::string random_agent_csv(const RandomAgentResult& res,
                                    const std::vector<TargetSpec>& targets,
                                    const std::vector<SpecDef>& defs) {
  std::ostringstream out;
  for (const SpecDef& d : defs) out << "target_" << d.name << ",";
  out << "reached,steps\n";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (double v : targets[i]) out << fmt_double(v) << ",";
    out << static_cast<int>(res.per_target[i]) << "," << res.steps[i] << "\n";
  }
  return out.str();
}

inline std::string spec_delta_csv(const std::vector<SpecDeltaRow>& rows,
                                  const std::vector<SpecDef>& defs) {
  std::ostringstream out;
  bool first = true;
  for (const SpecDef& d : defs) {
    out << (first ? "" : ",") << "delta_pct_" << d.name;
    first = false;
  }
  out << "\n";
  for (const SpecDeltaRow& r : rows) {
    for (std::size_t m = 0; m < r.percent_delta.size(); ++m) {
      out << (m == 0 ? "" : ",") << fmt_double(r.percent_delta[m]);
    }
    out << "\n";
  }
  return out.str();
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "env_steps,mean_reward\n";
  for (const CurvePoint& p : curve) {
    out << p.env_steps << "," << fmt_double(p.mean_reward) << "\n";
  }
  return out.str();
}

inline std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "method,mean_sims_to_success,reached,total,generalization,speedup_vs_rl\n";
  for (const ComparisonRow& r : table.rows) {
    out << r.method << "," << fmt_double(r.mean_sims) << "," << r.reached << "," << r.total << ","
        << fmt_double(r.total > 0 ? static_cast<double>(r.reached) / r.total : 0.0) << ",";
    if (r.method == "rl") out << fmt_double(table.speedup);
    out << "\n";
  }
  return out.str();
}

}  // namespace asizer
