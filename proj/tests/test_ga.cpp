#include <catch2/catch_amalgamated.hpp>

#include "asizer/circuits.hpp"
#include "asizer/env.hpp"
#include "asizer/ga.hpp"

using namespace asizer;

namespace {

// 3 parameters, 5 levels each: 125 points, small enough to enumerate.
class Toy3 final : public Circuit {
 public:
  Toy3()
      : space_(ParamSpace({{"a", 0.0, 4.0, 1.0}, {"b", 0.0, 4.0, 1.0}, {"c", 0.0, 4.0, 1.0}})),
        defs_({{"u", "", SpecSense::HardGe}, {"v", "", SpecSense::HardLe}}) {}

  CircuitId id() const override { return CircuitId::Dummy; }
  const ParamSpace& param_space() const override { return space_; }
  const std::vector<SpecDef>& spec_defs() const override { return defs_; }
  SpecRanges default_ranges() const override { return {{0.0, 14.0}, {0.0, 32.0}}; }

  SpecVector simulate(const std::vector<int>& x, const ParasiticConfig*) const override {
    space_.check(x);
    const double u = static_cast<double>(x[0] + x[1] + 2 * x[2]);
    const double v = static_cast<double>(x[0] * x[1] + x[2]);
    return {{u, v}, true};
  }

 private:
  ParamSpace space_;
  std::vector<SpecDef> defs_;
};

double best_r_by_enumeration(const Circuit& c, const TargetSpec& t, const RewardConfig& rc) {
  double best = -1e9;
  std::vector<int> x(3);
  for (x[0] = 0; x[0] < 5; ++x[0])
    for (x[1] = 0; x[1] < 5; ++x[1])
      for (x[2] = 0; x[2] < 5; ++x[2]) {
        best = std::max(best, compute_r(c.simulate(x, nullptr), t, c.spec_defs(), rc));
      }
  return best;
}

}  // namespace

TEST_CASE("GA finds a reachable target quickly") {
  const Toy3 toy;
  const RewardConfig rc;
  // target taken from a known grid point (2,1,3): u = 9, v = 5
  const TargetSpec target = {9.0, 5.0};
  REQUIRE(best_r_by_enumeration(toy, target, rc) >= -rc.success_threshold);

  GaConfig cfg;
  cfg.max_evals = 2000;
  cfg.seed = 5;
  const GaResult res = ga_optimize(toy, target, rc, cfg);
  CHECK(res.success);
  CHECK(res.eval_count <= 2000);
  // reported best matches a recomputation at best_x
  CHECK(compute_r(toy.simulate(res.best_x, nullptr), target, toy.spec_defs(), rc) ==
        Catch::Approx(res.best_r).margin(1e-15));
}

TEST_CASE("GA reports failure on an unreachable target") {
  const Toy3 toy;
  const RewardConfig rc;
  const TargetSpec target = {100.0, 0.0};  // u maxes out at 16
  REQUIRE(best_r_by_enumeration(toy, target, rc) < -rc.success_threshold);
  GaConfig cfg;
  cfg.max_evals = 1500;
  cfg.seed = 6;
  const GaResult res = ga_optimize(toy, target, rc, cfg);
  CHECK_FALSE(res.success);
  CHECK(res.eval_count == 1500);
}

TEST_CASE("GA is deterministic under a fixed seed") {
  const Toy3 toy;
  const RewardConfig rc;
  const TargetSpec target = {12.0, 3.0};
  GaConfig cfg;
  cfg.seed = 7;
  cfg.max_evals = 3000;
  const GaResult a = ga_optimize(toy, target, rc, cfg);
  const GaResult b = ga_optimize(toy, target, rc, cfg);
  CHECK(a.eval_count == b.eval_count);
  CHECK(a.best_x == b.best_x);
  CHECK(a.best_r == b.best_r);
}

TEST_CASE("more budget never hurts the best fitness") {
  const Toy3 toy;
  const RewardConfig rc;
  const TargetSpec target = {15.0, 1.0};  // hard but not absurd
  GaConfig cfg;
  cfg.seed = 8;
  cfg.max_evals = 150;
  const GaResult small = ga_optimize(toy, target, rc, cfg);
  cfg.max_evals = 1200;
  const GaResult large = ga_optimize(toy, target, rc, cfg);
  CHECK(large.best_r >= small.best_r);
}

TEST_CASE("degenerate operators leave the population stationary") {
  const Toy3 toy;
  const RewardConfig rc;
  const TargetSpec target = {16.0, 0.0};
  GaConfig cfg;
  cfg.crossover_rate = 0.0;
  cfg.mutation_rate = 0.0;
  cfg.seed = 9;
  cfg.max_evals = 600;
  const GaResult res = ga_optimize(toy, target, rc, cfg);
  // children are clones, so the best never improves past the initial population
  GaConfig first_gen = cfg;
  first_gen.max_evals = cfg.population;
  const GaResult init_only = ga_optimize(toy, target, rc, first_gen);
  CHECK(res.best_r == init_only.best_r);
}

TEST_CASE("GA config validation") {
  GaConfig cfg;
  cfg.population = 2;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GaConfig{};
  cfg.mutation_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GaConfig{};
  cfg.tournament_k = 100;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("random agent counts successes per episode") {
  const DummyCircuit dummy;
  EnvConfig cfg;
  cfg.ranges = {{2.0, 18.0}};

  SECTION("trivial targets all succeed") {
    SizingEnv env(dummy, cfg);
    Rng rng(10);
    const std::vector<TargetSpec> targets(25, TargetSpec{3.0});  // center pos 10 >= 3
    const RandomAgentResult res = random_agent_deploy(env, targets, rng);
    CHECK(res.reached == 25);
    for (int s : res.steps) CHECK(s == 1);
  }
  SECTION("unreachable targets never succeed") {
    SizingEnv env(dummy, cfg);
    Rng rng(11);
    const std::vector<TargetSpec> targets(25, TargetSpec{40.0});  // pos maxes at 20
    const RandomAgentResult res = random_agent_deploy(env, targets, rng);
    CHECK(res.reached == 0);
    for (int s : res.steps) CHECK(s == cfg.horizon);
  }
}
