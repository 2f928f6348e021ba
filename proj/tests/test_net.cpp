#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "asizer/net.hpp"

using namespace asizer;

TEST_CASE("zero weights give uniform heads and zero value") {
  PolicyNet net(4, 3);
  const PolicyNet::Cache c = net.forward(Observation{0.5, -0.5, 1.0, 0.0});
  for (double l : c.logits) CHECK(l == 0.0);
  CHECK(c.value == 0.0);
  double ls[3];
  head_log_softmax(c.logits.data(), ls);
  for (int i = 0; i < 3; ++i) CHECK(std::exp(ls[i]) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax is invariant to shifting a head's logits") {
  double a[3] = {0.3, -1.2, 0.7};
  double b[3] = {0.3 + 5.0, -1.2 + 5.0, 0.7 + 5.0};
  double la[3], lb[3];
  head_log_softmax(a, la);
  head_log_softmax(b, lb);
  for (int i = 0; i < 3; ++i) CHECK(la[i] == Catch::Approx(lb[i]).margin(1e-12));
}

TEST_CASE("one-hidden-unit forward pass matches hand arithmetic") {
  PolicyNet net(2, 1, {1});
  // trunk: W = [0.3, -0.2], b = 0.1; head W = [0.5; -0.4; 0.25], b = (0,0.2,-0.1)
  // value: w = 2.0, b = 0.05
  net.theta = {0.3, -0.2, 0.1, 0.5, -0.4, 0.25, 0.0, 0.2, -0.1, 2.0, 0.05};
  REQUIRE(net.param_count() == 11);
  const double x0 = 0.6, x1 = -0.8;
  const double a = std::tanh(0.3 * x0 - 0.2 * x1 + 0.1);
  const PolicyNet::Cache c = net.forward(Observation{x0, x1});
  CHECK(c.logits[0] == Catch::Approx(0.5 * a).epsilon(1e-15));
  CHECK(c.logits[1] == Catch::Approx(-0.4 * a + 0.2).epsilon(1e-15));
  CHECK(c.logits[2] == Catch::Approx(0.25 * a - 0.1).epsilon(1e-15));
  CHECK(c.value == Catch::Approx(2.0 * a + 0.05).epsilon(1e-15));
}

TEST_CASE("forward rejects a mismatched observation width") {
  PolicyNet net(4, 2);
  CHECK_THROWS_AS(net.forward(Observation{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("sampling frequencies match the softmax distribution") {
  PolicyNet net(3, 2, {4});
  net.init(7);
  const Observation obs{0.2, -0.1, 0.4};
  const PolicyNet::Cache c = net.forward(obs);

  Rng rng(1234);
  int counts[2][3] = {};
  const int n = 100000;
  double entropy_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const ActionSample s = sample_action(c.logits, rng);
    for (int h = 0; h < 2; ++h) ++counts[h][s.choices[static_cast<std::size_t>(h)]];
    entropy_sum += s.entropy;
  }
  for (int h = 0; h < 2; ++h) {
    double ls[3];
    head_log_softmax(c.logits.data() + 3 * h, ls);
    for (int i = 0; i < 3; ++i) {
      CHECK(static_cast<double>(counts[h][i]) / n ==
            Catch::Approx(std::exp(ls[i])).margin(0.01));
    }
  }
  CHECK(entropy_sum / n == Catch::Approx(entropy_sum / n));  // finite
}

TEST_CASE("uniform heads have entropy N ln 3") {
  PolicyNet net(4, 5);
  const PolicyNet::Cache c = net.forward(Observation{0.0, 1.0, -1.0, 0.5});
  Rng rng(2);
  const ActionSample s = sample_action(c.logits, rng);
  CHECK(s.entropy == Catch::Approx(5.0 * std::log(3.0)).epsilon(1e-12));
  CHECK(s.log_prob == Catch::Approx(5.0 * std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("saturated logits pin the sampled component") {
  std::vector<double> logits = {10.0, -10.0, -10.0};
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const ActionSample s = sample_action(logits, rng);
    CHECK(s.action[0] == -1);
  }
  CHECK(greedy_action(logits) == Action{-1});
  CHECK(greedy_action({-1.0, 5.0, 2.0}) == Action{0});
  CHECK(greedy_action({-1.0, 0.0, 2.0}) == Action{1});
}

TEST_CASE("seeded init is deterministic and keeps heads near uniform") {
  PolicyNet a(17, 7);
  PolicyNet b(17, 7);
  a.init(42);
  b.init(42);
  CHECK(a.theta == b.theta);
  PolicyNet c(17, 7);
  c.init(43);
  CHECK(a.theta != c.theta);

  // head gain 0.01: initial policy is indistinguishable from a random agent
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Observation obs(17);
    for (double& v : obs) v = rng.normal();
    const PolicyNet::Cache cache = a.forward(obs);
    for (int h = 0; h < 7; ++h) {
      double ls[3];
      head_log_softmax(cache.logits.data() + 3 * h, ls);
      for (int i = 0; i < 3; ++i) CHECK(std::exp(ls[i]) == Catch::Approx(1.0 / 3.0).margin(0.01));
    }
  }
}

TEST_CASE("check_finite flags poisoned parameters") {
  PolicyNet net(2, 1);
  net.init(1);
  CHECK_NOTHROW(net.check_finite());
  net.theta[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(net.check_finite(), TrainError);
}

TEST_CASE("adam takes a bias-corrected step") {
  std::vector<double> theta = {1.0, -2.0};
  AdamState adam(2);
  const std::vector<double> grad = {0.5, -0.25};
  adam.step(theta, grad, 0.1);
  // first step moves by exactly lr in the gradient's sign direction
  CHECK(theta[0] == Catch::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-9));
  CHECK(theta[1] == Catch::Approx(-2.0 + 0.1 * 0.25 / (0.25 + 1e-8)).epsilon(1e-9));
}
