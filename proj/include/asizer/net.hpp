#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "asizer/env.hpp"
#include "asizer/rng.hpp"

namespace asizer {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Policy/value MLP. Tanh trunk (default 3 x 50), N independent ternary
// action heads (3 logits each) and a scalar value head sharing the trunk.
// All parameters live in one flat vector so the optimizer, the checkpoint
// format and the finite-difference tests can treat the network uniformly.
class PolicyNet {
 public:
  PolicyNet() = default;

  PolicyNet(int in_dim, int num_heads, std::vector<int> hidden = {50, 50, 50})
      : in_dim_(in_dim), num_heads_(num_heads), hidden_(std::move(hidden)) {
    if (in_dim_ < 1 || num_heads_ < 1 || hidden_.empty()) {
      throw std::invalid_argument("invalid network shape");
    }
    std::size_t total = 0;
    int prev = in_dim_;
    for (int h : hidden_) {
      if (h < 1) throw std::invalid_argument("invalid hidden width");
      trunk_.push_back({total, total + static_cast<std::size_t>(h) * prev, h, prev});
      total += static_cast<std::size_t>(h) * prev + static_cast<std::size_t>(h);
      prev = h;
    }
    head_ = {total, total + static_cast<std::size_t>(3 * num_heads_) * prev, 3 * num_heads_, prev};
    total += static_cast<std::size_t>(3 * num_heads_) * prev + static_cast<std::size_t>(3 * num_heads_);
    value_ = {total, total + static_cast<std::size_t>(prev), 1, prev};
    total += static_cast<std::size_t>(prev) + 1;
    theta.assign(total, 0.0);
  }

  int in_dim() const { return in_dim_; }
  int num_heads() const { return num_heads_; }
  const std::vector<int>& hidden() const { return hidden_; }
  std::size_t param_count() const { return theta.size(); }

  // Orthogonal rows/columns from a seeded Gaussian draw, gain 1 on the
  // trunk, 0.01 on the action heads so the initial policy is near-uniform.
  void init(std::uint64_t seed) {
    Rng rng(seed);
    for (const Block& bl : trunk_) init_block(bl, 1.0, rng);
    init_block(head_, 0.01, rng);
    init_block(value_, 1.0, rng);
  }

  struct Cache {
    std::vector<std::vector<double>> act;  // input + trunk activations
    std::vector<double> logits;            // 3 * num_heads
    double value = 0.0;
  };

  void forward(const double* obs, Cache& c) const {
    c.act.resize(trunk_.size() + 1);
    c.act[0].assign(obs, obs + in_dim_);
    for (std::size_t l = 0; l < trunk_.size(); ++l) {
      affine(trunk_[l], c.act[l], c.act[l + 1]);
      for (double& v : c.act[l + 1]) v = std::tanh(v);
    }
    affine(head_, c.act.back(), c.logits);
    std::vector<double> val;
    affine(value_, c.act.back(), val);
    c.value = val[0];
  }

  Cache forward(const Observation& obs) const {
    if (static_cast<int>(obs.size()) != in_dim_) {
      throw std::invalid_argument("observation width does not match network input");
    }
    Cache c;
    forward(obs.data(), c);
    return c;
  }

  // Accumulate dLoss/dtheta into grad given upstream dLoss/dlogits and
  // dLoss/dvalue for one sample.
  void backward(const Cache& c, const std::vector<double>& dlogits, double dvalue,
                std::vector<double>& grad) const {
    std::vector<double> da(c.act.back().size(), 0.0);

    // heads
    for (int r = 0; r < head_.rows; ++r) {
      const double d = dlogits[static_cast<std::size_t>(r)];
      if (d == 0.0) continue;
      const std::size_t row = head_.w_off + static_cast<std::size_t>(r) * head_.cols;
      for (int cidx = 0; cidx < head_.cols; ++cidx) {
        grad[row + cidx] += d * c.act.back()[static_cast<std::size_t>(cidx)];
        da[static_cast<std::size_t>(cidx)] += d * theta[row + cidx];
      }
      grad[head_.b_off + static_cast<std::size_t>(r)] += d;
    }
    // value head
    if (dvalue != 0.0) {
      for (int cidx = 0; cidx < value_.cols; ++cidx) {
        grad[value_.w_off + cidx] += dvalue * c.act.back()[static_cast<std::size_t>(cidx)];
        da[static_cast<std::size_t>(cidx)] += dvalue * theta[value_.w_off + cidx];
      }
      grad[value_.b_off] += dvalue;
    }
    // trunk
    std::vector<double> dprev;
    for (std::size_t l = trunk_.size(); l-- > 0;) {
      const Block& bl = trunk_[l];
      const std::vector<double>& a = c.act[l + 1];
      const std::vector<double>& x = c.act[l];
      dprev.assign(x.size(), 0.0);
      for (int r = 0; r < bl.rows; ++r) {
        const double dz = da[static_cast<std::size_t>(r)] *
                          (1.0 - a[static_cast<std::size_t>(r)] * a[static_cast<std::size_t>(r)]);
        if (dz == 0.0) continue;
        const std::size_t row = bl.w_off + static_cast<std::size_t>(r) * bl.cols;
        for (int cidx = 0; cidx < bl.cols; ++cidx) {
          grad[row + cidx] += dz * x[static_cast<std::size_t>(cidx)];
          dprev[static_cast<std::size_t>(cidx)] += dz * theta[row + cidx];
        }
        grad[bl.b_off + static_cast<std::size_t>(r)] += dz;
      }
      da.swap(dprev);
    }
  }

  void check_finite() const {
    for (double v : theta) {
      if (!std::isfinite(v)) throw TrainError("non-finite network parameter");
    }
  }

  std::vector<double> theta;

 private:
  struct Block {
    std::size_t w_off = 0;
    std::size_t b_off = 0;
    int rows = 0;
    int cols = 0;
  };

  void affine(const Block& bl, const std::vector<double>& x, std::vector<double>& out) const {
    out.assign(static_cast<std::size_t>(bl.rows), 0.0);
    for (int r = 0; r < bl.rows; ++r) {
      const std::size_t row = bl.w_off + static_cast<std::size_t>(r) * bl.cols;
      double acc = theta[bl.b_off + static_cast<std::size_t>(r)];
      for (int cidx = 0; cidx < bl.cols; ++cidx) {
        acc += theta[row + cidx] * x[static_cast<std::size_t>(cidx)];
      }
      out[static_cast<std::size_t>(r)] = acc;
    }
  }

  void init_block(const Block& bl, double gain, Rng& rng) {
    // Gaussian draw, then modified Gram-Schmidt on the shorter matrix side.
    const int rows = bl.rows, cols = bl.cols;
    std::vector<double> m(static_cast<std::size_t>(rows) * cols);
    for (double& v : m) v = rng.normal();
    const bool by_rows = rows <= cols;
    const int outer = by_rows ? rows : cols;
    const int inner = by_rows ? cols : rows;
    auto at = [&](int o, int i) -> double& {
      return by_rows ? m[static_cast<std::size_t>(o) * cols + i]
                     : m[static_cast<std::size_t>(i) * cols + o];
    };
    for (int o = 0; o < outer; ++o) {
      for (int p = 0; p < o; ++p) {
        double dot = 0.0;
        for (int i = 0; i < inner; ++i) dot += at(o, i) * at(p, i);
        for (int i = 0; i < inner; ++i) at(o, i) -= dot * at(p, i);
      }
      double nrm = 0.0;
      for (int i = 0; i < inner; ++i) nrm += at(o, i) * at(o, i);
      nrm = std::sqrt(nrm);
      if (nrm < 1e-12) nrm = 1.0;
      for (int i = 0; i < inner; ++i) at(o, i) = at(o, i) / nrm * gain;
    }
    for (std::size_t i = 0; i < m.size(); ++i) theta[bl.w_off + i] = m[i];
    for (int r = 0; r < rows; ++r) theta[bl.b_off + static_cast<std::size_t>(r)] = 0.0;
  }

  int in_dim_ = 0;
  int num_heads_ = 0;
  std::vector<int> hidden_;
  std::vector<Block> trunk_;
  Block head_;
  Block value_;
};

// ---- categorical helpers over per-head logit triples ----

inline void head_log_softmax(const double* logits, double* out) {
  const double m = std::max(logits[0], std::max(logits[1], logits[2]));
  const double z = std::exp(logits[0] - m) + std::exp(logits[1] - m) + std::exp(logits[2] - m);
  const double lz = std::log(z) + m;
  out[0] = logits[0] - lz;
  out[1] = logits[1] - lz;
  out[2] = logits[2] - lz;
}

struct ActionSample {
  Action action;            // entries in {-1, 0, +1}
  std::vector<int> choices; // raw head indices in {0, 1, 2}
  double log_prob = 0.0;
  double entropy = 0.0;
};

inline ActionSample sample_action(const std::vector<double>& logits, Rng& rng) {
  const int heads = static_cast<int>(logits.size() / 3);
  ActionSample s;
  s.action.resize(static_cast<std::size_t>(heads));
  s.choices.resize(static_cast<std::size_t>(heads));
  double ls[3];
  for (int h = 0; h < heads; ++h) {
    head_log_softmax(logits.data() + 3 * h, ls);
    const double u = rng.uniform();
    const double p0 = std::exp(ls[0]);
    const double p1 = std::exp(ls[1]);
    int pick = 2;
    if (u < p0) {
      pick = 0;
    } else if (u < p0 + p1) {
      pick = 1;
    }
    s.choices[static_cast<std::size_t>(h)] = pick;
    s.action[static_cast<std::size_t>(h)] = pick - 1;
    s.log_prob += ls[pick];
    for (int i = 0; i < 3; ++i) s.entropy -= std::exp(ls[i]) * ls[i];
  }
  return s;
}

inline Action greedy_action(const std::vector<double>& logits) {
  const int heads = static_cast<int>(logits.size() / 3);
  Action a(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const double* l = logits.data() + 3 * h;
    int pick = 0;
    if (l[1] > l[pick]) pick = 1;
    if (l[2] > l[pick]) pick = 2;
    a[static_cast<std::size_t>(h)] = pick - 1;
  }
  return a;
}

// First/second-moment adaptive step with bias correction.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
};

}  // namespace asizer
