#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace asizer {

// One discretized design parameter: the grid {start, start+step, ..., stop}.
struct ParamDesc {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  int grid_size() const {
    // epsilon absorbs binary representation error in (stop-start)/step
    return static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  }
};

class ParamSpace {
 public:
  ParamSpace() = default;

  explicit ParamSpace(std::vector<ParamDesc> params) : params_(std::move(params)) {
    for (const ParamDesc& p : params_) {
      if (!(p.step > 0.0) || p.grid_size() < 2) {
        throw std::invalid_argument("parameter " + p.name + " needs at least 2 grid levels");
      }
    }
  }

  int dim() const { return static_cast<int>(params_.size()); }
  const ParamDesc& param(int i) const { return params_[static_cast<std::size_t>(i)]; }
  const std::vector<ParamDesc>& params() const { return params_; }
  int k(int i) const { return params_[static_cast<std::size_t>(i)].grid_size(); }

  double decode(int i, int idx) const {
    const ParamDesc& p = params_[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= p.grid_size()) {
      throw std::out_of_range("grid index out of range for " + p.name);
    }
    return p.start + static_cast<double>(idx) * p.step;
  }

  int encode(int i, double value) const {
    const ParamDesc& p = params_[static_cast<std::size_t>(i)];
    const int idx = static_cast<int>(std::lround((value - p.start) / p.step));
    if (idx < 0 || idx >= p.grid_size()) {
      throw std::out_of_range("value outside grid for " + p.name);
    }
    return idx;
  }

  std::vector<double> decode_all(const std::vector<int>& x) const {
    check(x);
    std::vector<double> out(x.size());
    for (int i = 0; i < dim(); ++i) out[static_cast<std::size_t>(i)] = decode(i, x[static_cast<std::size_t>(i)]);
    return out;
  }

  bool valid(const std::vector<int>& x) const {
    if (static_cast<int>(x.size()) != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      if (x[static_cast<std::size_t>(i)] < 0 || x[static_cast<std::size_t>(i)] >= k(i)) return false;
    }
    return true;
  }

  void check(const std::vector<int>& x) const {
    if (!valid(x)) throw std::invalid_argument("grid point outside parameter space");
  }

  std::vector<int> center() const {
    std::vector<int> x(static_cast<std::size_t>(dim()));
    for (int i = 0; i < dim(); ++i) x[static_cast<std::size_t>(i)] = k(i) / 2;
    return x;
  }

  double joint_size() const {
    double s = 1.0;
    for (int i = 0; i < dim(); ++i) s *= static_cast<double>(k(i));
    return s;
  }

 private:
  std::vector<ParamDesc> params_;
};

}  // namespace asizer
