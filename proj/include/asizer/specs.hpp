#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace asizer {

// How a design specification enters the reward: hard constraints must meet
// their target (from above or below); minimize-objectives are pushed down
// with a small weight.
enum class SpecSense { HardGe, HardLe, Minimize };

struct SpecDef {
  std::string name;
  std::string unit;
  SpecSense sense = SpecSense::HardGe;
};

struct SpecRange {
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const { return !(hi > lo); }
};

using SpecRanges = std::vector<SpecRange>;  // aligned with a circuit's SpecDefs

// Measured performance at one parameter point. Infeasible simulations are
// flagged explicitly; values are only meaningful when feasible.
struct SpecVector {
  std::vector<double> values;
  bool feasible = true;
};

// Desired performance, one entry per spec, same ordering as SpecDefs.
using TargetSpec = std::vector<double>;

// Map range interior to [-1, 1]; values outside extrapolate linearly.
inline double normalize_spec(double value, const SpecRange& range) {
  if (range.degenerate()) throw std::invalid_argument("degenerate spec range");
  const double mid = 0.5 * (range.lo + range.hi);
  const double halfspan = 0.5 * (range.hi - range.lo);
  return (value - mid) / halfspan;
}

}  // namespace asizer
