#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "asizer/device.hpp"
#include "asizer/measure.hpp"
#include "asizer/mna.hpp"
#include "asizer/params.hpp"
#include "asizer/rng.hpp"
#include "asizer/specs.hpp"

namespace asizer {

enum class CircuitId { Dummy, Tia, Opamp };

inline std::string to_string(CircuitId id) {
  switch (id) {
    case CircuitId::Dummy: return "dummy";
    case CircuitId::Tia: return "tia";
    case CircuitId::Opamp: return "opamp";
  }
  return "?";
}

inline CircuitId circuit_id_from_string(const std::string& s) {
  if (s == "dummy") return CircuitId::Dummy;
  if (s == "tia") return CircuitId::Tia;
  if (s == "opamp") return CircuitId::Opamp;
  throw std::invalid_argument("unknown circuit id: " + s);
}

// Analytical stand-in for layout parasitics: width-proportional caps at each
// device's gate and drain plus a fixed routing cap per internal node.
// scale = 0 reproduces the clean environment exactly (nothing is stamped).
struct ParasiticConfig {
  double cap_per_width = 0.0;  // F/m
  double routing_cap = 0.0;    // F
  double scale = 0.0;

  bool active() const { return scale > 0.0 && (cap_per_width > 0.0 || routing_cap > 0.0); }

  void validate() const {
    if (cap_per_width < 0.0 || routing_cap < 0.0 || scale < 0.0) {
      throw std::invalid_argument("parasitic values must be non-negative");
    }
  }
};

struct SweepConfig {
  double f_start = 1.0;
  double f_stop = 1.0e11;
  int points_per_decade = 20;
};

struct TiaConstants {
  double unit_resistance = 5600.0;        // ohms
  double bias_current_density = 50.0;     // A per meter of device width
  double channel_length = 1.0e-7;         // m
  double load_cap = 1.0e-13;              // F at the output node
};

struct OpampConstants {
  double i_ref = 1.0e-5;        // A, mirror reference
  double load_cap = 1.0e-12;    // F at the output node
  double channel_length = 5.0e-7;  // m
};

// A sizing benchmark: a discrete parameter space and a simulator producing
// one SpecVector per grid point. Simulation is pure and deterministic, so
// instances are safe to share across rollout workers.
class Circuit {
 public:
  virtual ~Circuit() = default;

  virtual CircuitId id() const = 0;
  virtual const ParamSpace& param_space() const = 0;
  virtual const std::vector<SpecDef>& spec_defs() const = 0;
  // Published target-sampling ranges; recalibrated defaults are produced by
  // calibrate_ranges and live in the run config.
  virtual SpecRanges default_ranges() const = 0;
  virtual SpecVector simulate(const std::vector<int>& x,
                              const ParasiticConfig* parasitics) const = 0;

  std::string name() const { return to_string(id()); }
  int num_params() const { return param_space().dim(); }
  int num_specs() const { return static_cast<int>(spec_defs().size()); }
  int num_minimize() const {
    int t = 0;
    for (const SpecDef& d : spec_defs()) t += d.sense == SpecSense::Minimize ? 1 : 0;
    return t;
  }

 protected:
  static void reject_parasitics(const ParasiticConfig* parasitics, const char* who) {
    if (parasitics != nullptr && parasitics->active()) {
      throw SimError(std::string(who) + " does not model parasitics");
    }
  }
};

// One-parameter toy bench: walk a 21-level grid until the decoded position
// meets the target. Exists so the learning stack can be exercised end to end
// in milliseconds.
class DummyCircuit final : public Circuit {
 public:
  DummyCircuit()
      : space_(ParamSpace({{"pos", 0.0, 20.0, 1.0}})),
        defs_({{"pos", "", SpecSense::HardGe}}) {}

  CircuitId id() const override { return CircuitId::Dummy; }
  const ParamSpace& param_space() const override { return space_; }
  const std::vector<SpecDef>& spec_defs() const override { return defs_; }
  SpecRanges default_ranges() const override { return {{12.0, 19.0}}; }

  SpecVector simulate(const std::vector<int>& x,
                      const ParasiticConfig* parasitics) const override {
    reject_parasitics(parasitics, "dummy circuit");
    space_.check(x);
    return {{space_.decode(0, x[0])}, true};
  }

 private:
  ParamSpace space_;
  std::vector<SpecDef> defs_;
};

// Shunt-feedback common-source transimpedance amplifier. Parameters: device
// width and multiplier plus the series/parallel counts composing the feedback
// resistor from 5.6 kOhm units. Specs: 1%-settling time (dominant-pole
// formula), -3 dB bandwidth of the transimpedance, and integrated noise over
// [1 Hz, f3db], referred to the input node through the in->out voltage gain.
class TiaCircuit final : public Circuit {
 public:
  TiaCircuit(TechConstants tech, TiaConstants consts, SweepConfig sweep)
      : tech_(tech),
        consts_(consts),
        sweep_(sweep),
        space_(ParamSpace({{"width", 2.0e-6, 10.0e-6, 2.0e-6},
                           {"mult", 2.0, 32.0, 2.0},
                           {"series", 2.0, 20.0, 2.0},
                           {"parallel", 1.0, 20.0, 1.0}})),
        defs_({{"settling", "s", SpecSense::HardLe},
               {"f3db", "Hz", SpecSense::HardGe},
               {"noise", "Vrms", SpecSense::HardLe}}) {
    tech_.validate();
  }

  CircuitId id() const override { return CircuitId::Tia; }
  const ParamSpace& param_space() const override { return space_; }
  const std::vector<SpecDef>& spec_defs() const override { return defs_; }

  SpecRanges default_ranges() const override {
    return {{5.0e-12, 500.0e-12}, {5.0e8, 7.0e9}, {1.0e-6, 5.0e-4}};
  }

  double feedback_resistance(const std::vector<int>& x) const {
    const double n_series = space_.decode(2, x[2]);
    const double n_parallel = space_.decode(3, x[3]);
    return consts_.unit_resistance * n_series / n_parallel;
  }

  SpecVector simulate(const std::vector<int>& x,
                      const ParasiticConfig* parasitics) const override {
    reject_parasitics(parasitics, "tia");
    space_.check(x);
    try {
      return simulate_feasible(x);
    } catch (const SimError&) {
      return {{}, false};
    }
  }

 private:
  SpecVector simulate_feasible(const std::vector<int>& x) const {
    const double w_eff = space_.decode(0, x[0]) * space_.decode(1, x[1]);
    const double rf = feedback_resistance(x);
    const double id = consts_.bias_current_density * w_eff;
    const SmallSignalMos dev = mosfet_small_signal(w_eff, consts_.channel_length, id, tech_);

    // nodes: 0 gnd, 1 input, 2 output
    std::vector<Component> net;
    net.push_back(Component::resistor(1, 2, rf));
    net.push_back(Component::vccs(2, 0, 1, 0, dev.gm));
    net.push_back(Component::conductance(2, 0, dev.gds));
    if (dev.cgs > 0.0) net.push_back(Component::capacitor(1, 0, dev.cgs));
    if (dev.cgd > 0.0) net.push_back(Component::capacitor(1, 2, dev.cgd));
    if (consts_.load_cap > 0.0) net.push_back(Component::capacitor(2, 0, consts_.load_cap));
    validate_components(net, 3);

    const double s_rf = kFourKT / rf;                        // A^2/Hz
    const double s_ch = tech_.four_kt_gamma * dev.gm;        // A^2/Hz

    FrequencyResponse fr;
    fr.node_count = 3;
    fr.freqs = log_grid(sweep_.f_start, sweep_.f_stop, sweep_.points_per_decade);
    fr.h.resize(fr.freqs.size());
    std::vector<std::pair<double, double>> psd_in(fr.freqs.size());

    AcSystem sys;
    ComplexLu lu;
    std::vector<cplx> v(2), nz(2);
    for (std::size_t i = 0; i < fr.freqs.size(); ++i) {
      const double f = fr.freqs[i];
      build_system_into(net, 3, f, 1, sys);
      lu.factor(sys, f);

      v = sys.b;  // unit current into the input node
      lu.solve(v);
      fr.h[i] = v[1];  // transimpedance, V/A
      if (std::abs(v[0]) == 0.0) throw SimError("zero input impedance");
      const double av2 = std::norm(v[1] / v[0]);  // in->out voltage gain
      if (!(av2 > 0.0)) throw SimError("zero forward gain");

      // feedback resistor noise current flows from input to output node
      nz[0] = cplx(-1.0, 0.0);
      nz[1] = cplx(1.0, 0.0);
      lu.solve(nz);
      double s_out = std::norm(nz[1]) * s_rf;

      // channel noise between drain and ground
      nz[0] = cplx(0.0, 0.0);
      nz[1] = cplx(-1.0, 0.0);
      lu.solve(nz);
      s_out += std::norm(nz[1]) * s_ch;

      psd_in[i] = {f, s_out / av2};  // referred as a voltage at the input node
      if (!std::isfinite(psd_in[i].second) || !std::isfinite(std::abs(fr.h[i]))) {
        throw SimError("non-finite response");
      }
    }

    const double f3db = measure_f3db(fr);
    const double settling = std::log(100.0) / (2.0 * M_PI * f3db);  // 1% settling
    const double noise = integrate_input_noise(psd_in, sweep_.f_start, f3db);
    return {{settling, f3db, noise}, true};
  }

  TechConstants tech_;
  TiaConstants consts_;
  SweepConfig sweep_;
  ParamSpace space_;
  std::vector<SpecDef> defs_;
};

// Per-branch bias of the two-stage op-amp, all currents mirrored off i_ref.
struct OpampBias {
  double i_tail = 0.0;
  double i_stage1 = 0.0;  // per input/load device
  double i_stage2 = 0.0;
  double i_total = 0.0;   // reference + tail + second stage
};

// Two-stage Miller op-amp, modeled as the single-ended small-signal
// equivalent of a differential pair with mirror load driving a common-source
// second stage. The mirror node is explicit, so the response carries the
// mirror pole/zero in addition to the dominant Miller pole, the output pole
// and the right-half-plane zero through the compensation cap.
//
// Six shared device widths (input pair, mirror load pair, tail source,
// second-stage driver, second-stage current source, mirror reference) plus
// the compensation cap give a joint grid of 100^7 = 1e14 points.
class OpampCircuit final : public Circuit {
 public:
  OpampCircuit(TechConstants tech, OpampConstants consts, SweepConfig sweep)
      : tech_(tech),
        consts_(consts),
        sweep_(sweep),
        space_(ParamSpace({{"w_in", 0.5e-6, 50.0e-6, 0.5e-6},
                           {"w_load", 0.5e-6, 50.0e-6, 0.5e-6},
                           {"w_tail", 0.5e-6, 50.0e-6, 0.5e-6},
                           {"w_drv", 0.5e-6, 50.0e-6, 0.5e-6},
                           {"w_cs2", 0.5e-6, 50.0e-6, 0.5e-6},
                           {"w_ref", 0.5e-6, 50.0e-6, 0.5e-6},
                           {"cc", 0.1e-12, 10.0e-12, 0.1e-12}})),
        defs_({{"gain", "V/V", SpecSense::HardGe},
               {"ugbw", "Hz", SpecSense::HardGe},
               {"pm", "deg", SpecSense::HardGe},
               {"ibias", "A", SpecSense::Minimize}}) {
    tech_.validate();
  }

  CircuitId id() const override { return CircuitId::Opamp; }
  const ParamSpace& param_space() const override { return space_; }
  const std::vector<SpecDef>& spec_defs() const override { return defs_; }

  SpecRanges default_ranges() const override {
    return {{200.0, 400.0}, {1.0e6, 2.5e7}, {60.0, 60.0}, {1.0e-4, 1.0e-2}};
  }

  OpampBias solve_bias(const std::vector<int>& x) const {
    space_.check(x);
    const double w_tail = space_.decode(2, x[2]);
    const double w_cs2 = space_.decode(4, x[4]);
    const double w_ref = space_.decode(5, x[5]);
    OpampBias b;
    b.i_tail = consts_.i_ref * (w_tail / w_ref);
    b.i_stage1 = 0.5 * b.i_tail;
    b.i_stage2 = consts_.i_ref * (w_cs2 / w_ref);
    b.i_total = consts_.i_ref + b.i_tail + b.i_stage2;
    return b;
  }

  SpecVector simulate(const std::vector<int>& x,
                      const ParasiticConfig* parasitics) const override {
    space_.check(x);
    try {
      return simulate_feasible(x, parasitics);
    } catch (const SimError&) {
      return {{}, false};
    }
  }

 private:
  SpecVector simulate_feasible(const std::vector<int>& x,
                               const ParasiticConfig* parasitics) const {
    const double w_in = space_.decode(0, x[0]);
    const double w_load = space_.decode(1, x[1]);
    const double w_drv = space_.decode(3, x[3]);
    const double w_cs2 = space_.decode(4, x[4]);
    const double cc = space_.decode(6, x[6]);
    const double l = consts_.channel_length;

    const OpampBias bias = solve_bias(x);
    const SmallSignalMos din = mosfet_small_signal(w_in, l, bias.i_stage1, tech_);
    const SmallSignalMos dload = mosfet_small_signal(w_load, l, bias.i_stage1, tech_);
    const SmallSignalMos ddrv = mosfet_small_signal(w_drv, l, bias.i_stage2, tech_);
    const SmallSignalMos dcs2 = mosfet_small_signal(w_cs2, l, bias.i_stage2, tech_);

    // nodes: 0 gnd, 1 input, 2 mirror, 3 first-stage out, 4 output.
    // Input polarity is chosen so the DC gain is positive; both stages
    // invert.
    std::vector<Component> net;
    net.push_back(Component::vccs(2, 0, 0, 1, 0.5 * din.gm));  // mirror-side input device
    net.push_back(Component::vccs(3, 0, 1, 0, 0.5 * din.gm));  // direct-side input device
    net.push_back(Component::vccs(3, 0, 2, 0, dload.gm));      // mirror output device
    net.push_back(Component::conductance(2, 0, dload.gm + dload.gds));  // diode
    net.push_back(Component::conductance(3, 0, din.gds + dload.gds));
    net.push_back(Component::vccs(4, 0, 3, 0, ddrv.gm));
    net.push_back(Component::conductance(4, 0, ddrv.gds + dcs2.gds));

    auto add_cap = [&net](int a, int b, double c) {
      if (c > 0.0) net.push_back(Component::capacitor(a, b, c));
    };
    add_cap(1, 0, din.cgs);
    add_cap(1, 2, din.cgd);
    add_cap(1, 3, din.cgd);
    add_cap(2, 0, 2.0 * dload.cgs);
    add_cap(2, 3, dload.cgd);
    add_cap(3, 0, ddrv.cgs);
    add_cap(3, 4, cc + ddrv.cgd);
    add_cap(4, 0, consts_.load_cap + dcs2.cgd);

    if (parasitics != nullptr && parasitics->active()) {
      parasitics->validate();
      const double s = parasitics->scale;
      const double cpw = parasitics->cap_per_width;
      double extra[5] = {0, 0, 0, 0, 0};  // per node
      // gate/drain caps per modeled device
      extra[1] += 2.0 * cpw * w_in;              // M1, M2 gates
      extra[2] += cpw * w_in;                    // M1 drain
      extra[3] += cpw * w_in;                    // M2 drain
      extra[2] += 3.0 * cpw * w_load;            // M3 gate+drain, M4 gate
      extra[3] += cpw * w_load;                  // M4 drain
      extra[3] += cpw * w_drv;                   // M6 gate
      extra[4] += cpw * w_drv;                   // M6 drain
      extra[4] += cpw * w_cs2;                   // M7 drain
      // routing per internal node
      for (int node = 2; node <= 4; ++node) extra[node] += parasitics->routing_cap;
      for (int node = 1; node <= 4; ++node) add_cap(node, 0, s * extra[node]);
    }
    validate_components(net, 5);

    const FrequencyResponse fr =
        frequency_sweep(net, 5, {1, 4, InputKind::Voltage}, sweep_.f_start, sweep_.f_stop,
                        sweep_.points_per_decade);
    const double gain = measure_dc_gain(fr);
    const double ugbw = measure_ugbw(fr);
    const double pm = measure_phase_margin(fr);
    return {{gain, ugbw, pm, bias.i_total}, true};
  }

  TechConstants tech_;
  OpampConstants consts_;
  SweepConfig sweep_;
  ParamSpace space_;
  std::vector<SpecDef> defs_;
};

struct CalibrationResult {
  SpecRanges ranges;
  int samples = 0;
  int infeasible = 0;
};

// Per-spec [q_lo, q_hi] percentile ranges over uniformly random grid points.
// Used to re-center the target-sampling ranges on what the device model can
// actually reach; infeasible points are excluded.
inline CalibrationResult calibrate_ranges(const Circuit& circuit, int samples,
                                          std::uint64_t seed, double q_lo = 0.10,
                                          double q_hi = 0.90) {
  if (samples < 10) throw std::invalid_argument("calibration needs at least 10 samples");
  const ParamSpace& space = circuit.param_space();
  Rng rng(seed);

  std::vector<std::vector<double>> per_spec(static_cast<std::size_t>(circuit.num_specs()));
  CalibrationResult out;
  out.samples = samples;

  std::vector<int> x(static_cast<std::size_t>(space.dim()));
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < space.dim(); ++i) {
      x[static_cast<std::size_t>(i)] = rng.betweeni(0, space.k(i) - 1);
    }
    const SpecVector sv = circuit.simulate(x, nullptr);
    if (!sv.feasible) {
      ++out.infeasible;
      continue;
    }
    for (int m = 0; m < circuit.num_specs(); ++m) {
      per_spec[static_cast<std::size_t>(m)].push_back(sv.values[static_cast<std::size_t>(m)]);
    }
  }

  auto quantile = [](std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + frac * (v[i + 1] - v[i]);
  };

  for (auto& v : per_spec) {
    if (v.size() < 2) throw SimError("too few feasible samples to calibrate");
    std::sort(v.begin(), v.end());
    out.ranges.push_back({quantile(v, q_lo), quantile(v, q_hi)});
  }
  return out;
}

inline std::unique_ptr<Circuit> make_circuit(CircuitId id, const TechConstants& tech,
                                             const TiaConstants& tia,
                                             const OpampConstants& opamp,
                                             const SweepConfig& sweep) {
  switch (id) {
    case CircuitId::Dummy: return std::make_unique<DummyCircuit>();
    case CircuitId::Tia: return std::make_unique<TiaCircuit>(tech, tia, sweep);
    case CircuitId::Opamp: return std::make_unique<OpampCircuit>(tech, opamp, sweep);
  }
  throw std::invalid_argument("unknown circuit id");
}

}  // namespace asizer
