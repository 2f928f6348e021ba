#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace asizer {

using cplx = std::complex<double>;

// Raised for singular systems, invalid netlists and failed measurements.
// Callers that size circuits treat it as "this parameter point is
// infeasible", never as silent NaNs.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ComponentKind { Resistor, Capacitor, Conductance, Vccs, CurrentSource };

// One linear small-signal element. Node 0 is ground. A vccs draws the
// current gm * (V(cp) - V(cq)) out of node a and delivers it into node b,
// so vccs(drain, source, gate, source, gm) gives the usual inverting MOS
// orientation. CurrentSource elements carry no stamp; they mark
// noise-injection ports and are excited through a right-hand-side vector.
struct Component {
  ComponentKind kind = ComponentKind::Resistor;
  int a = 0;
  int b = 0;
  int cp = 0;  // vccs control +
  int cq = 0;  // vccs control -
  double value = 0.0;

  static Component resistor(int a, int b, double ohms) {
    return {ComponentKind::Resistor, a, b, 0, 0, ohms};
  }
  static Component capacitor(int a, int b, double farads) {
    return {ComponentKind::Capacitor, a, b, 0, 0, farads};
  }
  static Component conductance(int a, int b, double siemens) {
    return {ComponentKind::Conductance, a, b, 0, 0, siemens};
  }
  static Component vccs(int out_p, int out_q, int ctrl_p, int ctrl_q, double gm) {
    return {ComponentKind::Vccs, out_p, out_q, ctrl_p, ctrl_q, gm};
  }
  static Component current_source(int a, int b) {
    return {ComponentKind::CurrentSource, a, b, 0, 0, 1.0};
  }
};

enum class InputKind { Voltage, Current };

struct IoSpec {
  int input_node = 0;
  int output_node = 0;
  InputKind kind = InputKind::Voltage;
};

struct FrequencyResponse {
  std::vector<double> freqs;  // strictly increasing, Hz
  std::vector<cplx> h;        // transfer value per frequency
  int node_count = 0;
};

namespace detail {

inline void check_node(int node, int node_count, const char* what) {
  if (node < 0 || node >= node_count) {
    throw SimError(std::string("component references unknown node in ") + what);
  }
}

}  // namespace detail

inline void validate_components(const std::vector<Component>& components, int node_count) {
  if (node_count < 2) throw SimError("node_count must be at least 2");
  for (const Component& c : components) {
    switch (c.kind) {
      case ComponentKind::Resistor:
        detail::check_node(c.a, node_count, "resistor");
        detail::check_node(c.b, node_count, "resistor");
        if (!(c.value > 0.0)) throw SimError("resistor value must be positive");
        break;
      case ComponentKind::Capacitor:
        detail::check_node(c.a, node_count, "capacitor");
        detail::check_node(c.b, node_count, "capacitor");
        if (!(c.value > 0.0)) throw SimError("capacitor value must be positive");
        break;
      case ComponentKind::Conductance:
        detail::check_node(c.a, node_count, "conductance");
        detail::check_node(c.b, node_count, "conductance");
        if (!(c.value > 0.0)) throw SimError("conductance value must be positive");
        break;
      case ComponentKind::Vccs:
        detail::check_node(c.a, node_count, "vccs");
        detail::check_node(c.b, node_count, "vccs");
        detail::check_node(c.cp, node_count, "vccs");
        detail::check_node(c.cq, node_count, "vccs");
        if (!std::isfinite(c.value)) throw SimError("vccs value must be finite");
        break;
      case ComponentKind::CurrentSource:
        detail::check_node(c.a, node_count, "current source");
        detail::check_node(c.b, node_count, "current source");
        break;
    }
  }
}

// Reduced nodal system at one frequency: (node_count-1)^2 admittance matrix
// (ground row/column eliminated) plus the excitation vector of a unit AC
// current pushed into the input node.
struct AcSystem {
  int n = 0;                // node_count - 1
  std::vector<cplx> y;      // row-major n*n
  std::vector<cplx> b;      // excitation, unit source at the input node
};

namespace detail {

// Accumulate +v at (r, c) in reduced coordinates, skipping ground.
inline void stamp(std::vector<cplx>& y, int n, int r, int c, cplx v) {
  if (r > 0 && c > 0) y[static_cast<std::size_t>(r - 1) * n + (c - 1)] += v;
}

inline void stamp_pair(std::vector<cplx>& y, int n, int a, int b, cplx v) {
  stamp(y, n, a, a, v);
  stamp(y, n, b, b, v);
  stamp(y, n, a, b, -v);
  stamp(y, n, b, a, -v);
}

}  // namespace detail

inline void build_system_into(const std::vector<Component>& components, int node_count,
                              double freq, int input_node, AcSystem& sys) {
  if (!(freq > 0.0)) throw SimError("frequency must be positive");
  detail::check_node(input_node, node_count, "input");
  if (input_node == 0) throw SimError("input node may not be ground");

  const int n = node_count - 1;
  sys.n = n;
  sys.y.assign(static_cast<std::size_t>(n) * n, cplx(0.0, 0.0));
  sys.b.assign(static_cast<std::size_t>(n), cplx(0.0, 0.0));

  const double w = 2.0 * M_PI * freq;
  bool touches_input = false;
  for (const Component& c : components) {
    if (c.a == input_node || c.b == input_node || c.cp == input_node || c.cq == input_node) {
      touches_input = true;
    }
    switch (c.kind) {
      case ComponentKind::Resistor:
        detail::stamp_pair(sys.y, n, c.a, c.b, cplx(1.0 / c.value, 0.0));
        break;
      case ComponentKind::Conductance:
        detail::stamp_pair(sys.y, n, c.a, c.b, cplx(c.value, 0.0));
        break;
      case ComponentKind::Capacitor:
        detail::stamp_pair(sys.y, n, c.a, c.b, cplx(0.0, w * c.value));
        break;
      case ComponentKind::Vccs: {
        const cplx gm(c.value, 0.0);
        detail::stamp(sys.y, n, c.a, c.cp, gm);
        detail::stamp(sys.y, n, c.a, c.cq, -gm);
        detail::stamp(sys.y, n, c.b, c.cp, -gm);
        detail::stamp(sys.y, n, c.b, c.cq, gm);
        break;
      }
      case ComponentKind::CurrentSource:
        break;  // noise port only
    }
  }
  if (!touches_input) throw SimError("no component touches the input node");
  sys.b[static_cast<std::size_t>(input_node - 1)] = cplx(1.0, 0.0);
}

inline AcSystem build_system(const std::vector<Component>& components, int node_count,
                             double freq, int input_node) {
  validate_components(components, node_count);
  AcSystem sys;
  build_system_into(components, node_count, freq, input_node, sys);
  return sys;
}

// In-place LU with partial pivoting on the system matrix. A pivot smaller
// than 1e-14 times the largest row 1-norm of the assembled matrix is treated
// as singular; the offending frequency is reported so sizing callers can mark
// the point infeasible.
class ComplexLu {
 public:
  void factor(AcSystem& sys, double freq) {
    n_ = sys.n;
    lu_ = &sys.y;
    piv_.resize(static_cast<std::size_t>(n_));

    double max_row_norm = 0.0;
    for (int r = 0; r < n_; ++r) {
      double s = 0.0;
      for (int c = 0; c < n_; ++c) s += std::abs((*lu_)[idx(r, c)]);
      max_row_norm = std::max(max_row_norm, s);
    }
    const double threshold = 1e-14 * max_row_norm;

    for (int k = 0; k < n_; ++k) {
      int p = k;
      double best = std::abs((*lu_)[idx(k, k)]);
      for (int r = k + 1; r < n_; ++r) {
        const double m = std::abs((*lu_)[idx(r, k)]);
        if (m > best) {
          best = m;
          p = r;
        }
      }
      if (!(best > threshold) || !std::isfinite(best)) {
        throw SimError("singular system at f = " + std::to_string(freq) + " Hz");
      }
      piv_[static_cast<std::size_t>(k)] = p;
      if (p != k) {
        for (int c = 0; c < n_; ++c) std::swap((*lu_)[idx(p, c)], (*lu_)[idx(k, c)]);
      }
      const cplx pivot = (*lu_)[idx(k, k)];
      for (int r = k + 1; r < n_; ++r) {
        const cplx m = (*lu_)[idx(r, k)] / pivot;
        (*lu_)[idx(r, k)] = m;
        if (m != cplx(0.0, 0.0)) {
          for (int c = k + 1; c < n_; ++c) (*lu_)[idx(r, c)] -= m * (*lu_)[idx(k, c)];
        }
      }
    }
  }

  // Solve L U x = P b. b is overwritten with the solution. All row swaps
  // are applied to b up front; the stored L rows are in final (post-swap)
  // positions, so interleaving swaps with elimination would mis-permute.
  void solve(std::vector<cplx>& b) const {
    for (int k = 0; k < n_; ++k) {
      const int p = piv_[static_cast<std::size_t>(k)];
      if (p != k) std::swap(b[static_cast<std::size_t>(p)], b[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < n_; ++k) {
      for (int r = k + 1; r < n_; ++r) {
        b[static_cast<std::size_t>(r)] -= (*lu_)[idx(r, k)] * b[static_cast<std::size_t>(k)];
      }
    }
    for (int k = n_ - 1; k >= 0; --k) {
      for (int c = k + 1; c < n_; ++c) {
        b[static_cast<std::size_t>(k)] -= (*lu_)[idx(k, c)] * b[static_cast<std::size_t>(c)];
      }
      b[static_cast<std::size_t>(k)] /= (*lu_)[idx(k, k)];
    }
  }

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c);
  }

  int n_ = 0;
  std::vector<cplx>* lu_ = nullptr;
  std::vector<int> piv_;
};

// Transfer value at a single frequency. For a voltage input the ratio
// V(out)/V(in) is taken from the unit-current solve; with a single excitation
// every node voltage scales with the source, so the ratio is independent of
// the source kind. For a current input the result is the transimpedance
// V(out)/I(in).
inline cplx solve_ac(const std::vector<Component>& components, int node_count,
                     const IoSpec& io, double freq) {
  validate_components(components, node_count);
  detail::check_node(io.output_node, node_count, "output");
  if (io.output_node == 0) throw SimError("output node may not be ground");

  AcSystem sys;
  build_system_into(components, node_count, freq, io.input_node, sys);
  ComplexLu lu;
  lu.factor(sys, freq);
  std::vector<cplx> v = sys.b;
  lu.solve(v);

  const cplx vout = v[static_cast<std::size_t>(io.output_node - 1)];
  if (io.kind == InputKind::Current) return vout;
  const cplx vin = v[static_cast<std::size_t>(io.input_node - 1)];
  if (std::abs(vin) == 0.0) {
    throw SimError("input node has zero response at f = " + std::to_string(freq) + " Hz");
  }
  return vout / vin;
}

// Log-spaced frequency grid, endpoints included.
inline std::vector<double> log_grid(double f_start, double f_stop, int points_per_decade) {
  if (!(f_start > 0.0) || !(f_stop > 0.0) || !(f_start < f_stop)) {
    throw SimError("sweep requires 0 < f_start < f_stop");
  }
  if (points_per_decade < 10) throw SimError("points_per_decade must be at least 10");
  const double decades = std::log10(f_stop / f_start);
  const int count = static_cast<int>(std::ceil(decades * points_per_decade - 1e-9)) + 1;
  std::vector<double> freqs(static_cast<std::size_t>(count));
  for (int k = 0; k < count - 1; ++k) {
    freqs[static_cast<std::size_t>(k)] =
        f_start * std::pow(10.0, static_cast<double>(k) / points_per_decade);
  }
  freqs[static_cast<std::size_t>(count - 1)] = f_stop;
  return freqs;
}

inline FrequencyResponse frequency_sweep(const std::vector<Component>& components,
                                         int node_count, const IoSpec& io, double f_start,
                                         double f_stop, int points_per_decade) {
  validate_components(components, node_count);
  detail::check_node(io.output_node, node_count, "output");
  if (io.output_node == 0) throw SimError("output node may not be ground");

  FrequencyResponse fr;
  fr.node_count = node_count;
  fr.freqs = log_grid(f_start, f_stop, points_per_decade);
  fr.h.resize(fr.freqs.size());

  AcSystem sys;
  ComplexLu lu;
  std::vector<cplx> v;
  for (std::size_t i = 0; i < fr.freqs.size(); ++i) {
    const double f = fr.freqs[i];
    build_system_into(components, node_count, f, io.input_node, sys);
    lu.factor(sys, f);
    v = sys.b;
    lu.solve(v);
    cplx h = v[static_cast<std::size_t>(io.output_node - 1)];
    if (io.kind == InputKind::Voltage) {
      const cplx vin = v[static_cast<std::size_t>(io.input_node - 1)];
      if (std::abs(vin) == 0.0) {
        throw SimError("input node has zero response at f = " + std::to_string(f) + " Hz");
      }
      h /= vin;
    }
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) {
      throw SimError("non-finite transfer at f = " + std::to_string(f) + " Hz");
    }
    fr.h[i] = h;
  }
  return fr;
}

}  // namespace asizer
