#pragma once

#include <cmath>
#include <stdexcept>

namespace asizer {

// Long-channel square-law device constants. Stand-in for a real foundry
// model: closed-form, fast, and good enough for relative sizing tradeoffs.
struct TechConstants {
  double mu_cox = 2.0e-4;         // A/V^2
  double lambda = 0.2;            // 1/V, channel-length modulation
  double cox = 8.0e-3;            // F/m^2, gate oxide capacitance
  double cov = 3.0e-10;           // F/m, overlap capacitance per width
  double four_kt_gamma = 1.1e-20; // V*A*s, channel noise coefficient

  void validate() const {
    if (!(mu_cox > 0.0) || !(lambda > 0.0) || !(cox > 0.0) || cov < 0.0 ||
        four_kt_gamma < 0.0) {
      throw std::invalid_argument("invalid technology constants");
    }
  }
};

// 4kT at 300 K, resistor thermal current PSD is kFourKT / R.
inline constexpr double kFourKT = 4.0 * 1.380649e-23 * 300.0;

struct SmallSignalMos {
  double gm = 0.0;   // S
  double gds = 0.0;  // S
  double cgs = 0.0;  // F
  double cgd = 0.0;  // F
  double id = 0.0;   // A
  double vov = 0.0;  // V

  SmallSignalMos() = default;

  SmallSignalMos(double gm_, double gds_, double cgs_, double cgd_, double id_, double vov_)
      : gm(gm_), gds(gds_), cgs(cgs_), cgd(cgd_), id(id_), vov(vov_) {
    if (gm < 0.0 || id < 0.0 || !(gds > 0.0) || cgs < 0.0 || cgd < 0.0) {
      throw std::invalid_argument("invalid small-signal device parameters");
    }
    // square-law consistency: gm must equal 2*id/vov
    if (vov > 0.0 && std::abs(gm * vov - 2.0 * id) > 1e-9 * (std::abs(gm * vov) + 2.0 * id)) {
      throw std::invalid_argument("device violates gm = 2*id/vov");
    }
  }
};

inline SmallSignalMos mosfet_small_signal(double w, double l, double id,
                                          const TechConstants& tech) {
  if (!(w > 0.0) || !(l > 0.0) || !(id > 0.0)) {
    throw std::invalid_argument("mosfet_small_signal requires positive w, l, id");
  }
  const double vov = std::sqrt(2.0 * id / (tech.mu_cox * (w / l)));
  const double gm = 2.0 * id / vov;
  const double gds = tech.lambda * id;
  const double cgs = (2.0 / 3.0) * w * l * tech.cox;
  const double cgd = w * tech.cov;
  return SmallSignalMos(gm, gds, cgs, cgd, id, vov);
}

}  // namespace asizer
