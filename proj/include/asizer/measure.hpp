#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "asizer/mna.hpp"

namespace asizer {

// Spec extraction from a swept response. Crossings are refined by
// interpolating linearly in (log f, |h|); at 20 points/decade this stays
// within ~0.5% of the exact crossing for pole-type responses, which is the
// tolerance the rest of the stack assumes.

inline double measure_dc_gain(const FrequencyResponse& fr) {
  if (fr.freqs.empty()) throw SimError("empty frequency response");
  return std::abs(fr.h.front());
}

namespace detail {

struct Crossing {
  std::size_t lo;     // bracketing sample indices lo, lo+1
  double log_f;       // interpolated crossing, log10(Hz)
};

// First downward crossing of |h| through level, scanning left to right.
inline Crossing find_downward_crossing(const FrequencyResponse& fr, double level,
                                       const char* what) {
  const std::size_t n = fr.freqs.size();
  if (n < 2) throw SimError(std::string("response too short to locate ") + what);
  double prev = std::abs(fr.h[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = std::abs(fr.h[i]);
    if (prev >= level && cur < level) {
      const double lf1 = std::log10(fr.freqs[i - 1]);
      const double lf2 = std::log10(fr.freqs[i]);
      const double t = (prev - level) / (prev - cur);
      return {i - 1, lf1 + t * (lf2 - lf1)};
    }
    prev = cur;
  }
  throw SimError(std::string("no ") + what + " in sweep range");
}

inline double wrap_to_pi(double x) {
  while (x > M_PI) x -= 2.0 * M_PI;
  while (x < -M_PI) x += 2.0 * M_PI;
  return x;
}

}  // namespace detail

// -3 dB frequency relative to the lowest-frequency sample.
inline double measure_f3db(const FrequencyResponse& fr) {
  if (fr.freqs.empty()) throw SimError("empty frequency response");
  const double ref = std::abs(fr.h.front());
  const auto c = detail::find_downward_crossing(fr, ref / std::sqrt(2.0), "-3 dB crossing");
  return std::pow(10.0, c.log_f);
}

// Frequency where |h| crosses unity.
inline double measure_ugbw(const FrequencyResponse& fr) {
  if (fr.freqs.empty()) throw SimError("empty frequency response");
  if (!(std::abs(fr.h.front()) > 1.0)) throw SimError("gain never exceeds unity");
  const auto c = detail::find_downward_crossing(fr, 1.0, "unity crossing");
  return std::pow(10.0, c.log_f);
}

// Phase of h unwrapped across the whole sweep, radians.
inline std::vector<double> unwrapped_phase(const FrequencyResponse& fr) {
  std::vector<double> phase(fr.h.size());
  if (fr.h.empty()) return phase;
  phase[0] = std::arg(fr.h[0]);
  for (std::size_t i = 1; i < fr.h.size(); ++i) {
    const double raw = std::arg(fr.h[i]);
    const double prev_raw = std::arg(fr.h[i - 1]);
    phase[i] = phase[i - 1] + detail::wrap_to_pi(raw - prev_raw);
  }
  return phase;
}

// 180 degrees plus the unwrapped phase at the unity crossing. Requires a
// unity crossing; multi-pole responses rely on the unwrap so phase below
// -180 degrees does not alias.
inline double measure_phase_margin(const FrequencyResponse& fr) {
  if (fr.freqs.empty()) throw SimError("empty frequency response");
  if (!(std::abs(fr.h.front()) > 1.0)) throw SimError("gain never exceeds unity");
  const auto c = detail::find_downward_crossing(fr, 1.0, "unity crossing");
  const std::vector<double> phase = unwrapped_phase(fr);

  const double lf1 = std::log10(fr.freqs[c.lo]);
  const double lf2 = std::log10(fr.freqs[c.lo + 1]);
  const double t = (c.log_f - lf1) / (lf2 - lf1);
  const double ph = phase[c.lo] + t * (phase[c.lo + 1] - phase[c.lo]);
  return 180.0 + ph * 180.0 / M_PI;
}

// sqrt of the trapezoidal integral of a PSD over [f1, f2], linear frequency.
// Samples must cover the band; band edges falling between samples are
// handled by linear interpolation of the PSD.
inline double integrate_input_noise(const std::vector<std::pair<double, double>>& psd,
                                    double f1, double f2) {
  if (psd.size() < 2) throw SimError("noise PSD needs at least two samples");
  if (!(f1 < f2)) throw SimError("noise band is empty");
  if (psd.front().first > f1 || psd.back().first < f2) {
    throw SimError("noise band outside PSD coverage");
  }
  for (std::size_t i = 0; i < psd.size(); ++i) {
    if (psd[i].second < 0.0) throw SimError("noise PSD must be non-negative");
    if (i > 0 && !(psd[i].first > psd[i - 1].first)) {
      throw SimError("noise PSD frequencies must be strictly increasing");
    }
  }

  auto value_at = [&psd](std::size_t i, double f) {
    const auto& [fa, sa] = psd[i];
    const auto& [fb, sb] = psd[i + 1];
    return sa + (sb - sa) * (f - fa) / (fb - fa);
  };

  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < psd.size(); ++i) {
    const double lo = std::max(psd[i].first, f1);
    const double hi = std::min(psd[i + 1].first, f2);
    if (hi <= lo) continue;
    const double s_lo = value_at(i, lo);
    const double s_hi = value_at(i, hi);
    acc += 0.5 * (s_lo + s_hi) * (hi - lo);
  }
  return std::sqrt(acc);
}

}  // namespace asizer
