#include <catch2/catch_amalgamated.hpp>

#include "asizer/device.hpp"

using namespace asizer;

TEST_CASE("gm follows 2*id/vov") {
  TechConstants tech;
  // pick w/l so vov = 0.2 V at id = 100 uA: w/l = 2*id/(mu_cox*vov^2)
  const double id = 100e-6, vov = 0.2;
  const double wl = 2.0 * id / (tech.mu_cox * vov * vov);
  const double l = 1e-6;
  const SmallSignalMos m = mosfet_small_signal(wl * l, l, id, tech);
  CHECK(m.vov == Catch::Approx(vov).epsilon(1e-12));
  CHECK(m.gm == Catch::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("width scaling at fixed current") {
  TechConstants tech;
  const double l = 2e-7, id = 50e-6;
  const SmallSignalMos a = mosfet_small_signal(4e-6, l, id, tech);
  const SmallSignalMos b = mosfet_small_signal(8e-6, l, id, tech);
  CHECK(b.gm == Catch::Approx(a.gm * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(b.cgs == Catch::Approx(2.0 * a.cgs).epsilon(1e-12));
  CHECK(b.cgd == Catch::Approx(2.0 * a.cgd).epsilon(1e-12));
  CHECK(b.gds == Catch::Approx(a.gds).epsilon(1e-12));
}

TEST_CASE("intrinsic gain identity gm/gds = 2/(lambda*vov)") {
  TechConstants tech;
  const SmallSignalMos m = mosfet_small_signal(10e-6, 5e-7, 20e-6, tech);
  CHECK(m.gm / m.gds == Catch::Approx(2.0 / (tech.lambda * m.vov)).epsilon(1e-12));
}

TEST_CASE("invalid device inputs are rejected") {
  TechConstants tech;
  CHECK_THROWS_AS(mosfet_small_signal(0.0, 1e-7, 1e-5, tech), std::invalid_argument);
  CHECK_THROWS_AS(mosfet_small_signal(1e-6, -1e-7, 1e-5, tech), std::invalid_argument);
  CHECK_THROWS_AS(mosfet_small_signal(1e-6, 1e-7, 0.0, tech), std::invalid_argument);
  TechConstants bad = tech;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("square-law consistency is checked at construction") {
  CHECK_THROWS_AS(SmallSignalMos(1e-3, 1e-6, 0.0, 0.0, 100e-6, 0.5),  // gm*vov != 2*id
                  std::invalid_argument);
  CHECK_NOTHROW(SmallSignalMos(1e-3, 1e-6, 0.0, 0.0, 100e-6, 0.2));
}
