#include "forge/analysis.hpp"

#include "forge/components.hpp"
#include "forge/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace forge;

namespace {
double round_sig(double v, int digits) {
  if (v == 0) return 0;
  const double mag = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(v))));
  return std::round(v * mag) / mag;
}
}  // namespace

TEST_CASE("heating rate to field noise reproduces the measured trap numbers") {
  // ndot = 87(11)e3 /s at 3.5 MHz, Mg24: S_E = 1.3(2)e-9 V^2 m^-2 Hz^-1.
  const HeatingMeasurement m{87e3, 11e3, 3.5e6, 38.0, IonSpecies::mg24()};
  const NoiseDensity s = heating_to_noise(m);
  CHECK(s.value == doctest::Approx(1.2529763368189624e-09).epsilon(1e-12));  // frozen oracle
  CHECK(round_sig(s.value, 2) == doctest::Approx(1.3e-9));
  CHECK(round_sig(s.err, 1) == doctest::Approx(2e-10));
}

TEST_CASE("zero heating gives zero noise; inverses round trip at machine precision") {
  HeatingMeasurement m{0.0, 0.0, 3.5e6, 38.0, IonSpecies::mg24()};
  // validate() rejects ndot <= 0? zero is legal for the linearity check.
  m.ndot = 0.0;
  CHECK(heating_to_noise(m).value == 0.0);

  m.ndot = 87e3;
  const NoiseDensity s = heating_to_noise(m);
  const double back = noise_to_heating(s.value, m.axial_freq, m.ion);
  CHECK(back == doctest::Approx(m.ndot).epsilon(1e-12));
}

TEST_CASE("linear trap bound: S_E = 6e-11 at 4.5 MHz bounds ndot") {
  const double ndot = noise_to_heating(6e-11, 4.5e6, IonSpecies::mg24());
  CHECK(ndot == doctest::Approx(3240.284657176741).epsilon(1e-12));  // frozen oracle
}

TEST_CASE("scalings: S_E linear in ndot and in omega; ndot ~ 1/omega at fixed S_E") {
  HeatingMeasurement m{50e3, 0.0, 2.0e6, 40.0, IonSpecies::mg24()};
  const double s1 = heating_to_noise(m).value;
  m.ndot *= 3.0;
  CHECK(heating_to_noise(m).value == doctest::Approx(3.0 * s1).epsilon(1e-12));
  m.ndot = 50e3;
  m.axial_freq *= 2.0;
  CHECK(heating_to_noise(m).value == doctest::Approx(2.0 * s1).epsilon(1e-12));

  const double n1 = noise_to_heating(1e-10, 2.0e6, IonSpecies::mg24());
  const double n2 = noise_to_heating(1e-10, 4.0e6, IonSpecies::mg24());
  CHECK(n2 == doctest::Approx(0.5 * n1).epsilon(1e-12));
}

TEST_CASE("layout report summarizes counts") {
  const Component sec = make_straight_section(40, 60, 50, 60, 5);
  const TrapLayout layout = TrapLayout::from_component(sec, "s0");
  const std::string report = layout_report(layout);
  CHECK(report.find("electrodes: 17 (rf 2, control 15, ground 0)") != std::string::npos);
  CHECK(report.find("zones (center-channel electrodes): 5") != std::string::npos);
  CHECK(report.find("open ports: 2") != std::string::npos);
}
