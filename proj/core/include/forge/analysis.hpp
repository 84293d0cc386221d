#pragma once

#include "forge/layout.hpp"

#include <string>

namespace forge {

struct IonSpecies {
  double mass;    // kg
  double charge;  // C
  static IonSpecies mg24();
};

struct HeatingMeasurement {
  double ndot;                  // phonons/s
  double ndot_err = 0.0;        // phonons/s
  double axial_freq;            // Hz
  double ion_surface_distance;  // µm (recorded, not used by the conversion)
  IonSpecies ion = IonSpecies::mg24();

  void validate() const;
};

struct NoiseDensity {
  double value;  // V^2 m^-2 Hz^-1
  double err;
};

/// S_E(w) = ndot * 4 m hbar w / q^2, uncertainty propagated linearly from ndot.
NoiseDensity heating_to_noise(const HeatingMeasurement& m);

/// ndot = S_E q^2 / (4 m hbar w).
double noise_to_heating(double spectral_density, double axial_freq, const IonSpecies& ion);

/// Layout summary: zones, nets, electrode counts, rf geometry stats.
std::string layout_report(const TrapLayout& layout);

}  // namespace forge
