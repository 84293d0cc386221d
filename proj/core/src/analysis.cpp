#include "forge/analysis.hpp"

#include "forge/constants.hpp"
#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace forge {

namespace {
using constants::elementary_charge;
using constants::hbar;
using constants::pi;
}  // namespace

IonSpecies IonSpecies::mg24() {
  return {24.0 * constants::atomic_mass_unit, elementary_charge};
}

void HeatingMeasurement::validate() const {
  if (ndot < 0 || ndot_err < 0 || axial_freq <= 0 || ion_surface_distance <= 0 ||
      ion.mass <= 0 || ion.charge <= 0)
    throw Error("HeatingMeasurement: values must be positive (errors non-negative)");
}

NoiseDensity heating_to_noise(const HeatingMeasurement& m) {
  m.validate();
  const double omega = 2.0 * pi * m.axial_freq;
  const double factor = 4.0 * m.ion.mass * hbar * omega / (m.ion.charge * m.ion.charge);
  return {m.ndot * factor, m.ndot_err * factor};
}

double noise_to_heating(double spectral_density, double axial_freq, const IonSpecies& ion) {
  if (spectral_density < 0 || axial_freq <= 0) throw Error("noise_to_heating: positive inputs");
  const double omega = 2.0 * pi * axial_freq;
  return spectral_density * ion.charge * ion.charge / (4.0 * ion.mass * hbar * omega);
}

std::string layout_report(const TrapLayout& layout) {
  std::ostringstream os;
  int rf_count = 0, control_count = 0, ground_count = 0;
  double rf_area = 0, control_area = 0;
  int zones = 0;

  for (const auto& e : layout.electrodes()) {
    const ElectrodeRole role = layout.net_role(e.net);
    const double area = std::abs(signed_area(e.polygon));
    switch (role) {
      case ElectrodeRole::rf:
        ++rf_count;
        rf_area += area;
        break;
      case ElectrodeRole::control: {
        ++control_count;
        control_area += area;
        // Center-channel electrodes define the trapping zones; their ids start
        // with 'c' after the instance prefix by library convention.
        const auto dot = e.id.rfind('.');
        const std::string local = dot == std::string::npos ? e.id : e.id.substr(dot + 1);
        if (!local.empty() && (local[0] == 'c' || local.rfind("l", 0) == 0 && local.find('c') != std::string::npos))
          ++zones;
        break;
      }
      case ElectrodeRole::ground:
        ++ground_count;
        break;
    }
  }

  os << "components: " << layout.placements().size() << "\n";
  os << "electrodes: " << layout.electrodes().size() << " (rf " << rf_count << ", control "
     << control_count << ", ground " << ground_count << ")\n";
  os << "nets: " << layout.nets().size() << "\n";
  os << "zones (center-channel electrodes): " << zones << "\n";
  os << "open ports: " << layout.open_ports().size() << "\n";
  os << "rf metal area: " << rf_area << " um^2\n";
  os << "control metal area: " << control_area << " um^2\n";
  os << "total metal area: " << layout.total_electrode_area() << " um^2\n";
  return os.str();
}

}  // namespace forge
