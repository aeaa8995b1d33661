#include "seaice/rheology.hpp"

#include <stdexcept>
#include <string>

namespace seaice {

void RheoParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("rheology: ") + name + " must be positive");
  };
  positive(rho_ice, "rho_ice");
  positive(P_star, "P_star");
  positive(C, "C");
  positive(e, "e");
  positive(Delta_min, "Delta_min");
  positive(pressure_factor, "pressure_factor");
  if (e < 1.0) throw std::invalid_argument("rheology: ellipse ratio e must be >= 1");
}

double ice_strength(double H, double A, const RheoParams& p) {
  if (H < 0.0) throw std::invalid_argument("ice_strength: negative thickness");
  if (A < 0.0 || A > 1.0) throw std::invalid_argument("ice_strength: concentration outside [0,1]");
  return ice_strength_unchecked(H, A, p);
}

}  // namespace seaice
