#pragma once

#include <string>

#include "conelab/cone.hpp"
#include "conelab/stability.hpp"

namespace conelab {

/// {"rays": [...], "first_sector_inside": bool}
PlanarCone cone_from_json(const std::string& text);
std::string cone_to_json(const PlanarCone& cone);

/// A named cone or a path to a JSON cone file.
PlanarCone load_cone(const std::string& name_or_path);

/// {"r_min": 1e-3, "r_max": 1e3, "hats_per_ray": 64}; missing keys keep defaults.
BasisSpec basis_from_json(const std::string& text);

/// JSON record with every StabilityReport field.
std::string report_to_json(const StabilityReport& r, int indent = 2);

const char* to_string(Verdict v);

}  // namespace conelab
