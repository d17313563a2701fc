#include "conelab/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace conelab {

using nlohmann::json;

PlanarCone cone_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("cone: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("rays") || !j["rays"].is_array())
    throw std::invalid_argument("rays: missing or not an array");
  if (!j.contains("first_sector_inside") || !j["first_sector_inside"].is_boolean())
    throw std::invalid_argument("first_sector_inside: missing or not a boolean");
  std::vector<double> rays;
  for (const auto& v : j["rays"]) {
    if (!v.is_number()) throw std::invalid_argument("rays: entries must be numbers");
    rays.push_back(v.get<double>());
  }
  return {std::move(rays), j["first_sector_inside"].get<bool>()};
}

std::string cone_to_json(const PlanarCone& cone) {
  json j;
  j["rays"] = cone.ray_angles();
  j["first_sector_inside"] = cone.first_sector_inside();
  return j.dump();
}

PlanarCone load_cone(const std::string& name_or_path) {
  if (std::filesystem::exists(name_or_path)) {
    std::ifstream in(name_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return cone_from_json(ss.str());
  }
  return named_cone(name_or_path);
}

BasisSpec basis_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("basis: invalid JSON: ") + e.what());
  }
  BasisSpec b;
  if (j.contains("r_min")) b.r_min = j.at("r_min").get<double>();
  if (j.contains("r_max")) b.r_max = j.at("r_max").get<double>();
  if (j.contains("hats_per_ray")) b.hats_per_ray = j.at("hats_per_ray").get<int>();
  if (!(b.r_min > 0.0 && b.r_max > b.r_min)) throw std::invalid_argument("basis: need 0 < r_min < r_max");
  if (b.hats_per_ray < 1) throw std::invalid_argument("hats_per_ray: must be >= 1");
  return b;
}

const char* to_string(Verdict v) {
  return v == Verdict::unstable ? "unstable" : "stable_numerically";
}

std::string report_to_json(const StabilityReport& r, int indent) {
  json j;
  j["s"] = r.s;
  j["min_rayleigh"] = r.min_rayleigh;
  j["minimizer"] = std::vector<double>(r.minimizer.data(), r.minimizer.data() + r.minimizer.size());
  j["verdict"] = to_string(r.verdict);
  j["basis_size"] = r.basis_size;
  j["support"] = {r.r_min, r.r_max};
  j["tolerance"] = r.tolerance;
  j["negative_count"] = r.negative_count;
  return j.dump(indent);
}

}  // namespace conelab
