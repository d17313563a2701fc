// conelab: command-line front end for the cone analyses.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "conelab/cone.hpp"
#include "conelab/curvature.hpp"
#include "conelab/grid.hpp"
#include "conelab/io.hpp"
#include "conelab/kernels.hpp"
#include "conelab/parallel.hpp"
#include "conelab/specfun.hpp"
#include "conelab/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace conelab;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitContract = 2;

struct UsageError : std::runtime_error {
  UsageError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what) {}
};

struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<double> s;
  std::string s_grid;
  std::string cone;
  std::string basis;
  std::vector<double> point;
  std::optional<double> theta;
  std::string out = "conelab-out";
  int threads = 1;
  std::uint64_t seed = 0;
  int resolution = 512;
  double box = 2.0;
};

const char* kColumns = R"(Output columns of table.csv (one row per s; floats with 17 significant digits):
  hardy         s, sigma, H, c, ratio, ratio_over_s2
                  H = Hardy constant H_{1,sigma}, c = c_{1,sigma}, sigma = (1+s)/2,
                  ratio = H/c
  angular       s, theta, I, ray_coefficient
                  I = angular integral I(s, theta); ray_coefficient = coefficient of
                  |x|^{-(1+s)} in the potential of a ray at angle theta (equals I)
  curvature     s, x, y, ray, radius, H, method
                  H = nonlocal mean curvature at the boundary point (x, y) on ray `ray`
  stability     s, min_rayleigh, verdict, negative_count, basis_size, r_min, r_max
  scan          s, min_rayleigh, verdict, negative_count, interaction_sum_min
                  interaction_sum_min = smallest interaction sum over the rays
  oracle-check  s, x, y, H_boundary, H_region, abs_diff, rel_diff, pass
                  H_region = grid principal value (Richardson over eps, 2 eps)
Exit status: 0 success, 1 usage error, 2 numerical contract violation.)";

std::vector<double> s_values(const Options& o) {
  if (o.s && !o.s_grid.empty()) throw UsageError("--s", "give either --s or --s-grid, not both");
  if (o.s) return {*o.s};
  if (o.s_grid.empty()) throw UsageError("--s", "required (or --s-grid a:b:step)");
  double a, b, step;
  char c1, c2;
  std::istringstream in(o.s_grid);
  if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof())
    throw UsageError("--s-grid", "expected a:b:step");
  if (!(step > 0.0) || b < a) throw UsageError("--s-grid", "need step > 0 and a <= b");
  const long count = std::lround(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 100000) throw UsageError("--s-grid", "too many points");
  std::vector<double> v;
  for (long k = 0; k < count; ++k) v.push_back(a + k * step);
  return v;
}

void check_s_range(double s, double lo, double hi, bool open_hi = true) {
  if (!(s > lo && (open_hi ? s < hi : s <= hi))) {
    std::ostringstream m;
    m << "value " << s << " outside (" << lo << ", " << hi << ")";
    throw UsageError("--s", m.str());
  }
}

PlanarCone require_cone(const Options& o) {
  if (o.cone.empty()) throw UsageError("--cone", "required");
  try {
    return load_cone(o.cone);
  } catch (const std::exception& e) {
    throw UsageError("--cone", e.what());
  }
}

BasisSpec basis_spec(const Options& o) {
  BasisSpec b;
  if (o.basis.empty()) return b;
  std::istringstream in(o.basis);
  char c1, c2;
  if (!(in >> b.r_min >> c1 >> b.r_max >> c2 >> b.hats_per_ray) || c1 != ',' || c2 != ',' ||
      !in.eof())
    throw UsageError("--basis", "expected r_min,r_max,count");
  if (!(b.r_min > 0.0 && b.r_max > b.r_min)) throw UsageError("--basis", "need 0 < r_min < r_max");
  if (b.hats_per_ray < 1) throw UsageError("--basis", "count must be >= 1");
  return b;
}

RayPoint require_point(const Options& o, const PlanarCone& cone) {
  if (o.point.size() != 2) throw UsageError("--point", "required as two numbers x y");
  const Vec2 p(o.point[0], o.point[1]);
  const double r = p.norm();
  if (!(r > 0.0)) throw UsageError("--point", "must differ from the origin");
  for (int i = 1; i <= cone.ray_count(); ++i) {
    if ((p / r - cone.direction(i)).norm() < 1e-9) return {i, r};
  }
  throw UsageError("--point", "does not lie on a ray of the cone");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Table {
public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_report(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

json base_report(const std::string& command, const Options& o) {
  json j;
  j["command"] = command;
  j["seed"] = o.seed;
  if (!o.cone.empty()) j["cone_source"] = o.cone;
  return j;
}

int run_hardy(const Options& o, const fs::path& out) {
  Table t({"s", "sigma", "H", "c", "ratio", "ratio_over_s2"});
  json report = base_report("hardy", o);
  report["records"] = json::array();
  for (double s : s_values(o)) {
    check_s_range(s, 0.0, 0.5);
    const double sigma = 0.5 * (1.0 + s);
    const HardyConstants k = hardy_constants(1, sigma);
    const double ratio = hardy_ratio(s);
    t.row({fmt(s), fmt(sigma), fmt(k.H), fmt(k.c), fmt(ratio), fmt(ratio / (s * s))});
    report["records"].push_back(
        {{"s", s}, {"sigma", sigma}, {"H", k.H}, {"c", k.c}, {"ratio", ratio},
         {"ratio_over_s2", ratio / (s * s)}});
  }
  t.write(out / "table.csv");
  write_report(out / "report.json", report);
  return 0;
}

int run_angular(const Options& o, const fs::path& out) {
  if (!o.theta) throw UsageError("--theta", "required");
  const double theta = *o.theta;
  if (!(theta > 0.0 && theta < 2.0 * M_PI)) throw UsageError("--theta", "must lie in (0, 2 pi)");
  Table t({"s", "theta", "I", "ray_coefficient"});
  json report = base_report("angular", o);
  report["records"] = json::array();
  for (double s : s_values(o)) {
    check_s_range(s, 0.0, 1.0);
    const double I = angular_integral(s, theta);
    const double k = ray_potential_coefficient(s, theta);
    t.row({fmt(s), fmt(theta), fmt(I), fmt(k)});
    report["records"].push_back({{"s", s}, {"theta", theta}, {"I", I}, {"ray_coefficient", k}});
  }
  t.write(out / "table.csv");
  write_report(out / "report.json", report);
  return 0;
}

int run_curvature(const Options& o, const fs::path& out) {
  const PlanarCone cone = require_cone(o);
  const RayPoint p = require_point(o, cone);
  Table t({"s", "x", "y", "ray", "radius", "H", "method"});
  json report = base_report("curvature", o);
  report["cone"] = json::parse(cone_to_json(cone));
  report["records"] = json::array();
  for (double s : s_values(o)) {
    check_s_range(s, 0.0, 1.0);
    const CurvatureSample c = curvature_sample(cone, p, s);
    t.row({fmt(s), fmt(o.point[0]), fmt(o.point[1]), std::to_string(p.ray_index), fmt(p.radius),
           fmt(c.value), "boundary_formula"});
    report["records"].push_back({{"s", s},
                                 {"point", {{"ray_index", p.ray_index}, {"radius", p.radius}}},
                                 {"value", c.value},
                                 {"method", "boundary_formula"}});
  }
  t.write(out / "table.csv");
  write_report(out / "report.json", report);
  return 0;
}

std::vector<StabilityReport> stability_reports(const PlanarCone& cone,
                                               const std::vector<double>& s,
                                               const BasisSpec& b) {
  for (double v : s) check_s_range(v, 0.0, 1.0);
  try {
    return scan_instability(cone, s, b);
  } catch (const std::runtime_error& e) {
    throw ContractViolation(e.what());
  }
}

int run_stability(const Options& o, const fs::path& out) {
  const PlanarCone cone = require_cone(o);
  const BasisSpec b = basis_spec(o);
  Table t({"s", "min_rayleigh", "verdict", "negative_count", "basis_size", "r_min", "r_max"});
  json report = base_report("stability", o);
  report["cone"] = json::parse(cone_to_json(cone));
  report["reports"] = json::array();
  for (const StabilityReport& r : stability_reports(cone, s_values(o), b)) {
    t.row({fmt(r.s), fmt(r.min_rayleigh), to_string(r.verdict), std::to_string(r.negative_count),
           std::to_string(r.basis_size), fmt(r.r_min), fmt(r.r_max)});
    report["reports"].push_back(json::parse(report_to_json(r)));
  }
  t.write(out / "table.csv");
  write_report(out / "report.json", report);
  return 0;
}

int run_scan(const Options& o, const fs::path& out) {
  const PlanarCone cone = require_cone(o);
  const BasisSpec b = basis_spec(o);
  Table t({"s", "min_rayleigh", "verdict", "negative_count", "interaction_sum_min"});
  json report = base_report("scan", o);
  report["cone"] = json::parse(cone_to_json(cone));
  report["reports"] = json::array();
  for (const StabilityReport& r : stability_reports(cone, s_values(o), b)) {
    double smin = INFINITY;
    for (int j = 1; j <= cone.ray_count(); ++j) smin = std::min(smin, interaction_sum(cone, j, r.s));
    t.row({fmt(r.s), fmt(r.min_rayleigh), to_string(r.verdict), std::to_string(r.negative_count),
           fmt(smin)});
    json rec = json::parse(report_to_json(r));
    rec.erase("minimizer");
    rec["interaction_sum_min"] = smin;
    report["reports"].push_back(rec);
  }
  t.write(out / "table.csv");
  write_report(out / "report.json", report);
  return 0;
}

int run_oracle_check(const Options& o, const fs::path& out) {
  const PlanarCone cone = require_cone(o);
  const RayPoint p = require_point(o, cone);
  if (o.resolution < 64) throw UsageError("--resolution", "must be >= 64");
  if (!(o.box > 0.0)) throw UsageError("--box", "must be positive");
  const Vec2 x(o.point[0], o.point[1]);
  const double eps = 8.0 * (2.0 * o.box / o.resolution);
  if (!(x.lpNorm<Eigen::Infinity>() + 4.0 * eps < o.box))
    throw UsageError("--point", "too close to the box boundary");
  const GridSet grid = GridSet::from_cone(cone, o.box, o.resolution);
  save_grid(grid, (out / "grid.mask").string());
  Table t({"s", "x", "y", "H_boundary", "H_region", "abs_diff", "rel_diff", "pass"});
  json report = base_report("oracle-check", o);
  report["cone"] = json::parse(cone_to_json(cone));
  report["resolution"] = o.resolution;
  report["box"] = o.box;
  report["excision"] = eps;
  report["records"] = json::array();
  bool all_pass = true;
  for (double s : s_values(o)) {
    check_s_range(s, 0.0, 1.0);
    const double hb = mean_curvature_boundary(cone, p, s);
    const double hr = mean_curvature_region_pv(grid, x, s, eps);
    const double diff = std::abs(hb - hr);
    const double rel = diff / std::max(std::abs(hb), 1e-300);
    const bool pass = diff <= std::max(0.02 * std::abs(hb), 1e-3);
    all_pass = all_pass && pass;
    t.row({fmt(s), fmt(x.x()), fmt(x.y()), fmt(hb), fmt(hr), fmt(diff), fmt(rel),
           pass ? "1" : "0"});
    report["records"].push_back({{"s", s},
                                 {"H_boundary", hb},
                                 {"H_region", hr},
                                 {"abs_diff", diff},
                                 {"rel_diff", rel},
                                 {"pass", pass}});
  }
  report["pass"] = all_pass;
  t.write(out / "table.csv");
  write_report(out / "report.json", report);
  if (!all_pass) throw ContractViolation("region and boundary curvature disagree");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability and curvature analysis of planar cones for the fractional perimeter"};
  app.footer(kColumns);
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--s", o.s, "Fractional parameter");
    c->add_option("--s-grid", o.s_grid, "Range of s as a:b:step (inclusive)");
    c->add_option("--out", o.out, "Output directory (report.json, table.csv)");
    c->add_option("--threads", o.threads, "Worker threads; results do not depend on it")
        ->check(CLI::Range(1, 256));
    c->add_option("--seed", o.seed, "Seed recorded with the run");
    c->footer(kColumns);
  };
  auto with_cone = [&](CLI::App* c) {
    c->add_option("--cone", o.cone,
                  "Cone JSON file or name: halfplane, cross, sector:<theta>, k-fan:<k>");
  };

  auto* hardy = app.add_subcommand("hardy", "Hardy constants and the ratio H/c at sigma = (1+s)/2");
  common(hardy);
  auto* angular = app.add_subcommand("angular", "Angular integral I(s, theta)");
  common(angular);
  angular->add_option("--theta", o.theta, "Opening angle in (0, 2 pi)");
  auto* curvature = app.add_subcommand("curvature", "Nonlocal mean curvature at a boundary point");
  common(curvature);
  with_cone(curvature);
  curvature->add_option("--point", o.point, "Boundary point x y")->expected(2);
  auto* stability = app.add_subcommand("stability", "Minimal Rayleigh quotient of the second variation");
  common(stability);
  with_cone(stability);
  stability->add_option("--basis", o.basis, "Radial basis r_min,r_max,count (hats per ray)");
  auto* scan = app.add_subcommand("scan", "Stability verdicts and interaction sums over s");
  common(scan);
  with_cone(scan);
  scan->add_option("--basis", o.basis, "Radial basis r_min,r_max,count (hats per ray)");
  auto* oracle = app.add_subcommand("oracle-check", "Grid principal value against the boundary formula");
  common(oracle);
  with_cone(oracle);
  oracle->add_option("--point", o.point, "Boundary point x y")->expected(2);
  oracle->add_option("--resolution", o.resolution, "Grid cells per side");
  oracle->add_option("--box", o.box, "Half width of the grid box");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    set_threads(o.threads);
    const fs::path out(o.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw UsageError("--out", "cannot create directory " + o.out);
    if (*hardy) return run_hardy(o, out);
    if (*angular) return run_angular(o, out);
    if (*curvature) return run_curvature(o, out);
    if (*stability) return run_stability(o, out);
    if (*scan) return run_scan(o, out);
    return run_oracle_check(o, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitContract;
  }
}
