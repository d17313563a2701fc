#include "conelab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace conelab {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double angle_tol = 1e-12;

double wrap(double a) {
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}
}  // namespace

PlanarCone::PlanarCone(std::vector<double> ray_angles, bool first_sector_inside)
    : angles_(std::move(ray_angles)), first_inside_(first_sector_inside) {
  const std::size_t n = angles_.size();
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("rays: need an even number of rays, at least 2");
  for (std::size_t i = 0; i < n; ++i) {
    const double a = angles_[i];
    if (!std::isfinite(a) || a < 0.0 || a >= two_pi)
      throw std::invalid_argument("rays: angles must be finite and lie in [0, 2pi)");
    if (i > 0 && !(a - angles_[i - 1] > angle_tol))
      throw std::invalid_argument("rays: angles must be strictly increasing");
  }
  if (!(angles_.front() + two_pi - angles_.back() > angle_tol))
    throw std::invalid_argument("rays: first and last ray coincide modulo 2pi");
}

PlanarCone PlanarCone::halfplane() { return {{0.0, std::numbers::pi}, true}; }

PlanarCone PlanarCone::cross() {
  constexpr double pi = std::numbers::pi;
  return {{0.0, 0.5 * pi, pi, 1.5 * pi}, true};
}

PlanarCone PlanarCone::sector(double theta) {
  if (!(theta > angle_tol && theta < two_pi - angle_tol))
    throw std::invalid_argument("sector: opening must lie in (0, 2pi)");
  return {{0.0, theta}, true};
}

PlanarCone PlanarCone::k_fan(int k) {
  if (k < 1) throw std::invalid_argument("k-fan: k must be >= 1");
  std::vector<double> a(2 * k);
  for (int i = 0; i < 2 * k; ++i) a[i] = std::numbers::pi * i / k;
  return {std::move(a), true};
}

void PlanarCone::check_index(int i) const {
  if (i < 1 || i > ray_count()) throw std::out_of_range("ray index out of range");
}

double PlanarCone::angle(int i) const {
  check_index(i);
  return angles_[i - 1];
}

Vec2 PlanarCone::direction(int i) const {
  const double a = angle(i);
  return {std::cos(a), std::sin(a)};
}

bool PlanarCone::sector_inside(int k) const {
  check_index(k);
  return ((k - 1) % 2 == 0) == first_inside_;
}

bool PlanarCone::contains(const Vec2& p) const {
  if (p.x() == 0.0 && p.y() == 0.0) return false;
  const double phi = wrap(std::atan2(p.y(), p.x()));
  const auto it = std::upper_bound(angles_.begin(), angles_.end(), phi);
  // Sector index whose starting ray is the last ray at or below phi.
  int k = static_cast<int>(it - angles_.begin());
  if (k == 0) k = ray_count();
  if (angles_[k - 1] == phi) return false;
  return sector_inside(k);
}

PlanarCone PlanarCone::complement() const { return {angles_, !first_inside_}; }

PlanarCone PlanarCone::rotated(double alpha) const {
  const int n = ray_count();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> moved(n);
  for (int i = 0; i < n; ++i) moved[i] = wrap(angles_[i] + alpha);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return moved[a] < moved[b]; });
  std::vector<double> sorted(n);
  for (int i = 0; i < n; ++i) sorted[i] = moved[order[i]];
  return {std::move(sorted), sector_inside(order[0] + 1)};
}

Vec2 position(const PlanarCone& cone, const RayPoint& p) {
  if (!(p.radius > 0.0)) throw std::invalid_argument("radius must be positive");
  return p.radius * cone.direction(p.ray_index);
}

Vec2 outward_normal(const PlanarCone& cone, int i) {
  const double a = cone.angle(i);
  // Sector i starts at ray i and runs counterclockwise.
  if (cone.sector_inside(i)) return {std::sin(a), -std::cos(a)};
  return {-std::sin(a), std::cos(a)};
}

double pairwise_angle(const PlanarCone& cone, int i, int j) {
  if (i == j) throw std::invalid_argument("pairwise_angle: rays must differ");
  return wrap(cone.angle(j) - cone.angle(i));
}

double normal_jump_squared(const PlanarCone& cone, int i, int j) {
  const double d = (outward_normal(cone, i) - outward_normal(cone, j)).squaredNorm();
  return d < 1e-24 ? 0.0 : d;
}

double classical_perimeter_annulus(const PlanarCone& cone) {
  return static_cast<double>(cone.ray_count());
}

PlanarCone named_cone(const std::string& name) {
  if (name == "halfplane") return PlanarCone::halfplane();
  if (name == "cross") return PlanarCone::cross();
  auto arg = [&](const std::string& prefix) -> std::string {
    return name.substr(prefix.size());
  };
  try {
    if (name.rfind("sector:", 0) == 0) {
      std::size_t used = 0;
      const std::string a = arg("sector:");
      const double theta = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument("trailing characters");
      return PlanarCone::sector(theta);
    }
    if (name.rfind("k-fan:", 0) == 0) {
      std::size_t used = 0;
      const std::string a = arg("k-fan:");
      const int k = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument("trailing characters");
      return PlanarCone::k_fan(k);
    }
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("cone: cannot parse '" + name + "': " + e.what());
  }
  throw std::invalid_argument("cone: unknown name '" + name + "'");
}

}  // namespace conelab
