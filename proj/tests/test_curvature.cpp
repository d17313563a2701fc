#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "conelab/curvature.hpp"
#include "conelab/kernels.hpp"
#include "conelab/quadrature.hpp"

using namespace conelab;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("stationary cones have zero curvature") {
  for (double s : {0.1, 0.3, 0.7}) {
    for (int ray = 1; ray <= 2; ++ray)
      CHECK(std::abs(mean_curvature_boundary(PlanarCone::halfplane(), {ray, 1.0}, s)) < 1e-6);
    for (int ray = 1; ray <= 4; ++ray)
      CHECK(std::abs(mean_curvature_boundary(PlanarCone::cross(), {ray, 1.0}, s)) < 1e-6);
  }
}

TEST_CASE("right-angle sector: value from the closed form of I(s, π/2)") {
  // Only the other ray contributes, with e_1·ν_2 = -1.
  for (double s : {0.1, 0.3, 0.7}) {
    const double I = std::sqrt(pi) * std::tgamma(0.5 * (1 + s)) / (2 * std::tgamma(0.5 * (2 + s)));
    CHECK(mean_curvature_boundary(PlanarCone::sector(pi / 2), {1, 1.0}, s) ==
          Approx(2.0 / s * I).epsilon(1e-10));
  }
}

TEST_CASE("sign law for sectors") {
  for (double s : {0.1, 0.3, 0.7})
    for (double th : {0.4, pi / 3, pi / 2, 2 * pi / 3, 3.0, 3.3, 4 * pi / 3, 5.5}) {
      const double h = mean_curvature_boundary(PlanarCone::sector(th), {1, 1.0}, s);
      if (th < pi) CHECK(h > 0.0);
      else CHECK(h < 0.0);
    }
}

TEST_CASE("scaling and complement antisymmetry") {
  const PlanarCone c({0.2, 1.1, 2.9, 4.4}, true);
  for (double s : {0.1, 0.5}) {
    for (int ray = 1; ray <= 4; ++ray) {
      const double h = mean_curvature_boundary(c, {ray, 1.0}, s);
      for (double lam : {0.5, 2.0, 10.0})
        CHECK(mean_curvature_boundary(c, {ray, lam}, s) == Approx(std::pow(lam, -s) * h).epsilon(1e-8));
      CHECK(mean_curvature_boundary(c.complement(), {ray, 1.0}, s) == Approx(-h).epsilon(1e-14));
    }
  }
}

TEST_CASE("curvature_sample records the method") {
  const CurvatureSample c = curvature_sample(PlanarCone::sector(1.0), {2, 3.0}, 0.2);
  CHECK(c.method == CurvatureMethod::boundary_formula);
  CHECK(c.point.ray_index == 2);
  CHECK(c.value == mean_curvature_boundary(PlanarCone::sector(1.0), {2, 3.0}, 0.2));
}

TEST_CASE("tail integral of the empty set around the box center") {
  // ∫_{|y|∞ > R} |y|^{-(2+s)} dy = (8/s) R^{-s} ∫_0^{π/4} cos^s α dα
  const double s = 0.4, R = 1.5;
  const double expected = 8.0 / s * std::pow(R, -s) *
                          gauss([&](double a) { return std::pow(std::cos(a), s); }, 0.0, pi / 4, 30);
  CHECK(tail_integral(nullptr, R, Vec2::Zero(), s, 0.0, 1.0) == Approx(expected).epsilon(1e-11));
  CHECK(tail_integral(nullptr, R, Vec2::Zero(), s, 1.0, 0.0) == 0.0);
  // half-plane tail: by symmetry half of the whole
  const PlanarCone h = PlanarCone::halfplane();
  CHECK(tail_integral(&h, R, Vec2::Zero(), s, 1.0, 0.0) == Approx(0.5 * expected).epsilon(1e-11));
  CHECK_THROWS_AS(tail_integral(nullptr, R, Vec2(2.0, 0.0), s, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("region principal value agrees with the boundary formula") {
  const double R = 2.0;
  const int n = 256;
  for (double th : {pi / 3, pi / 2, 2 * pi / 3, 4 * pi / 3}) {
    const PlanarCone c = PlanarCone::sector(th);
    const GridSet g = GridSet::from_cone(c, R, n);
    for (double s : {0.1, 0.3}) {
      const double hb = mean_curvature_boundary(c, {1, 1.0}, s);
      const double eps = 8 * g.cell_size();
      const double pv = mean_curvature_region_pv(g, Vec2(1.0, 0.0), s, eps);
      CHECK(pv == Approx(hb).epsilon(0.02));
      const double a = region_pv_excised(g, Vec2(1.0, 0.0), s, eps);
      const double b = region_pv_excised(g, Vec2(1.0, 0.0), s, 2 * eps);
      CHECK(std::abs(a - b) <= 0.005 * std::abs(a));
    }
  }
}

TEST_CASE("region principal value preconditions") {
  const GridSet g = GridSet::from_cone(PlanarCone::halfplane(), 2.0, 128);
  CHECK_THROWS_AS(mean_curvature_region_pv(g, Vec2(1.0, 0.0), 0.3, g.cell_size()), std::invalid_argument);
  CHECK_THROWS_AS(mean_curvature_region_pv(g, Vec2(1.0, 0.5), 0.3, 8 * g.cell_size()),
                  std::invalid_argument);
  CHECK_THROWS_AS(mean_curvature_region_pv(g, Vec2(1.0, 0.0), 1.2, 8 * g.cell_size()), std::domain_error);
}
