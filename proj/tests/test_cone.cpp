#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "conelab/cone.hpp"
#include "conelab/io.hpp"

using namespace conelab;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;

PlanarCone random_cone(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> half(1, 4);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  std::bernoulli_distribution flag;
  for (;;) {
    std::vector<double> a(2 * half(rng));
    for (double& x : a) x = u(rng);
    std::sort(a.begin(), a.end());
    bool ok = a.front() + 2.0 * pi - a.back() > 0.05;
    for (std::size_t i = 1; i < a.size(); ++i) ok = ok && a[i] - a[i - 1] > 0.05;
    if (ok) return {a, flag(rng)};
  }
}
}  // namespace

TEST_CASE("construction rejects malformed ray lists") {
  CHECK_THROWS_AS(PlanarCone({0.0}, true), std::invalid_argument);
  CHECK_THROWS_AS(PlanarCone({0.0, 1.0, 2.0}, true), std::invalid_argument);
  CHECK_THROWS_AS(PlanarCone({1.0, 0.5}, true), std::invalid_argument);
  CHECK_THROWS_AS(PlanarCone({0.0, 0.0}, true), std::invalid_argument);
  CHECK_THROWS_AS(PlanarCone({0.0, 2.0 * pi}, true), std::invalid_argument);
  CHECK_THROWS_AS(PlanarCone({-0.1, 1.0}, true), std::invalid_argument);
  CHECK_THROWS_AS(PlanarCone({0.0, NAN}, true), std::invalid_argument);
  CHECK_NOTHROW(PlanarCone({0.0, 1.0}, false));
}

TEST_CASE("half-plane membership and normals") {
  const PlanarCone h = PlanarCone::halfplane();
  CHECK(h.ray_count() == 2);
  CHECK(h.contains(Vec2(0.3, 1.0)));
  CHECK_FALSE(h.contains(Vec2(0.3, -1.0)));
  CHECK_FALSE(h.contains(Vec2(1.0, 0.0)));
  const Vec2 n1 = outward_normal(h, 1), n2 = outward_normal(h, 2);
  CHECK(n1.x() == Approx(0.0));
  CHECK(n1.y() == Approx(-1.0));
  CHECK(n2.y() == Approx(-1.0));
  CHECK(normal_jump_squared(h, 1, 2) == 0.0);
  CHECK(pairwise_angle(h, 1, 2) == Approx(pi));
}

TEST_CASE("cross normals and angles") {
  const PlanarCone x = PlanarCone::cross();
  CHECK(x.contains(Vec2(1.0, 1.0)));
  CHECK_FALSE(x.contains(Vec2(-1.0, 1.0)));
  CHECK(x.contains(Vec2(-1.0, -1.0)));
  CHECK(pairwise_angle(x, 1, 2) == Approx(pi / 2));
  CHECK(pairwise_angle(x, 2, 1) == Approx(3 * pi / 2));
  CHECK(normal_jump_squared(x, 1, 3) == Approx(4.0));
  CHECK(normal_jump_squared(x, 1, 2) == Approx(2.0));
  // outward normals point out of the inside sector next to the ray
  for (int i = 1; i <= 4; ++i) {
    const Vec2 p = 1e-3 * outward_normal(x, i) + x.direction(i);
    CHECK_FALSE(x.contains(p));
  }
}

TEST_CASE("named cones") {
  CHECK(named_cone("halfplane").ray_count() == 2);
  CHECK(named_cone("cross").ray_count() == 4);
  const PlanarCone s = named_cone("sector:1.5");
  CHECK(s.angle(2) == Approx(1.5));
  CHECK(s.contains(Vec2(std::cos(0.7), std::sin(0.7))));
  const PlanarCone f = named_cone("k-fan:3");
  CHECK(f.ray_count() == 6);
  CHECK(f.angle(2) == Approx(pi / 3));
  CHECK_THROWS_AS(named_cone("sector:abc"), std::invalid_argument);
  CHECK_THROWS_AS(named_cone("sector:7"), std::invalid_argument);
  CHECK_THROWS_AS(named_cone("k-fan:0"), std::invalid_argument);
  CHECK_THROWS_AS(named_cone("k-fan:2x"), std::invalid_argument);
  CHECK_THROWS_AS(named_cone("triangle"), std::invalid_argument);
}

TEST_CASE("complement and rotation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const PlanarCone c = random_cone(rng);
    const PlanarCone cc = c.complement();
    const PlanarCone r = c.rotated(0.9);
    for (int m = 0; m < 50; ++m) {
      const Vec2 p(u(rng), u(rng));
      CHECK(c.contains(p) != cc.contains(p));
      const double a = 0.9;
      const Vec2 q(std::cos(a) * p.x() - std::sin(a) * p.y(), std::sin(a) * p.x() + std::cos(a) * p.y());
      CHECK(r.contains(q) == c.contains(p));
    }
  }
}

TEST_CASE("classical perimeter in the unit annulus equals the ray count") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const PlanarCone c = random_cone(rng);
    CHECK(classical_perimeter_annulus(c) == double(c.ray_count()));
  }
}

TEST_CASE("ray indices are 1-based") {
  const PlanarCone h = PlanarCone::halfplane();
  CHECK_THROWS_AS(h.angle(0), std::out_of_range);
  CHECK_THROWS_AS(h.angle(3), std::out_of_range);
  CHECK_THROWS_AS(pairwise_angle(h, 1, 1), std::invalid_argument);
  CHECK(position(h, {2, 3.0}).x() == Approx(-3.0));
  CHECK_THROWS_AS(position(h, {1, 0.0}), std::invalid_argument);
}

TEST_CASE("JSON round trip") {
  const PlanarCone c({0.25, 1.0, 2.5, 4.0}, false);
  const PlanarCone d = cone_from_json(cone_to_json(c));
  CHECK(d.ray_angles() == c.ray_angles());
  CHECK(d.first_sector_inside() == c.first_sector_inside());
  CHECK_THROWS_AS(cone_from_json("{\"rays\": [0, 1]}"), std::invalid_argument);
  CHECK_THROWS_AS(cone_from_json("{\"rays\": 3, \"first_sector_inside\": true}"), std::invalid_argument);
  CHECK_THROWS_AS(cone_from_json("not json"), std::invalid_argument);
  CHECK_THROWS_AS(cone_from_json("{\"rays\": [0, 1, 2], \"first_sector_inside\": true}"),
                  std::invalid_argument);
}
