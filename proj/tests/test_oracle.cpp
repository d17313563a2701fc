#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "conelab/grid.hpp"
#include "conelab/kernels.hpp"
#include "conelab/oracle.hpp"

using namespace conelab;
using doctest::Approx;

namespace {

// Edge height reached from (x, 0) under the vertical bump field, by a
// fine fixed-step RK4 on the scalar ODE.
double edge_height(const FlowField& f, double x, double t) {
  auto rhs = [&](double y) {
    const double q = ((x - f.center.x()) * (x - f.center.x()) + (y - f.center.y()) * (y - f.center.y())) /
                     (f.radius * f.radius);
    return q >= 1.0 ? 0.0 : f.amplitude * std::pow(1.0 - q, 4);
  };
  const int steps = 4000;
  const double dt = t / steps;
  double y = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double k1 = rhs(y), k2 = rhs(y + 0.5 * dt * k1), k3 = rhs(y + 0.5 * dt * k2),
                 k4 = rhs(y + dt * k3);
    y += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
  }
  return y;
}

// Q(ξ) = A(ξ) + 2B(ξ)/(1+s) for the profile of the bump on the positive axis;
// the factor 2 collects both sides of the line.
double line_form(const FlowField& f, double s) {
  const int K = 400;
  const double a = f.center.x() - f.radius;
  std::vector<double> knots(K + 1);
  for (int k = 0; k <= K; ++k) knots[k] = a + 2 * f.radius * k / K;
  Eigen::VectorXd v(K - 1);
  for (int k = 1; k < K; ++k) {
    const double u = (knots[k] - f.center.x()) / f.radius;
    v[k - 1] = std::pow(1 - u * u, 4);
  }
  const double A = v.dot(sobolev_diag_matrix(knots, s) * v);
  const double B = v.dot(potential_matrix(knots, s) * v);
  return A + 2 * B / (1 + s);
}

}  // namespace

TEST_CASE("grid validation and snapshot round trip") {
  CHECK_THROWS_AS(GridSet(1.0, 32, std::vector<std::uint8_t>(32 * 32)), std::invalid_argument);
  CHECK_THROWS_AS(GridSet(1.0, 64, std::vector<std::uint8_t>(10)), std::invalid_argument);
  CHECK_THROWS_AS(GridSet(-1.0, 64, std::vector<std::uint8_t>(64 * 64)), std::invalid_argument);

  const auto dir = std::filesystem::temp_directory_path();
  for (const auto& g : {GridSet::from_cone(PlanarCone::sector(2.0), 1.5, 100),
                        GridSet::from_cone(PlanarCone::cross(), 1.0, 64).complement(),
                        GridSet(1.0, 64, std::vector<std::uint8_t>(64 * 64, 1))}) {
    const auto path = (dir / "conelab_roundtrip.grid").string();
    save_grid(g, path);
    CHECK(load_grid(path) == g);
  }
  const auto bad = (dir / "conelab_bad.grid").string();
  std::ofstream(bad) << "not a grid";
  CHECK_THROWS(load_grid(bad));
  std::filesystem::remove(bad);
  std::filesystem::remove(dir / "conelab_roundtrip.grid");
}

TEST_CASE("cell-pair kernel against high-precision quadrature") {
  struct Ref {
    int k1, k2;
    double s, value;
  };
  // tests/oracles/cell_kernel_oracle.py
  for (const Ref& r : {Ref{1, 0, 0.5, 3.6470875154972008}, Ref{1, 1, 0.5, 0.67600839868594708},
                       Ref{3, 2, 0.5, 0.042250424697640895}, Ref{1, 0, 0.1, 2.0383629994475961},
                       Ref{2, -1, 0.3, 0.17332678545854024}, Ref{0, 7, 0.3, 0.011486831795192244}})
    CHECK(cell_pair_kernel(r.k1, r.k2, r.s) == Approx(r.value).epsilon(1e-10));
  CHECK(cell_pair_kernel(2, 1, 0.4) == Approx(cell_pair_kernel(-1, 2, 0.4)).epsilon(1e-14));
}

TEST_CASE("localized perimeter: structural properties") {
  const double s = 0.5;
  const Region ball = Region::make_ball(Vec2::Zero(), 1.0);
  const GridSet empty(2.0, 128, std::vector<std::uint8_t>(128 * 128, 0));
  CHECK(per_s_localized(empty, ball, s) == 0.0);

  const GridSet sector = GridSet::from_cone(PlanarCone::sector(2.0), 2.0, 128);
  CHECK(per_s_localized(sector.complement(), ball, s) ==
        Approx(per_s_localized(sector, ball, s)).epsilon(1e-12));

  const GridSet hp = GridSet::from_cone(PlanarCone::halfplane(), 2.0, 128);
  const double small = per_s_localized(hp, Region::make_ball(Vec2::Zero(), 0.5), s);
  const double mid = per_s_localized(hp, Region::make_ball(Vec2::Zero(), 0.8), s);
  const double big = per_s_localized(hp, ball, s);
  CHECK(0.0 < small);
  CHECK(small < mid);
  CHECK(mid < big);

  CHECK_THROWS_AS(per_s_localized(hp, Region::make_box(Vec2(1.5, 0), 1.0), s), std::invalid_argument);
}

TEST_CASE("localized perimeter of the half-plane converges to the continuum value") {
  // tests/oracles/per_halfplane_oracle.py: unit ball, s = 1/2.
  const double exact = 25.6000891803;
  const Region ball = Region::make_ball(Vec2::Zero(), 1.0);
  const double p256 = per_s_localized(GridSet::from_cone(PlanarCone::halfplane(), 2.0, 256), ball, 0.5);
  const double p512 = per_s_localized(GridSet::from_cone(PlanarCone::halfplane(), 2.0, 512), ball, 0.5);
  CHECK(std::abs(p512 / p256 - 1) < 0.01);
  CHECK(std::abs(p512 / exact - 1) < 0.01);
  CHECK(std::abs(p256 / exact - 1) < 0.01);
}

TEST_CASE("flow field preconditions") {
  FlowField f;
  f.center = Vec2(0.5, 0.0);
  f.radius = 0.3;
  CHECK_NOTHROW(f.validate());
  FlowField bad = f;
  bad.radius = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = f;
  bad.direction = Vec2::Zero();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = f;
  bad.center = Vec2(0.1, 0.1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const GridSet g = GridSet::from_cone(PlanarCone::halfplane(), 1.0, 128);
  CHECK_THROWS_AS(flow_set(g, f, 0.6 / f.lipschitz()), std::invalid_argument);
  FlowField outside = f;
  outside.center = Vec2(0.9, 0.0);
  CHECK_THROWS_AS(flow_set(g, outside, 0.01), std::invalid_argument);
}

TEST_CASE("flow map: identity at t = 0, inverse at -t, Jacobian consistent") {
  FlowField f;
  f.center = Vec2(0.6, 0.1);
  f.radius = 0.3;
  f.direction = Vec2(1.0, 2.0);
  const Vec2 p(0.55, 0.2);
  const FlowPoint id = flow_map(f, p, 0.0);
  CHECK((id.point - p).norm() == 0.0);
  CHECK((id.jacobian - Eigen::Matrix2d::Identity()).norm() == 0.0);

  const FlowPoint fwd = flow_map(f, p, 0.05);
  const FlowPoint back = flow_map(f, fwd.point, -0.05);
  CHECK((back.point - p).norm() < 1e-10);
  CHECK((back.jacobian * fwd.jacobian - Eigen::Matrix2d::Identity()).norm() < 1e-8);

  const double e = 1e-6;
  for (int c = 0; c < 2; ++c) {
    const Vec2 dp = e * Vec2::Unit(c);
    const Vec2 fd = (flow_map(f, p + dp, 0.05).point - flow_map(f, p - dp, 0.05).point) / (2 * e);
    CHECK((fd - fwd.jacobian.col(c)).norm() < 1e-7);
  }
}

TEST_CASE("flowed sets: identity cases, area change and edge position") {
  const GridSet hp = GridSet::from_cone(PlanarCone::halfplane(), 2.0, 1024);
  REQUIRE(hp.contains(Vec2(0.0, 1.0)));
  FlowField f;
  f.center = Vec2(1.0, 0.0);
  f.radius = 0.5;
  f.direction = Vec2(0.0, 1.0);
  CHECK(flow_set(hp, f, 0.0) == hp);
  FlowField still = f;
  still.amplitude = 0.0;
  CHECK(flow_set(hp, still, 0.1) == hp);

  const double t = 0.12;
  REQUIRE(t * f.lipschitz() < 0.5);
  const GridSet moved = flow_set(hp, f, t);
  const double h = hp.cell_size();

  // The edge y = 0 is lifted to y = Y(x), so E loses ∫ Y dx.
  const int n = hp.resolution();
  double lost = 0.0;
  int worst = 0;
  double max_err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = hp.center(i, 0).x();
    const double Y = std::abs(x - f.center.x()) < f.radius ? edge_height(f, x, t) : 0.0;
    lost += Y * h;
    int j = n / 2 - 4;
    while (j < n && !moved.inside(i, j)) ++j;
    const double edge = -hp.half_width() + j * h;
    if (std::abs(edge - Y) > max_err) {
      max_err = std::abs(edge - Y);
      worst = i;
    }
  }
  const double area_change = (double(moved.count()) - double(hp.count())) * h * h;
  CHECK(lost > 0.04);
  CHECK(area_change == Approx(-lost).epsilon(5e-3));
  INFO("worst column " << worst);
  CHECK(max_err <= h);
}

TEST_CASE("second difference: zero field and invariance of the line") {
  const GridSet hp = GridSet::from_cone(PlanarCone::halfplane(), 1.0, 256);
  FlowField f;
  f.center = Vec2(0.6, 0.0);
  f.radius = 0.25;
  const Region omega = Region::make_ball(f.center, 0.3);
  const double s = 0.3, t = 0.01 * f.radius;

  FlowField still = f;
  still.amplitude = 0.0;
  CHECK(std::abs(second_difference(hp, still, omega, s, t)) < 1e-9);
  CHECK_THROWS_AS(second_difference(hp, f, Region::make_ball(f.center, 0.2), s, t),
                  std::invalid_argument);

  const double Q = line_form(f, s);
  const FlowDifferences normal = flow_differences(hp, f, omega, s, t);
  CHECK(normal.second_richardson == Approx(Q).epsilon(0.02));
  CHECK(std::abs(normal.first) < 1e-3 * Q);
  CHECK(normal.second == Approx(normal.second_half).epsilon(1e-3));

  // A tilted field sees half the normal form; a tangential one nearly none.
  FlowField tilted = f;
  tilted.direction = Vec2(1.0, 1.0);
  const double oblique = second_difference(hp, tilted, omega, s, t);
  CHECK(oblique == Approx(0.5 * Q).epsilon(0.02));
  FlowField along = f;
  along.direction = Vec2(1.0, 0.0);
  const double tangential = second_difference(hp, along, omega, s, t);
  CHECK(tangential >= -1e-3 * Q);
  CHECK(tangential < 0.01 * Q);
  FlowField down = f;
  down.direction = Vec2(0.0, -1.0);
  CHECK(second_difference(hp, down, omega, s, t) == Approx(normal.second_richardson).epsilon(1e-10));
}
