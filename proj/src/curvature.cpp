#include "conelab/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "conelab/kernels.hpp"
#include "conelab/parallel.hpp"
#include "conelab/quadrature.hpp"

namespace conelab {

namespace {

constexpr double pi = std::numbers::pi;

void check_s(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("curvature: s must lie in (0, 1)");
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Radial integral along z + ρu beyond the box exit, weighted by membership.
double tail_ray(const PlanarCone* tail, double R, const Vec2& z, double alpha, double s,
                double w_in, double w_out) {
  const Vec2 u(std::cos(alpha), std::sin(alpha));
  double exit = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k)
    if (u[k] != 0.0) exit = std::min(exit, ((u[k] > 0.0 ? R : -R) - z[k]) / u[k]);
  if (!tail) return w_out * std::pow(exit, -s) / s;
  double cuts[64];
  int m = 0;
  for (int i = 1; i <= tail->ray_count() && m < 64; ++i) {
    const Vec2 e = tail->direction(i);
    const double den = cross2(u, e);
    if (den == 0.0) continue;
    const double rho = cross2(e, z) / den;
    const double t = cross2(z, u) / -den;
    if (rho > exit && t > 0.0) cuts[m++] = rho;
  }
  std::sort(cuts, cuts + m);
  double acc = 0.0;
  double lo = exit;
  for (int k = 0; k <= m; ++k) {
    const double hi = k < m ? cuts[k] : std::numeric_limits<double>::infinity();
    const double probe = k < m ? 0.5 * (lo + hi) : 2.0 * lo + 1.0;
    const double w = tail->contains(z + probe * u) ? w_in : w_out;
    const double hi_term = k < m ? std::pow(hi, -s) : 0.0;
    acc += w * (std::pow(lo, -s) - hi_term) / s;
    lo = hi;
  }
  return acc;
}

struct PvPair {
  double near;  // excision ε
  double far;   // excision 2ε
};

PvPair region_pv_pair(const GridSet& grid, const Vec2& x, double s, double eps) {
  check_s(s);
  const double h = grid.cell_size();
  if (!(eps >= 2.0 * h * (1.0 - 1e-12)))
    throw std::invalid_argument("excision: radius must be at least two grid cells");
  if (!grid.in_box(x)) throw std::invalid_argument("point: must lie inside the grid box");
  const int n = grid.resolution();
  const double R = grid.half_width();
  // x must touch both inside and outside cells.
  {
    const int ci = static_cast<int>(std::floor((x.x() + R) / h));
    const int cj = static_cast<int>(std::floor((x.y() + R) / h));
    bool in = false, out = false;
    for (int j = cj - 1; j <= cj + 1; ++j)
      for (int i = ci - 1; i <= ci + 1; ++i) {
        if (i < 0 || j < 0 || i >= n || j >= n) continue;
        if ((grid.center(i, j) - x).lpNorm<Eigen::Infinity>() > 1.0 * h) continue;
        (grid.inside(i, j) ? in : out) = true;
      }
    if (!(in && out)) throw std::invalid_argument("point: not on the discretized boundary");
  }
  const double p = 2.0 + s;
  const double off = 0.5 * h / std::sqrt(3.0);
  const double w = 0.25 * h * h;
  const double e1 = eps * eps, e2 = 4.0 * eps * eps;
  std::vector<double> rows_near(n), rows_far(n);
  parallel_for(n, [&](std::size_t uj) {
    const int j = static_cast<int>(uj);
    CompensatedSum a, b;
    for (int i = 0; i < n; ++i) {
      const Vec2 c = grid.center(i, j);
      const double sign = grid.inside(i, j) ? -1.0 : 1.0;
      for (int q = 0; q < 4; ++q) {
        const double dx = c.x() + ((q & 1) ? off : -off) - x.x();
        const double dy = c.y() + ((q & 2) ? off : -off) - x.y();
        const double r2 = dx * dx + dy * dy;
        if (r2 < e1) continue;
        const double k = sign * w * std::pow(r2, -0.5 * p);
        a += k;
        if (r2 >= e2) b += k;
      }
    }
    rows_near[uj] = a.value();
    rows_far[uj] = b.value();
  });
  CompensatedSum a, b;
  for (int j = 0; j < n; ++j) {
    a += rows_near[j];
    b += rows_far[j];
  }
  const PlanarCone* tail = grid.conical_tail() ? &*grid.conical_tail() : nullptr;
  const double t = tail_integral(tail, R, x, s, -1.0, 1.0);
  return {a.value() + t, b.value() + t};
}

}  // namespace

double mean_curvature_boundary(const PlanarCone& cone, const RayPoint& p, double s) {
  check_s(s);
  const Vec2 x = position(cone, p);
  const int j = p.ray_index;
  const Vec2 ej = cone.direction(j);
  CompensatedSum acc;
  for (int i = 1; i <= cone.ray_count(); ++i) {
    if (i == j) continue;
    const double dot = ej.dot(outward_normal(cone, i));
    acc += dot * angular_integral(s, pairwise_angle(cone, i, j));
  }
  return -(2.0 / s) * std::pow(x.norm(), -s) * acc.value();
}

CurvatureSample curvature_sample(const PlanarCone& cone, const RayPoint& p, double s) {
  return {p, s, mean_curvature_boundary(cone, p, s), CurvatureMethod::boundary_formula};
}

double tail_integral(const PlanarCone* tail, double half_width, const Vec2& z, double s,
                     double weight_inside, double weight_outside) {
  check_s(s);
  const double R = half_width;
  if (!(std::abs(z.x()) < R && std::abs(z.y()) < R))
    throw std::invalid_argument("tail_integral: point must lie inside the box");
  const double base = std::atan2(R - z.y(), R - z.x());  // start at a corner direction
  std::vector<double> breaks;
  auto add_direction = [&](const Vec2& d) {
    double a = std::atan2(d.y(), d.x()) - base;
    a = std::fmod(a, 2.0 * pi);
    if (a < 0.0) a += 2.0 * pi;
    breaks.push_back(a);
  };
  const double corners[4][2] = {{R, R}, {-R, R}, {-R, -R}, {R, -R}};
  for (const auto& c : corners) add_direction(Vec2(c[0], c[1]) - z);
  if (tail) {
    for (int i = 1; i <= tail->ray_count(); ++i) {
      const Vec2 e = tail->direction(i);
      add_direction(e);
      add_direction(-e);
      add_direction(e * (R / e.lpNorm<Eigen::Infinity>()) - z);
    }
  }
  breaks.push_back(0.0);
  breaks.push_back(2.0 * pi);
  std::sort(breaks.begin(), breaks.end());
  thread_local boost::math::quadrature::tanh_sinh<double> rule(8);
  CompensatedSum acc;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (b - a < 1e-15) continue;
    acc += rule.integrate(
        [&](double t) { return tail_ray(tail, R, z, base + t, s, weight_inside, weight_outside); }, a, b,
        1e-12);
  }
  return acc.value();
}

double region_pv_excised(const GridSet& grid, const Vec2& x, double s, double excision) {
  return region_pv_pair(grid, x, s, excision).near;
}

double mean_curvature_region_pv(const GridSet& grid, const Vec2& x, double s, double excision) {
  const PvPair v = region_pv_pair(grid, x, s, excision);
  const double q = std::pow(2.0, 1.0 - s);
  return (q * v.near - v.far) / (q - 1.0);
}

}  // namespace conelab
