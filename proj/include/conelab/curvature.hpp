#pragma once

#include "conelab/cone.hpp"
#include "conelab/grid.hpp"

namespace conelab {

enum class CurvatureMethod { boundary_formula, region_pv_oracle };

struct CurvatureSample {
  RayPoint point;
  double s;
  double value;
  CurvatureMethod method;
};

/// Nonlocal mean curvature H_s^E(x) = PV ∫ (χ_{E^c} - χ_E)(y) |x - y|^{-(2+s)} dy
/// at a boundary point of a cone, through the boundary representation
///   H = (2/s) Σ_i ∫_{Σ_i} (y - x)·ν_i |y - x|^{-(2+s)} dσ(y).
/// The ray through x contributes nothing, each other ray gives
/// -(2/s) |x|^{-s} (e_j·ν_i) I(s, θ_i^j).
double mean_curvature_boundary(const PlanarCone& cone, const RayPoint& p, double s);

CurvatureSample curvature_sample(const PlanarCone& cone, const RayPoint& p, double s);

/// ∫_{R²∖B_ε(x)} (χ_{E^c} - χ_E)|x - y|^{-(2+s)} dy for a single excision
/// radius: 2x2 Gauss points per cell inside the box, exact conical tail
/// outside it.
double region_pv_excised(const GridSet& grid, const Vec2& x, double s, double excision);

/// Region principal value, Richardson-extrapolated from the excision radii
/// ε and 2ε with the ε^{1-s} error law. Throws if ε is below two cells or x
/// is not next to both inside and outside cells.
double mean_curvature_region_pv(const GridSet& grid, const Vec2& x, double s, double excision);

/// ∫ over the complement of the box [-R, R]² of w(y)|z - y|^{-(2+s)} dy for z
/// inside the box, where w = weight_inside on the cone `tail` and
/// weight_outside off it (a null tail means the empty set).
double tail_integral(const PlanarCone* tail, double half_width, const Vec2& z, double s,
                     double weight_inside, double weight_outside);

}  // namespace conelab
