#pragma once

#include <Eigen/Core>

#include "conelab/grid.hpp"

namespace conelab {

/// Localization region: an axis-aligned box or a ball. Grid cells belong to
/// it when their centers do.
struct Region {
  enum class Kind { box, ball };
  Kind kind = Kind::box;
  Vec2 center = Vec2::Zero();
  double size = 1.0;  // half width of the box, radius of the ball

  static Region make_box(const Vec2& c, double half_width) { return {Kind::box, c, half_width}; }
  static Region make_ball(const Vec2& c, double radius) { return {Kind::ball, c, radius}; }

  bool contains(const Vec2& p) const;
  /// Whether the closed disc B_r(c) lies inside the region.
  bool contains_disc(const Vec2& c, double r) const;
};

/// X(p) = amplitude · (1 - |p - center|²/radius²)⁴ · direction inside the
/// support ball, zero outside.
struct FlowField {
  Vec2 center = Vec2(1.0, 0.0);
  double radius = 0.25;
  double amplitude = 1.0;
  Vec2 direction = Vec2(0.0, 1.0);

  Vec2 value(const Vec2& p) const;
  Eigen::Matrix2d gradient(const Vec2& p) const;
  /// Bound on |∇X|: amplitude · max|d/dr (1-r²)⁴| / radius.
  double lipschitz() const;
  bool in_support(const Vec2& p) const;
  void validate() const;
};

/// Flow map φ_t(p) and its Jacobian matrix, by RK4 on the variational system.
struct FlowPoint {
  Vec2 point;
  Eigen::Matrix2d jacobian;
};
FlowPoint flow_map(const FlowField& field, const Vec2& p, double t);

/// (1/2) ∬ over pairs not both outside Ω of |χ_E(x) - χ_E(y)|² |x - y|^{-(2+s)}.
/// Cell pairs use exact cell-averaged kernels up to a few cells apart and a
/// multilevel moment expansion beyond; pairs with one point outside the box
/// use the exact conical tail.
double per_s_localized(const GridSet& grid, const Region& omega, double s);

/// Transports the mask by the flow: each cell takes the value found at the
/// backward image of its center. Throws if |t|·lipschitz() >= 0.5 or the
/// support leaves the box.
GridSet flow_set(const GridSet& grid, const FlowField& field, double t);

/// Per_s(φ_t(E), Ω) - Per_s(E, Ω), written as a pull-back integral over
/// E × E^c of K(φx - φy)J(x)J(y) - K(x - y); only pairs touching the support
/// contribute. The support must lie inside Ω.
double perimeter_change(const GridSet& grid, const FlowField& field, const Region& omega,
                        double s, double t);

struct FlowDifferences {
  double t;
  double second;             // [Δ(t) + Δ(-t)] / t²
  double second_half;        // same with t/2
  double second_richardson;  // (4·second_half - second)/3
  double first;              // [Δ(t) - Δ(-t)] / (2t)
};

FlowDifferences flow_differences(const GridSet& grid, const FlowField& field,
                                 const Region& omega, double s, double t);

/// [Per_s(φ_t E) - 2Per_s(E) + Per_s(φ_{-t} E)]/t², Richardson-combined over t
/// and t/2 when `richardson` is set.
double second_difference(const GridSet& grid, const FlowField& field, const Region& omega,
                         double s, double t, bool richardson = true);

/// [Per_s(φ_t E) - Per_s(φ_{-t} E)]/(2t).
double first_difference(const GridSet& grid, const FlowField& field, const Region& omega,
                        double s, double t);

/// ∬_{[-1,1]²} |k + w|^{-(2+s)} (1-|w₁|)(1-|w₂|) dw: the average of the kernel
/// over two unit cells at integer offset k ≠ 0.
double cell_pair_kernel(int k1, int k2, double s);

}  // namespace conelab
