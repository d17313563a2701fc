#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace conelab {

using Vec2 = Eigen::Vector2d;

/// Open cone in the plane bounded by 2N rays from the origin.
///
/// Rays are numbered 1..2N in counterclockwise order. Sector k lies between
/// ray k and ray k+1 (sector 2N wraps around to ray 1); sectors alternate
/// between inside and outside, starting with first_sector_inside.
class PlanarCone {
public:
  PlanarCone(std::vector<double> ray_angles, bool first_sector_inside);

  static PlanarCone halfplane();
  static PlanarCone cross();
  /// {0 < arg < theta}
  static PlanarCone sector(double theta);
  /// 2k equiangular rays starting at angle 0.
  static PlanarCone k_fan(int k);

  int ray_count() const { return static_cast<int>(angles_.size()); }
  const std::vector<double>& ray_angles() const { return angles_; }
  bool first_sector_inside() const { return first_inside_; }

  /// Angle of ray i (1-based).
  double angle(int i) const;
  /// Unit direction of ray i.
  Vec2 direction(int i) const;
  /// Whether sector k (1-based, counterclockwise from ray k) belongs to E.
  bool sector_inside(int k) const;
  /// Membership of a point; points on a ray count as outside.
  bool contains(const Vec2& p) const;

  PlanarCone complement() const;
  PlanarCone rotated(double alpha) const;

private:
  void check_index(int i) const;

  std::vector<double> angles_;
  bool first_inside_;
};

/// Point on ray `ray_index` at distance `radius` from the vertex.
struct RayPoint {
  int ray_index;
  double radius;
};

Vec2 position(const PlanarCone& cone, const RayPoint& p);

/// Unit normal to ray i pointing out of the inside sector adjacent to it.
Vec2 outward_normal(const PlanarCone& cone, int i);

/// Counterclockwise angle from ray i to ray j, in (0, 2π).
double pairwise_angle(const PlanarCone& cone, int i, int j);

/// |ν_i - ν_j|², from the explicit normals. Values below 1e-24 (normals
/// equal to within the 1e-12 angle tolerance) are reported as 0.
double normal_jump_squared(const PlanarCone& cone, int i, int j);

/// Length of the boundary inside the annulus 1 < |x| < 2, i.e. the ray count.
double classical_perimeter_annulus(const PlanarCone& cone);

/// Named cones: "halfplane", "cross", "sector:<theta>", "k-fan:<k>".
PlanarCone named_cone(const std::string& name);

}  // namespace conelab
