#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conelab/cone.hpp"

namespace conelab {

/// Pixelized planar set on the box [-R, R]², resolution × resolution cells.
/// Cell (i, j) has center (-R + (i + ½)h, -R + (j + ½)h), h = 2R/resolution.
/// Outside the box the set is either empty or the conical tail.
class GridSet {
public:
  GridSet(double half_width, int resolution, std::vector<std::uint8_t> mask,
          std::optional<PlanarCone> conical_tail = std::nullopt);

  /// Rasterizes a cone by cell centers; the cone also serves as tail.
  static GridSet from_cone(const PlanarCone& cone, double half_width, int resolution);

  double half_width() const { return R_; }
  int resolution() const { return n_; }
  double cell_size() const { return 2.0 * R_ / n_; }
  const std::vector<std::uint8_t>& mask() const { return inside_; }
  const std::optional<PlanarCone>& conical_tail() const { return tail_; }

  bool inside(int i, int j) const { return inside_[static_cast<std::size_t>(j) * n_ + i] != 0; }
  Vec2 center(int i, int j) const;
  bool in_box(const Vec2& p) const;
  /// Membership of an arbitrary point: the mask inside the box, the tail outside.
  bool contains(const Vec2& p) const;

  GridSet complement() const;
  std::size_t count() const;

  bool operator==(const GridSet& o) const;

private:
  double R_;
  int n_;
  std::vector<std::uint8_t> inside_;
  std::optional<PlanarCone> tail_;
};

/// Binary snapshot: "CLGRID1\n", little-endian u64 header length, JSON header
/// {"box": R, "resolution": n, "tail_cone": null | {"rays": [...],
/// "first_sector_inside": b}}, then the mask packed row-major, LSB first.
void save_grid(const GridSet& grid, const std::string& path);
GridSet load_grid(const std::string& path);

}  // namespace conelab
