#include "conelab/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace conelab {

GridSet::GridSet(double half_width, int resolution, std::vector<std::uint8_t> mask,
                 std::optional<PlanarCone> conical_tail)
    : R_(half_width), n_(resolution), inside_(std::move(mask)), tail_(std::move(conical_tail)) {
  if (!(R_ > 0.0 && std::isfinite(R_))) throw std::invalid_argument("box: half width must be positive");
  if (n_ < 64) throw std::invalid_argument("resolution: must be at least 64");
  if (inside_.size() != static_cast<std::size_t>(n_) * n_)
    throw std::invalid_argument("mask: size must be resolution^2");
  for (auto& v : inside_) v = v ? 1 : 0;
  if (tail_) {
    for (int k = 0; k < n_; ++k) {
      const int ring[4][2] = {{k, 0}, {k, n_ - 1}, {0, k}, {n_ - 1, k}};
      for (const auto& c : ring)
        if (inside(c[0], c[1]) != tail_->contains(center(c[0], c[1])))
          throw std::invalid_argument("mask: disagrees with the tail cone on the outer ring");
    }
  }
}

GridSet GridSet::from_cone(const PlanarCone& cone, double half_width, int resolution) {
  if (resolution < 64) throw std::invalid_argument("resolution: must be at least 64");
  const double h = 2.0 * half_width / resolution;
  std::vector<std::uint8_t> m(static_cast<std::size_t>(resolution) * resolution);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i) {
      const Vec2 c(-half_width + (i + 0.5) * h, -half_width + (j + 0.5) * h);
      m[static_cast<std::size_t>(j) * resolution + i] = cone.contains(c);
    }
  return {half_width, resolution, std::move(m), cone};
}

Vec2 GridSet::center(int i, int j) const {
  const double h = cell_size();
  return {-R_ + (i + 0.5) * h, -R_ + (j + 0.5) * h};
}

bool GridSet::in_box(const Vec2& p) const {
  return std::abs(p.x()) < R_ && std::abs(p.y()) < R_;
}

bool GridSet::contains(const Vec2& p) const {
  if (in_box(p)) {
    const double h = cell_size();
    const int i = std::clamp(static_cast<int>(std::floor((p.x() + R_) / h)), 0, n_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() + R_) / h)), 0, n_ - 1);
    return inside(i, j);
  }
  return tail_ ? tail_->contains(p) : false;
}

GridSet GridSet::complement() const {
  std::vector<std::uint8_t> m(inside_.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = inside_[k] ? 0 : 1;
  std::optional<PlanarCone> t;
  if (tail_) t = tail_->complement();
  else throw std::invalid_argument("complement: needs a conical tail (the empty tail has no complement cone)");
  return {R_, n_, std::move(m), std::move(t)};
}

std::size_t GridSet::count() const {
  std::size_t c = 0;
  for (auto v : inside_) c += v;
  return c;
}

bool GridSet::operator==(const GridSet& o) const {
  if (R_ != o.R_ || n_ != o.n_ || inside_ != o.inside_) return false;
  if (tail_.has_value() != o.tail_.has_value()) return false;
  if (!tail_) return true;
  return tail_->ray_angles() == o.tail_->ray_angles() &&
         tail_->first_sector_inside() == o.tail_->first_sector_inside();
}

namespace {
constexpr char magic[] = "CLGRID1\n";

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("grid file: truncated");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}
}  // namespace

void save_grid(const GridSet& grid, const std::string& path) {
  nlohmann::json header;
  header["box"] = grid.half_width();
  header["resolution"] = grid.resolution();
  if (grid.conical_tail()) {
    header["tail_cone"] = {{"rays", grid.conical_tail()->ray_angles()},
                           {"first_sector_inside", grid.conical_tail()->first_sector_inside()}};
  } else {
    header["tail_cone"] = nullptr;
  }
  const std::string text = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("grid file: cannot open " + path);
  os.write(magic, sizeof(magic) - 1);
  put_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto& m = grid.mask();
  std::vector<unsigned char> bits((m.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m[k]) bits[k / 8] |= static_cast<unsigned char>(1u << (k % 8));
  os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!os) throw std::runtime_error("grid file: write failed for " + path);
}

GridSet load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("grid file: cannot open " + path);
  char head[sizeof(magic) - 1];
  if (!is.read(head, sizeof(head)) || std::memcmp(head, magic, sizeof(head)) != 0)
    throw std::runtime_error("grid file: bad magic in " + path);
  const std::uint64_t len = get_u64(is);
  if (len > (1u << 20)) throw std::runtime_error("grid file: header too large");
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len)))
    throw std::runtime_error("grid file: truncated header");
  const auto header = nlohmann::json::parse(text);
  const double R = header.at("box").get<double>();
  const int n = header.at("resolution").get<int>();
  if (n < 64 || n > (1 << 15)) throw std::runtime_error("grid file: bad resolution");
  std::optional<PlanarCone> tail;
  if (!header.at("tail_cone").is_null()) {
    const auto& t = header.at("tail_cone");
    tail = PlanarCone(t.at("rays").get<std::vector<double>>(),
                      t.at("first_sector_inside").get<bool>());
  }
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  std::vector<unsigned char> bits((cells + 7) / 8);
  if (!is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size())))
    throw std::runtime_error("grid file: truncated mask");
  std::vector<std::uint8_t> m(cells);
  for (std::size_t k = 0; k < cells; ++k) m[k] = (bits[k / 8] >> (k % 8)) & 1u;
  return {R, n, std::move(m), std::move(tail)};
}

}  // namespace conelab
