#include "conelab/oracle.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "conelab/curvature.hpp"
#include "conelab/parallel.hpp"
#include "conelab/quadrature.hpp"

namespace conelab {

namespace {

constexpr double pi = std::numbers::pi;

// Cells within this Chebyshev distance (in blocks of the current level) are
// refined further; larger values trade time for far-field accuracy.
constexpr int kSeparation = 4;
// Offsets up to this distance use direction-resolved polar weights under flow.
constexpr int kPolarNear = 2;
constexpr int kTableRadius = 2 * kSeparation + 1;
constexpr int kAngularNodes = 16;

void check_s(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("s must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Polar rule for the cell-pair kernel: ∫|z|^{-p} Λ(z - k) g(dir z) dz ≈ Σ ω_q g(α_q).

struct PolarRule {
  std::vector<double> cx, cy, w;
  double total() const {
    double t = 0.0;
    for (double v : w) t += v;
    return t;
  }
};

double radial_moment(double a, double b, double e) {
  // ∫_a^b ρ^{e-1} dρ
  if (std::abs(e) < 1e-14) return std::log(b / a);
  if (a == 0.0) return std::pow(b, e) / e;
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

PolarRule make_polar_rule(int k1, int k2, double s, int nodes) {
  const double p = 2.0 + s;
  const GaussRule& gl = gauss_legendre(nodes);
  PolarRule rule;
  for (int qx = 0; qx < 2; ++qx) {
    for (int qy = 0; qy < 2; ++qy) {
      const double x0 = k1 - 1 + qx, y0 = k2 - 1 + qy;
      // tent factors on this unit square: a + b z
      const double a1 = qx ? 1.0 + k1 : 1.0 - k1, b1 = qx ? -1.0 : 1.0;
      const double a2 = qy ? 1.0 + k2 : 1.0 - k2, b2 = qy ? -1.0 : 1.0;
      const double ref = std::atan2(y0 + 0.5, x0 + 0.5);
      std::vector<double> ang;
      for (int cxn = 0; cxn < 2; ++cxn)
        for (int cyn = 0; cyn < 2; ++cyn) {
          const double x = x0 + cxn, y = y0 + cyn;
          if (x == 0.0 && y == 0.0) continue;
          double d = std::atan2(y, x) - ref;
          if (d > pi) d -= 2.0 * pi;
          if (d < -pi) d += 2.0 * pi;
          ang.push_back(d);
        }
      std::sort(ang.begin(), ang.end());
      for (std::size_t m = 0; m + 1 < ang.size(); ++m) {
        const double lo = ang[m], hi = ang[m + 1];
        if (hi - lo < 1e-15) continue;
        const double c = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        for (int q = 0; q < nodes; ++q) {
          const double alpha = ref + c + hw * gl.x[q];
          const double ca = std::cos(alpha), sa = std::sin(alpha);
          // slab intersection of the ray with the square
          double tin = 0.0, tout = std::numeric_limits<double>::infinity();
          auto slab = [&](double o, double dlo, double dhi) {
            if (std::abs(o) < 1e-300) {
              if (dlo > 0.0 || dhi < 0.0) tout = -1.0;
              return;
            }
            double t1 = dlo / o, t2 = dhi / o;
            if (t1 > t2) std::swap(t1, t2);
            tin = std::max(tin, t1);
            tout = std::min(tout, t2);
          };
          slab(ca, x0, x0 + 1.0);
          slab(sa, y0, y0 + 1.0);
          if (!(tout > tin)) continue;
          const double c0 = a1 * a2, c1 = a1 * b2 * sa + a2 * b1 * ca, c2 = b1 * b2 * ca * sa;
          double radial = 0.0;
          if (c0 != 0.0) radial += c0 * radial_moment(tin, tout, 2.0 - p);
          radial += c1 * radial_moment(tin, tout, 3.0 - p);
          radial += c2 * radial_moment(tin, tout, 4.0 - p);
          rule.cx.push_back(ca);
          rule.cy.push_back(sa);
          rule.w.push_back(gl.w[q] * hw * radial);
        }
      }
    }
  }
  return rule;
}

// Kernel table for one exponent: κ(k) for |k|∞ ≤ kTableRadius and polar rules
// for |k|∞ ≤ kPolarNear.
struct KernelTable {
  double s;
  std::vector<double> kappa;
  std::vector<PolarRule> rules;

  static int index(int k1, int k2, int r) { return (k2 + r) * (2 * r + 1) + (k1 + r); }
  double operator()(int k1, int k2) const { return kappa[index(k1, k2, kTableRadius)]; }
  const PolarRule& rule(int k1, int k2) const { return rules[index(k1, k2, kPolarNear)]; }
};

const KernelTable& kernel_table(double s) {
  static std::mutex m;
  static std::map<double, std::unique_ptr<KernelTable>> cache;
  std::lock_guard lock(m);
  auto it = cache.find(s);
  if (it != cache.end()) return *it->second;
  auto t = std::make_unique<KernelTable>();
  t->s = s;
  const int r = kTableRadius, rn = kPolarNear;
  t->kappa.assign((2 * r + 1) * (2 * r + 1), 0.0);
  t->rules.resize((2 * rn + 1) * (2 * rn + 1));
  for (int k2 = -r; k2 <= r; ++k2)
    for (int k1 = -r; k1 <= r; ++k1) {
      if (k1 == 0 && k2 == 0) continue;
      PolarRule rule = make_polar_rule(k1, k2, s, 20);
      t->kappa[KernelTable::index(k1, k2, r)] = rule.total();
      if (std::max(std::abs(k1), std::abs(k2)) <= rn)
        t->rules[KernelTable::index(k1, k2, rn)] = make_polar_rule(k1, k2, s, kAngularNodes);
    }
  auto& ref = *t;
  cache.emplace(s, std::move(t));
  return ref;
}

// ---------------------------------------------------------------------------
// Moment pyramid over the cell lattice, coordinates in cell units with cell
// (i, j) centered at (i, j).

struct Moments {
  double c = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
};

class Pyramid {
public:
  explicit Pyramid(int n) {
    int L = 0;
    while ((1 << L) < n) ++L;
    levels_ = L + 1;
    data_.resize(levels_);
    for (int l = 0; l < levels_; ++l) data_[l].assign(std::size_t(dim(l)) * dim(l), Moments{});
  }

  int levels() const { return levels_; }
  int dim(int l) const { return (1 << (levels_ - 1)) >> l; }

  /// Cell weight c at displacement (dx, dy) from the cell center with extent
  /// covariance e = (exx, exy, eyy).
  void set(int i, int j, double c, double dx, double dy, double exx, double exy, double eyy) {
    Moments& m = data_[0][std::size_t(j) * dim(0) + i];
    m = {c, c * dx, c * dy, c * (dx * dx + exx), c * (dx * dy + exy), c * (dy * dy + eyy)};
  }
  void set(int i, int j, double c) { set(i, j, c, 0, 0, 1.0 / 12.0, 0, 1.0 / 12.0); }

  void build() {
    for (int l = 1; l < levels_; ++l) {
      const int d = dim(l), dc = dim(l - 1);
      const double half = std::ldexp(1.0, l - 2);  // child center offset
      for (int J = 0; J < d; ++J)
        for (int I = 0; I < d; ++I) {
          Moments p;
          for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
              const Moments& ch = data_[l - 1][std::size_t(2 * J + dj) * dc + 2 * I + di];
              if (ch.c == 0.0 && ch.sx == 0.0 && ch.sy == 0.0) continue;
              const double ox = di ? half : -half, oy = dj ? half : -half;
              p.c += ch.c;
              p.sx += ch.sx + ch.c * ox;
              p.sy += ch.sy + ch.c * oy;
              p.sxx += ch.sxx + 2.0 * ox * ch.sx + ch.c * ox * ox;
              p.sxy += ch.sxy + ox * ch.sy + oy * ch.sx + ch.c * ox * oy;
              p.syy += ch.syy + 2.0 * oy * ch.sy + ch.c * oy * oy;
            }
          data_[l][std::size_t(J) * d + I] = p;
        }
    }
  }

  /// Monopole + quadrupole value of Σ_block c·|z - y|^{-p}; (exx, exy, eyy)
  /// is the extent covariance of the target cell.
  double eval(int l, int I, int J, double zx, double zy, double p, double exx, double exy,
              double eyy) const {
    const Moments& m = data_[l][std::size_t(J) * dim(l) + I];
    if (m.c == 0.0) return 0.0;
    const double size = std::ldexp(1.0, l);
    const double mx = m.sx / m.c, my = m.sy / m.c;
    const double dx = zx - ((I + 0.5) * size - 0.5 + mx);
    const double dy = zy - ((J + 0.5) * size - 0.5 + my);
    const double sxx = m.sxx / m.c - mx * mx + exx;
    const double sxy = m.sxy / m.c - mx * my + exy;
    const double syy = m.syy / m.c - my * my + eyy;
    const double r2 = dx * dx + dy * dy;
    const double k = std::pow(r2, -0.5 * p);
    const double quad = -p * (sxx + syy) / r2 +
                        p * (p + 2.0) * (dx * dx * sxx + 2.0 * dx * dy * sxy + dy * dy * syy) /
                            (r2 * r2);
    return m.c * k * (1.0 + 0.5 * quad);
  }

  const Moments& at(int l, int I, int J) const { return data_[l][std::size_t(J) * dim(l) + I]; }

private:
  int levels_;
  std::vector<std::vector<Moments>> data_;
};

/// Visits the partition of all cells relative to target cell (i, j): level-0
/// cells (near(bi, bj)) and coarser blocks (far(l, I, J)).
template <class Near, class Far>
void for_each_partner(int i, int j, int n, int levels, Near&& near, Far&& far) {
  const int W = kSeparation;
  for (int l = 0; l + 1 < levels; ++l) {
    const int dim = ((1 << (levels - 1)) >> l);
    const int lim = l == 0 ? n : dim;
    const int pi_ = i >> (l + 1), pj = j >> (l + 1);
    const int ai = i >> l, aj = j >> l;
    const int i0 = std::max(0, 2 * (pi_ - W)), i1 = std::min(lim - 1, 2 * (pi_ + W) + 1);
    const int j0 = std::max(0, 2 * (pj - W)), j1 = std::min(lim - 1, 2 * (pj + W) + 1);
    for (int J = j0; J <= j1; ++J)
      for (int I = i0; I <= i1; ++I) {
        if (l == 0) {
          near(I, J);
        } else if (std::abs(I - ai) > W || std::abs(J - aj) > W) {
          far(l, I, J);
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Tail integrals over a rectangle, by tensor Chebyshev interpolation when the
// rectangle keeps clear of the box boundary, directly otherwise.

class TailField {
public:
  TailField(const GridSet& grid, double s, double x0, double x1, double y0, double y1)
      : tail_(grid.conical_tail() ? &*grid.conical_tail() : nullptr),
        R_(grid.half_width()), s_(s), x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    const double margin = std::min({R_ - x1, x0 + R_, R_ - y1, y0 + R_});
    const double half = 0.5 * std::max(x1 - x0, y1 - y0);
    direct_ = !(margin > 0.2 * half) || half <= 0.0;
    if (direct_) return;
    const double ratio = margin / half;
    const double rho = 1.0 + ratio + std::sqrt(ratio * (2.0 + ratio));
    N_ = std::clamp(int(std::ceil(32.0 / std::log10(rho) / 2.0)), 8, 64);
    nodes_x_.resize(N_ + 1);
    nodes_y_.resize(N_ + 1);
    for (int k = 0; k <= N_; ++k) {
      const double c = std::cos(pi * k / N_);
      nodes_x_[k] = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * c;
      nodes_y_[k] = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * c;
    }
    in_.assign(std::size_t(N_ + 1) * (N_ + 1), 0.0);
    out_.assign(in_.size(), 0.0);
    parallel_for(in_.size(), [&](std::size_t q) {
      const Vec2 z(nodes_x_[q % (N_ + 1)], nodes_y_[q / (N_ + 1)]);
      in_[q] = tail_integral(tail_, R_, z, s_, 1.0, 0.0);
      out_[q] = tail_integral(tail_, R_, z, s_, 0.0, 1.0);
    });
  }

  /// (∫ over the tail inside the cone, ∫ over the tail outside the cone).
  std::pair<double, double> operator()(const Vec2& z) const {
    if (direct_)
      return {tail_integral(tail_, R_, z, s_, 1.0, 0.0), tail_integral(tail_, R_, z, s_, 0.0, 1.0)};
    const auto wx = weights(z.x(), nodes_x_);
    const auto wy = weights(z.y(), nodes_y_);
    double a = 0.0, b = 0.0;
    for (int j = 0; j <= N_; ++j) {
      if (wy[j] == 0.0) continue;
      double ra = 0.0, rb = 0.0;
      for (int i = 0; i <= N_; ++i) {
        const std::size_t q = std::size_t(j) * (N_ + 1) + i;
        ra += wx[i] * in_[q];
        rb += wx[i] * out_[q];
      }
      a += wy[j] * ra;
      b += wy[j] * rb;
    }
    return {a, b};
  }

private:
  std::vector<double> weights(double x, const std::vector<double>& nodes) const {
    std::vector<double> w(N_ + 1, 0.0);
    double total = 0.0;
    for (int k = 0; k <= N_; ++k) {
      const double d = x - nodes[k];
      if (d == 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        w[k] = 1.0;
        return w;
      }
      double c = (k % 2 ? -1.0 : 1.0) / d;
      if (k == 0 || k == N_) c *= 0.5;
      w[k] = c;
      total += c;
    }
    for (double& v : w) v /= total;
    return w;
  }

  const PlanarCone* tail_;
  double R_, s_, x0_, x1_, y0_, y1_;
  bool direct_ = true;
  int N_ = 0;
  std::vector<double> nodes_x_, nodes_y_, in_, out_;
};

std::array<double, 4> region_bounds(const Region& r, double R) {
  return {std::max(-R, r.center.x() - r.size), std::min(R, r.center.x() + r.size),
          std::max(-R, r.center.y() - r.size), std::min(R, r.center.y() + r.size)};
}

double psi_factor(double q) { return q < 1.0 ? std::pow(1.0 - q, 4) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------

bool Region::contains(const Vec2& p) const {
  if (kind == Kind::ball) return (p - center).norm() < size;
  return (p - center).lpNorm<Eigen::Infinity>() < size;
}

bool Region::contains_disc(const Vec2& c, double r) const {
  if (kind == Kind::ball) return (c - center).norm() + r <= size;
  return (c - center).lpNorm<Eigen::Infinity>() + r <= size;
}

Vec2 FlowField::value(const Vec2& p) const {
  const double q = (p - center).squaredNorm() / (radius * radius);
  return amplitude * psi_factor(q) * direction;
}

Eigen::Matrix2d FlowField::gradient(const Vec2& p) const {
  const double q = (p - center).squaredNorm() / (radius * radius);
  if (q >= 1.0) return Eigen::Matrix2d::Zero();
  const Vec2 grad_psi = -8.0 * std::pow(1.0 - q, 3) * (p - center) / (radius * radius);
  return amplitude * direction * grad_psi.transpose();
}

double FlowField::lipschitz() const {
  // max over r of 8 r (1 - r²)³ is attained at r = 1/√7
  const double r = 1.0 / std::sqrt(7.0);
  return std::abs(amplitude) * 8.0 * r * std::pow(1.0 - r * r, 3) / radius;
}

bool FlowField::in_support(const Vec2& p) const { return (p - center).norm() < radius; }

void FlowField::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("flow field: radius must be positive");
  if (!std::isfinite(amplitude)) throw std::invalid_argument("flow field: amplitude not finite");
  if (!(direction.norm() > 0.0)) throw std::invalid_argument("flow field: zero direction");
  if (center.norm() <= radius)
    throw std::invalid_argument("flow field: support must exclude the origin");
}

FlowPoint flow_map(const FlowField& field, const Vec2& p, double t) {
  FlowPoint out{p, Eigen::Matrix2d::Identity()};
  if (t == 0.0) return out;
  const Vec2 dir = field.direction.normalized();
  FlowField f = field;
  f.direction = dir;
  const int steps = std::max(8, int(std::ceil(std::abs(t) * f.lipschitz() / 0.01)));
  const double dt = t / steps;
  Vec2 x = p;
  Eigen::Matrix2d F = Eigen::Matrix2d::Identity();
  for (int k = 0; k < steps; ++k) {
    const Vec2 k1 = f.value(x);
    const Eigen::Matrix2d G1 = f.gradient(x) * F;
    const Vec2 x2 = x + 0.5 * dt * k1;
    const Eigen::Matrix2d F2 = F + 0.5 * dt * G1;
    const Vec2 k2 = f.value(x2);
    const Eigen::Matrix2d G2 = f.gradient(x2) * F2;
    const Vec2 x3 = x + 0.5 * dt * k2;
    const Eigen::Matrix2d F3 = F + 0.5 * dt * G2;
    const Vec2 k3 = f.value(x3);
    const Eigen::Matrix2d G3 = f.gradient(x3) * F3;
    const Vec2 x4 = x + dt * k3;
    const Eigen::Matrix2d F4 = F + dt * G3;
    const Vec2 k4 = f.value(x4);
    const Eigen::Matrix2d G4 = f.gradient(x4) * F4;
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    F += dt / 6.0 * (G1 + 2.0 * G2 + 2.0 * G3 + G4);
  }
  return {x, F};
}

double cell_pair_kernel(int k1, int k2, double s) {
  check_s(s);
  if (k1 == 0 && k2 == 0) throw std::invalid_argument("cell_pair_kernel: offset must be nonzero");
  return make_polar_rule(k1, k2, s, 20).total();
}

// ---------------------------------------------------------------------------

double per_s_localized(const GridSet& grid, const Region& omega, double s) {
  check_s(s);
  if (!(omega.size > 0.0)) throw std::invalid_argument("omega: size must be positive");
  const double R = grid.half_width();
  if ((omega.center.array().abs() + omega.size > R * (1.0 + 1e-12)).any())
    throw std::invalid_argument("omega must lie inside the box");
  const int n = grid.resolution();
  const double h = grid.cell_size(), p = 2.0 + s;
  const KernelTable& kt = kernel_table(s);

  Pyramid pe(n), pc(n), pe_om(n), pc_om(n);
  std::vector<std::uint8_t> in_omega(std::size_t(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const bool e = grid.inside(i, j);
      const bool o = omega.contains(grid.center(i, j));
      in_omega[std::size_t(j) * n + i] = o;
      (e ? pe : pc).set(i, j, 1.0);
      if (o) (e ? pe_om : pc_om).set(i, j, 1.0);
    }
  pe.build();
  pc.build();
  pe_om.build();
  pc_om.build();

  const auto bounds = region_bounds(omega, R);
  const TailField tails(grid, s, bounds[0], bounds[1], bounds[2], bounds[3]);
  const int levels = pe.levels();
  const double e12 = 1.0 / 12.0;

  std::vector<double> rows(n, 0.0), tail_rows(n, 0.0);
  parallel_for(std::size_t(n), [&](std::size_t jj) {
    const int j = int(jj);
    CompensatedSum row, tail_row;
    for (int i = 0; i < n; ++i) {
      if (!in_omega[std::size_t(j) * n + i]) continue;
      const bool e = grid.inside(i, j);
      const Pyramid& all = e ? pc : pe;
      const Pyramid& loc = e ? pc_om : pe_om;
      double s1 = 0.0, s2 = 0.0;
      for_each_partner(
          i, j, n, levels,
          [&](int bi, int bj) {
            if (grid.inside(bi, bj) == e) return;
            const double k = kt(bi - i, bj - j);
            s1 += k;
            if (in_omega[std::size_t(bj) * n + bi]) s2 += k;
          },
          [&](int l, int I, int J) {
            s1 += all.eval(l, I, J, i, j, p, e12, 0.0, e12);
            s2 += loc.eval(l, I, J, i, j, p, e12, 0.0, e12);
          });
      row += s1 - 0.5 * s2;
      const auto [t_in, t_out] = tails(grid.center(i, j));
      tail_row += e ? t_out : t_in;
    }
    rows[jj] = row.value();
    tail_rows[jj] = tail_row.value();
  });
  CompensatedSum cells, tail;
  for (int j = 0; j < n; ++j) {
    cells += rows[j];
    tail += tail_rows[j];
  }
  return std::pow(h, 4.0 - p) * cells.value() + h * h * tail.value();
}

namespace {

void check_flow(const GridSet& grid, const FlowField& field, double t) {
  field.validate();
  const double R = grid.half_width();
  if (field.center.lpNorm<Eigen::Infinity>() + field.radius >= R)
    throw std::invalid_argument("flow field: support must lie inside the box");
  if (!(std::abs(t) * field.lipschitz() < 0.5))
    throw std::invalid_argument("flow step violates |t|·Lip < 0.5");
}

}  // namespace

GridSet flow_set(const GridSet& grid, const FlowField& field, double t) {
  check_flow(grid, field, t);
  const int n = grid.resolution();
  std::vector<std::uint8_t> mask = grid.mask();
  parallel_for(std::size_t(n), [&](std::size_t jj) {
    const int j = int(jj);
    for (int i = 0; i < n; ++i) {
      const Vec2 c = grid.center(i, j);
      if (!field.in_support(c)) continue;
      const Vec2 pre = flow_map(field, c, -t).point;
      mask[std::size_t(j) * n + i] = grid.contains(pre) ? 1 : 0;
    }
  });
  return GridSet(grid.half_width(), n, std::move(mask), grid.conical_tail());
}

namespace {

struct MovingCell {
  int i, j;
  bool e;
};

class PullbackEvaluator {
public:
  PullbackEvaluator(const GridSet& grid, const FlowField& field, double s)
      : grid_(grid), field_(field), s_(s), p_(2.0 + s), n_(grid.resolution()),
        h_(grid.cell_size()), kt_(kernel_table(s)), moving_index_(std::size_t(n_) * n_, -1),
        e_static_(n_), c_static_(n_) {
    field_.direction = field_.direction.normalized();
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) {
        const bool e = grid.inside(i, j);
        if (field_.in_support(grid.center(i, j))) {
          moving_index_[std::size_t(j) * n_ + i] = int(moving_.size());
          moving_.push_back({i, j, e});
        } else if (e) {
          e_static_.set(i, j, 1.0);
        }
        if (!e) c_static_.set(i, j, 1.0);
      }
    e_static_.build();
    c_static_.build();
    const double R = grid.half_width();
    const Vec2& c = field_.center;
    const double r = field_.radius;
    tails_ = std::make_unique<TailField>(grid, s, std::max(-R, c.x() - r), std::min(R, c.x() + r),
                                         std::max(-R, c.y() - r), std::min(R, c.y() + r));
    base_tail_.resize(moving_.size());
    parallel_for(moving_.size(), [&](std::size_t m) {
      const auto [a, b] = (*tails_)(grid_.center(moving_[m].i, moving_[m].j));
      base_tail_[m] = moving_[m].e ? b : a;
    });
  }

  double change(double t) const {
    if (t == 0.0) return 0.0;
    const std::size_t M = moving_.size();
    // flowed positions in cell units, Jacobians
    std::vector<Vec2> pos(M);
    std::vector<Eigen::Matrix2d> jac(M);
    std::vector<double> det(M);
    const double R = grid_.half_width();
    parallel_for(M, [&](std::size_t m) {
      const FlowPoint fp = flow_map(field_, grid_.center(moving_[m].i, moving_[m].j), t);
      pos[m] = (fp.point.array() + R) / h_ - 0.5;
      jac[m] = fp.jacobian;
      det[m] = fp.jacobian.determinant();
    });
    Pyramid c_all(n_);
    for (int j = 0; j < n_; ++j)
      for (int i = 0; i < n_; ++i) {
        if (grid_.inside(i, j)) continue;
        const int m = moving_index_[std::size_t(j) * n_ + i];
        if (m < 0) {
          c_all.set(i, j, 1.0);
        } else {
          const Eigen::Matrix2d ext = jac[m] * jac[m].transpose() / 12.0;
          c_all.set(i, j, det[m], pos[m].x() - i, pos[m].y() - j, ext(0, 0), ext(0, 1), ext(1, 1));
        }
      }
    c_all.build();

    const int levels = c_all.levels();
    const double e12 = 1.0 / 12.0;
    std::vector<double> cell_part(M, 0.0), tail_part(M, 0.0);
    parallel_for(M, [&](std::size_t m) {
      const MovingCell& a = moving_[m];
      const Vec2& za = pos[m];
      const Eigen::Matrix2d ext = jac[m] * jac[m].transpose() / 12.0;
      const double Ja = det[m];
      CompensatedSum acc;
      auto partner = [&](int bi, int bj, Vec2& zb, Eigen::Matrix2d& Fb, double& Jb) {
        const int mb = moving_index_[std::size_t(bj) * n_ + bi];
        if (mb < 0) {
          zb = Vec2(bi, bj);
          Fb.setIdentity();
          Jb = 1.0;
          return false;
        }
        zb = pos[mb];
        Fb = jac[mb];
        Jb = det[mb];
        return true;
      };
      auto near = [&](int bi, int bj) {
        const bool be = grid_.inside(bi, bj);
        if (be == a.e) return;
        Vec2 zb;
        Eigen::Matrix2d Fb;
        double Jb;
        const bool moving_b = partner(bi, bj, zb, Fb, Jb);
        // pairs of two moving cells are counted once, from the E side
        if (!a.e && moving_b) return;
        const int k1 = bi - a.i, k2 = bj - a.j;
        if (std::max(std::abs(k1), std::abs(k2)) <= kPolarNear) {
          const Eigen::Matrix2d A = 0.5 * (jac[m] + Fb);
          const double Jm = 0.5 * (Ja + Jb);
          const PolarRule& rule = kt_.rule(k1, k2);
          double v = 0.0;
          for (std::size_t q = 0; q < rule.w.size(); ++q) {
            const Vec2 u = A * Vec2(rule.cx[q], rule.cy[q]);
            v += rule.w[q] * (std::pow(u.squaredNorm(), -0.5 * p_) * Jm * Jm - 1.0);
          }
          acc += v;
        } else {
          const double d0 = std::hypot(double(k1), double(k2));
          const double ratio = std::pow((za - zb).norm() / d0, -p_);
          acc += kt_(k1, k2) * (ratio * Ja * Jb - 1.0);
        }
      };
      auto far = [&](int l, int I, int J) {
        if (a.e) {
          acc += Ja * c_all.eval(l, I, J, za.x(), za.y(), p_, ext(0, 0), ext(0, 1), ext(1, 1)) -
                 c_static_.eval(l, I, J, a.i, a.j, p_, e12, 0.0, e12);
        } else {
          acc += Ja * e_static_.eval(l, I, J, za.x(), za.y(), p_, ext(0, 0), ext(0, 1), ext(1, 1)) -
                 e_static_.eval(l, I, J, a.i, a.j, p_, e12, 0.0, e12);
        }
      };
      for_each_partner(a.i, a.j, n_, levels, near, far);
      cell_part[m] = acc.value();
      const Vec2 phys = (za.array() + 0.5) * h_ - R;
      const auto [t_in, t_out] = (*tails_)(phys);
      tail_part[m] = Ja * (a.e ? t_out : t_in) - base_tail_[m];
    });
    CompensatedSum cells, tail;
    for (std::size_t m = 0; m < M; ++m) {
      cells += cell_part[m];
      tail += tail_part[m];
    }
    return std::pow(h_, 4.0 - p_) * cells.value() + h_ * h_ * tail.value();
  }

private:
  const GridSet& grid_;
  FlowField field_;
  double s_, p_;
  int n_;
  double h_;
  const KernelTable& kt_;
  std::vector<int> moving_index_;
  std::vector<MovingCell> moving_;
  Pyramid e_static_, c_static_;
  std::unique_ptr<TailField> tails_;
  std::vector<double> base_tail_;
};

void check_pullback(const GridSet& grid, const FlowField& field, const Region& omega, double s,
                    double t) {
  check_s(s);
  check_flow(grid, field, t);
  if (!omega.contains_disc(field.center, field.radius))
    throw std::invalid_argument("flow field: support must lie inside omega");
}

}  // namespace

double perimeter_change(const GridSet& grid, const FlowField& field, const Region& omega,
                        double s, double t) {
  check_pullback(grid, field, omega, s, t);
  return PullbackEvaluator(grid, field, s).change(t);
}

FlowDifferences flow_differences(const GridSet& grid, const FlowField& field,
                                 const Region& omega, double s, double t) {
  check_pullback(grid, field, omega, s, t);
  if (!(t > 0.0)) throw std::invalid_argument("flow step t must be positive");
  const PullbackEvaluator ev(grid, field, s);
  const double dp = ev.change(t), dm = ev.change(-t);
  const double hp = ev.change(0.5 * t), hm = ev.change(-0.5 * t);
  FlowDifferences d;
  d.t = t;
  d.second = (dp + dm) / (t * t);
  d.second_half = (hp + hm) / (0.25 * t * t);
  d.second_richardson = (4.0 * d.second_half - d.second) / 3.0;
  d.first = (dp - dm) / (2.0 * t);
  return d;
}

double second_difference(const GridSet& grid, const FlowField& field, const Region& omega,
                         double s, double t, bool richardson) {
  if (richardson) return flow_differences(grid, field, omega, s, t).second_richardson;
  check_pullback(grid, field, omega, s, t);
  if (!(t > 0.0)) throw std::invalid_argument("flow step t must be positive");
  const PullbackEvaluator ev(grid, field, s);
  return (ev.change(t) + ev.change(-t)) / (t * t);
}

double first_difference(const GridSet& grid, const FlowField& field, const Region& omega,
                        double s, double t) {
  check_pullback(grid, field, omega, s, t);
  if (!(t > 0.0)) throw std::invalid_argument("flow step t must be positive");
  const PullbackEvaluator ev(grid, field, s);
  return (ev.change(t) - ev.change(-t)) / (2.0 * t);
}

}  // namespace conelab
