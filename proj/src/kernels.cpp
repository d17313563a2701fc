#include "conelab/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "conelab/parallel.hpp"
#include "conelab/quadrature.hpp"

namespace conelab {

namespace {

constexpr double pi = std::numbers::pi;

void check_s(double s, const char* who) {
  if (!(s >= 0.0 && s < 1.0)) throw std::domain_error(std::string(who) + ": s must lie in [0, 1)");
}

void check_theta(double theta, const char* who) {
  if (!(theta > 0.0 && theta < 2.0 * pi))
    throw std::domain_error(std::string(who) + ": theta must lie strictly between 0 and 2pi");
}

void check_knots(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("knots: need at least two knots");
  if (!(x.front() > 0.0) || !std::isfinite(x.back()))
    throw std::invalid_argument("knots: support must be bounded away from 0 and infinity");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("knots: must be strictly increasing");
}

/// ∫₀^c sin^s(u) du for c in [0, π/2], through u = c·w^{1/(1+s)}.
double sine_power_integral(double s, double c) {
  if (c == 0.0) return 0.0;
  const double e = 1.0 / (1.0 + s);
  auto f = [&](double w) {
    const double u = c * std::pow(w, e);
    return u == 0.0 ? 1.0 : std::pow(std::sin(u) / u, s);
  };
  const double k = integrate(f, 0.0, 1.0);
  return std::pow(c, 1.0 + s) / (1.0 + s) * k;
}

// ---------------------------------------------------------------------------
// Panel-pair quadrature for kernels analytic away from a known set.

int order_for(double ratio) {
  if (ratio < 2.0) return 10;
  if (ratio < 4.0) return 8;
  if (ratio < 8.0) return 6;
  if (ratio < 16.0) return 5;
  if (ratio < 40.0) return 4;
  return 3;
}

/// Tensor Gauss rule over [a,b]x[c,d]; panels are split until their size is
/// below the distance `dist(a,b,c,d)` to the kernel's singular set.
template <class Kernel, class Dist, class Acc>
void panel_pair(double a, double b, double c, double d, const Kernel& kernel, const Dist& dist,
                Acc& acc, int depth = 0) {
  const double hx = b - a, hy = d - c;
  const double h = std::max(hx, hy);
  const double r = dist(a, b, c, d);
  if (h > r && depth < 60) {
    if (hx >= hy) {
      const double m = 0.5 * (a + b);
      panel_pair(a, m, c, d, kernel, dist, acc, depth + 1);
      panel_pair(m, b, c, d, kernel, dist, acc, depth + 1);
    } else {
      const double m = 0.5 * (c + d);
      panel_pair(a, b, c, m, kernel, dist, acc, depth + 1);
      panel_pair(a, b, m, d, kernel, dist, acc, depth + 1);
    }
    return;
  }
  const GaussRule& g = gauss_legendre(order_for(r / h));
  const int n = static_cast<int>(g.x.size());
  const double cx = 0.5 * (a + b), rx = 0.5 * hx, cy = 0.5 * (c + d), ry = 0.5 * hy;
  for (int i = 0; i < n; ++i) {
    const double x = cx + rx * g.x[i];
    const double wx = g.w[i] * rx;
    for (int j = 0; j < n; ++j) {
      const double y = cy + ry * g.x[j];
      acc(x, y, wx * g.w[j] * ry * kernel(x, y));
    }
  }
}

struct DiagKernel {
  double p;
  double operator()(double x, double y) const { return std::pow(std::abs(x - y), -p); }
};

struct GapDist {
  double operator()(double a, double b, double c, double d) const {
    return std::max({c - b, a - d, 0.0});
  }
};

struct CrossKernel {
  double p;
  double q;  // 4 sin²(θ/2) = 2(1 - cos θ)
  double operator()(double x, double y) const {
    const double z = x - y;
    return std::pow(z * z + q * x * y, -0.5 * p);
  }
};

struct CrossDist {
  double q;
  double operator()(double a, double b, double c, double d) const {
    const double gap = std::max({c - b, a - d, 0.0});
    return std::sqrt(gap * gap + q * a * c);
  }
};

// ---------------------------------------------------------------------------
// Local element matrices over nodes; non-dof entries are ignored by callers.

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

struct Elements {
  const std::vector<double>& x;
  int count() const { return static_cast<int>(x.size()) - 1; }
  double h(int e) const { return x[e + 1] - x[e]; }
};

/// ∬_{T×T} (φ_n(x)-φ_n(y))(φ_m(x)-φ_m(y)) |x-y|^{-2-s}.
Mat2 self_block(double h, double s) {
  const double k = 2.0 * std::pow(h, 2.0 - s) / ((1.0 - s) * (2.0 - s)) / (h * h);
  Mat2 m;
  m << k, -k, -k, k;
  return m;
}

/// Touching elements T_e = [a-h1, a], T_f = [a, a+h2]; nodes (a-h1, a, a+h2).
Mat3 touching_block(double h1, double h2, double s) {
  const double p = 2.0 + s;
  double m1[3], m2[3];
  for (int k = 0; k < 3; ++k) {
    m1[k] = gauss_near([&](double w) { return std::pow(w, k) * std::pow(h1 + h2 * w, -p); },
                       0.0, 1.0, -h1 / h2, 12);
    m2[k] = gauss_near([&](double w) { return std::pow(w, k) * std::pow(h1 * w + h2, -p); },
                       0.0, 1.0, -h2 / h1, 12);
  }
  const double alpha[3] = {-1.0 / h1, 1.0 / h1, 0.0};
  const double beta[3] = {0.0, -1.0 / h2, 1.0 / h2};
  const double f = h1 * h2 / (2.0 - s);
  Mat3 out;
  for (int n = 0; n < 3; ++n)
    for (int m = 0; m < 3; ++m) {
      const double aa = alpha[n] * alpha[m], ab = alpha[n] * beta[m] + beta[n] * alpha[m],
                   bb = beta[n] * beta[m];
      const double t1 = aa * h1 * h1 * m1[0] + ab * h1 * h2 * m1[1] + bb * h2 * h2 * m1[2];
      const double t2 = aa * h1 * h1 * m2[2] + ab * h1 * h2 * m2[1] + bb * h2 * h2 * m2[0];
      out(n, m) = f * (t1 + t2);
    }
  return out;
}

/// ∫_{T_e} φ_n φ_m g(x) dx with g(x) = ∫_{(0,x_0)∪(x_M,∞)} |x-y|^{-2-s} dy.
/// Entries that pair a singular endpoint with its own (zero) extreme node are
/// left at 0; they never meet a nonzero coefficient.
Mat2 exterior_block(const Elements& el, int e, double s) {
  const int M = el.count();
  const double x0 = el.x.front(), xM = el.x.back();
  const double a = el.x[e], b = el.x[e + 1], h = b - a;
  const double e1 = -1.0 - s;
  auto shape = [&](double x, int n) { return n == 0 ? (b - x) / h : (x - a) / h; };
  Mat2 out = Mat2::Zero();
  for (int n = 0; n < 2; ++n)
    for (int m = n; m < 2; ++m) {
      double v = 0.0;
      if (e == 0) {
        // (x-x0)^{-1-s}: exact on the node-1 entry; -x^{-1-s} is smooth.
        if (n == 1 && m == 1) v += std::pow(h, -s) / (2.0 - s);
        v -= gauss_near([&](double x) { return shape(x, n) * shape(x, m) * std::pow(x, e1); },
                        a, b, 0.0, 12);
      } else {
        v += gauss_near(
            [&](double x) {
              return shape(x, n) * shape(x, m) * std::pow(x, e1) *
                     std::expm1(e1 * std::log1p(-x0 / x));
            },
            a, b, x0, 12);
      }
      if (e == M - 1) {
        if (n == 0 && m == 0) v += std::pow(h, -s) / (2.0 - s);
      } else {
        v += gauss_near(
            [&](double x) { return shape(x, n) * shape(x, m) * std::pow(xM - x, e1); }, a, b,
            xM, 12);
      }
      out(n, m) = out(m, n) = v / (1.0 + s);
    }
  return out;
}

/// ∫_{T_e} φ_n φ_m x^{-1-s} dx.
Mat2 potential_block(double a, double b, double s) {
  const double h = b - a;
  Mat2 out;
  for (int n = 0; n < 2; ++n)
    for (int m = n; m < 2; ++m) {
      auto f = [&](double x) {
        const double pn = n == 0 ? (b - x) / h : (x - a) / h;
        const double pm = m == 0 ? (b - x) / h : (x - a) / h;
        return pn * pm * std::pow(x, -1.0 - s);
      };
      out(n, m) = out(m, n) = gauss_near(f, a, b, 0.0, 12);
    }
  return out;
}

double sum_in_order(const std::vector<double>& parts) {
  CompensatedSum acc;
  for (double v : parts) acc += v;
  return acc.value();
}

// Triplet collection for deterministic matrix assembly.
struct Entry {
  int i, j;
  double v;
};

Eigen::MatrixXd gather(int dim, const std::vector<std::vector<Entry>>& parts) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& part : parts)
    for (const Entry& t : part) m(t.i, t.j) += t.v;
  return m;
}

/// Dof of node k (interior nodes only), or -1.
int dof_of(int k, int nodes) { return (k <= 0 || k >= nodes - 1) ? -1 : k - 1; }

template <int N>
void scatter(std::vector<Entry>& out, const int (&nodes)[N], const Eigen::Matrix<double, N, N>& m,
             int node_count, double factor) {
  for (int a = 0; a < N; ++a) {
    const int i = dof_of(nodes[a], node_count);
    if (i < 0) continue;
    for (int b = 0; b < N; ++b) {
      const int j = dof_of(nodes[b], node_count);
      if (j < 0) continue;
      out.push_back({i, j, factor * m(a, b)});
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

RadialTestFunction::RadialTestFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  check_knots(knots_);
  if (values_.size() != knots_.size())
    throw std::invalid_argument("values: one value per knot required");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("values: must be finite");
  if (values_.front() != 0.0 || values_.back() != 0.0)
    throw std::invalid_argument("values: must vanish at the extreme knots");
}

RadialTestFunction RadialTestFunction::hat(double a, double b, double c, double peak) {
  return {{a, b, c}, {0.0, peak, 0.0}};
}

double RadialTestFunction::operator()(double r) const {
  if (!(r > knots_.front() && r < knots_.back())) return 0.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double t = (r - knots_[k]) / (knots_[k + 1] - knots_[k]);
  return (1.0 - t) * values_[k] + t * values_[k + 1];
}

RadialTestFunction RadialTestFunction::dilated(double lambda) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  std::vector<double> k(knots_);
  for (double& v : k) v *= lambda;
  return {std::move(k), values_};
}

double angular_integral(double s, double theta) {
  check_s(s, "angular_integral");
  check_theta(theta, "angular_integral");
  if (theta > pi) theta = 2.0 * pi - theta;
  const double b = pi - theta;
  // I = ∫₀^b sin^s(u) du / sin^{1+s}(b).
  if (b <= 0.5 * pi) {
    if (b == 0.0) return 1.0 / (1.0 + s);
    const double e = 1.0 / (1.0 + s);
    auto f = [&](double w) {
      const double u = b * std::pow(w, e);
      return u == 0.0 ? 1.0 : std::pow(std::sin(u) / u, s);
    };
    const double k = integrate(f, 0.0, 1.0);
    return std::pow(b / std::sin(b), 1.0 + s) / (1.0 + s) * k;
  }
  const double j = 2.0 * sine_power_integral(s, 0.5 * pi) - sine_power_integral(s, theta);
  return j / std::pow(std::sin(theta), 1.0 + s);
}

double ray_potential_coefficient(double s, double theta) { return angular_integral(s, theta); }

double potential_energy(const RadialTestFunction& xi, double s) {
  check_s(s, "potential_energy");
  const auto& x = xi.knots();
  const auto& v = xi.values();
  const int M = xi.segments();
  std::vector<double> parts(M);
  parallel_for(M, [&](std::size_t e) {
    const Mat2 m = potential_block(x[e], x[e + 1], s);
    const Eigen::Vector2d c(v[e], v[e + 1]);
    parts[e] = c.dot(m * c);
  });
  return sum_in_order(parts);
}

double sobolev_diag_energy(const RadialTestFunction& xi, double s) {
  check_s(s, "sobolev_diag_energy");
  const auto& x = xi.knots();
  const auto& v = xi.values();
  const Elements el{x};
  const int M = el.count();
  const DiagKernel kernel{2.0 + s};
  const GapDist dist;
  std::vector<double> parts(M);
  parallel_for(M, [&](std::size_t ue) {
    const int e = static_cast<int>(ue);
    CompensatedSum acc;
    const Eigen::Vector2d ce(v[e], v[e + 1]);
    acc += ce.dot(self_block(el.h(e), s) * ce);
    acc += 2.0 * ce.dot(exterior_block(el, e, s) * ce);
    if (e + 1 < M) {
      const Eigen::Vector3d c3(v[e], v[e + 1], v[e + 2]);
      acc += 2.0 * c3.dot(touching_block(el.h(e), el.h(e + 1), s) * c3);
    }
    const double a = x[e], b = x[e + 1], ha = b - a;
    for (int f = e + 2; f < M; ++f) {
      const double c = x[f], d = x[f + 1], hb = d - c;
      double sum = 0.0;
      auto pair_acc = [&](double px, double py, double w) {
        const double fx = v[e] + (v[e + 1] - v[e]) * (px - a) / ha;
        const double fy = v[f] + (v[f + 1] - v[f]) * (py - c) / hb;
        sum += w * (fx - fy) * (fx - fy);
      };
      panel_pair(a, b, c, d, kernel, dist, pair_acc);
      acc += 2.0 * sum;
    }
    parts[e] = acc.value();
  });
  return sum_in_order(parts);
}

double cross_coupling(const RadialTestFunction& xi_a, const RadialTestFunction& xi_b,
                      double theta, double s) {
  check_s(s, "cross_coupling");
  check_theta(theta, "cross_coupling");
  const double q = 4.0 * std::pow(std::sin(0.5 * theta), 2);
  const CrossKernel kernel{2.0 + s, q};
  const CrossDist dist{q};
  const auto& xa = xi_a.knots();
  const auto& va = xi_a.values();
  const auto& xb = xi_b.knots();
  const auto& vb = xi_b.values();
  const int Ma = xi_a.segments(), Mb = xi_b.segments();
  std::vector<double> parts(Ma);
  parallel_for(Ma, [&](std::size_t ue) {
    const int e = static_cast<int>(ue);
    const double a = xa[e], b = xa[e + 1], ha = b - a;
    CompensatedSum acc;
    if (va[e] == 0.0 && va[e + 1] == 0.0) {
      parts[e] = 0.0;
      return;
    }
    for (int f = 0; f < Mb; ++f) {
      if (vb[f] == 0.0 && vb[f + 1] == 0.0) continue;
      const double c = xb[f], d = xb[f + 1], hb = d - c;
      double sum = 0.0;
      auto pair_acc = [&](double px, double py, double w) {
        const double fx = va[e] + (va[e + 1] - va[e]) * (px - a) / ha;
        const double fy = vb[f] + (vb[f + 1] - vb[f]) * (py - c) / hb;
        sum += w * fx * fy;
      };
      panel_pair(a, b, c, d, kernel, dist, pair_acc);
      acc += sum;
    }
    parts[e] = acc.value();
  });
  return sum_in_order(parts);
}

double sobolev_cross_energy(const RadialTestFunction& xi_a, const RadialTestFunction& xi_b,
                            double theta, double s) {
  check_theta(theta, "sobolev_cross_energy");
  const double I = angular_integral(s, theta);
  return I * (potential_energy(xi_a, s) + potential_energy(xi_b, s)) -
         2.0 * cross_coupling(xi_a, xi_b, theta, s);
}

Eigen::MatrixXd potential_matrix(const std::vector<double>& knots, double s) {
  check_knots(knots);
  check_s(s, "potential_matrix");
  const int nodes = static_cast<int>(knots.size());
  const int M = nodes - 1;
  std::vector<std::vector<Entry>> parts(M);
  parallel_for(M, [&](std::size_t e) {
    const int nd[2] = {static_cast<int>(e), static_cast<int>(e) + 1};
    scatter<2>(parts[e], nd, potential_block(knots[e], knots[e + 1], s), nodes, 1.0);
  });
  return gather(std::max(nodes - 2, 0), parts);
}

Eigen::MatrixXd sobolev_diag_matrix(const std::vector<double>& knots, double s) {
  check_knots(knots);
  check_s(s, "sobolev_diag_matrix");
  const Elements el{knots};
  const int nodes = static_cast<int>(knots.size());
  const int M = el.count();
  const DiagKernel kernel{2.0 + s};
  const GapDist dist;
  std::vector<std::vector<Entry>> parts(M);
  parallel_for(M, [&](std::size_t ue) {
    const int e = static_cast<int>(ue);
    auto& out = parts[e];
    const int n2[2] = {e, e + 1};
    scatter<2>(out, n2, self_block(el.h(e), s), nodes, 1.0);
    scatter<2>(out, n2, exterior_block(el, e, s), nodes, 2.0);
    if (e + 1 < M) {
      const int n3[3] = {e, e + 1, e + 2};
      scatter<3>(out, n3, touching_block(el.h(e), el.h(e + 1), s), nodes, 2.0);
    }
    const double a = knots[e], b = knots[e + 1], ha = b - a;
    for (int f = e + 2; f < M; ++f) {
      const double c = knots[f], d = knots[f + 1], hb = d - c;
      Mat4 local = Mat4::Zero();
      auto pair_acc = [&](double px, double py, double w) {
        const double tx = (px - a) / ha, ty = (py - c) / hb;
        const Eigen::Vector4d dv(1.0 - tx, tx, -(1.0 - ty), -ty);
        local.noalias() += w * dv * dv.transpose();
      };
      panel_pair(a, b, c, d, kernel, dist, pair_acc);
      const int n4[4] = {e, e + 1, f, f + 1};
      scatter<4>(out, n4, local, nodes, 2.0);
    }
  });
  Eigen::MatrixXd m = gather(std::max(nodes - 2, 0), parts);
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd cross_coupling_matrix(const std::vector<double>& knots, double theta, double s) {
  check_knots(knots);
  check_s(s, "cross_coupling_matrix");
  check_theta(theta, "cross_coupling_matrix");
  const double q = 4.0 * std::pow(std::sin(0.5 * theta), 2);
  const CrossKernel kernel{2.0 + s, q};
  const CrossDist dist{q};
  const int nodes = static_cast<int>(knots.size());
  const int M = nodes - 1;
  const int dim = std::max(nodes - 2, 0);
  std::vector<std::vector<Entry>> parts(M);
  parallel_for(M, [&](std::size_t ue) {
    const int e = static_cast<int>(ue);
    auto& out = parts[e];
    const double a = knots[e], b = knots[e + 1], ha = b - a;
    for (int f = e; f < M; ++f) {
      const double c = knots[f], d = knots[f + 1], hb = d - c;
      Mat2 local = Mat2::Zero();
      auto pair_acc = [&](double px, double py, double w) {
        const double tx = (px - a) / ha, ty = (py - c) / hb;
        const Eigen::Vector2d u(1.0 - tx, tx), v(1.0 - ty, ty);
        local.noalias() += w * u * v.transpose();
      };
      panel_pair(a, b, c, d, kernel, dist, pair_acc);
      for (int i = 0; i < 2; ++i) {
        const int di = dof_of(e + i, nodes);
        if (di < 0) continue;
        for (int j = 0; j < 2; ++j) {
          const int dj = dof_of(f + j, nodes);
          if (dj < 0) continue;
          out.push_back({di, dj, local(i, j)});
          if (f != e) out.push_back({dj, di, local(i, j)});
        }
      }
    }
  });
  Eigen::MatrixXd m = gather(dim, parts);
  return 0.5 * (m + m.transpose());
}

std::vector<double> log_uniform_knots(double r_min, double r_max, int count) {
  if (!(r_min > 0.0 && r_max > r_min && std::isfinite(r_max)))
    throw std::invalid_argument("basis: need 0 < r_min < r_max");
  if (count < 1) throw std::invalid_argument("basis: hat count must be >= 1");
  std::vector<double> k(count + 2);
  const double span = std::log(r_max / r_min);
  for (int i = 0; i <= count + 1; ++i) k[i] = r_min * std::exp(span * i / (count + 1));
  k.front() = r_min;
  k.back() = r_max;
  return k;
}

}  // namespace conelab
