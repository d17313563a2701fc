#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace conelab {

/// Running sum with Neumaier compensation.
class CompensatedSum {
public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) { add(v); return *this; }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Cached rule with n points, 1 <= n <= 64.
const GaussRule& gauss_legendre(int n);

/// n-point Gauss-Legendre approximation of the integral of f over [a, b].
template <class F>
double gauss(F&& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += r.w[i] * f(c + h * r.x[i]);
  return acc * h;
}

/// Gauss-Legendre over [a, b] for f analytic except at a point `sing` outside
/// [a, b]: the interval is cut into geometric panels no longer than their
/// distance to `sing`, so that a fixed order stays accurate.
template <class F>
double gauss_near(F&& f, double a, double b, double sing, int n) {
  if (b <= a) return 0.0;
  const bool left = sing <= a;
  double lo = a, hi = b;
  CompensatedSum acc;
  // Peel panels from the end closest to the singular point.
  for (int guard = 0; guard < 200; ++guard) {
    const double dist = left ? lo - sing : sing - hi;
    const double len = hi - lo;
    if (len <= dist || dist <= 0.0) {
      acc += gauss(f, lo, hi, n);
      break;
    }
    if (left) {
      acc += gauss(f, lo, lo + dist, n);
      lo += dist;
    } else {
      acc += gauss(f, hi - dist, hi, n);
      hi -= dist;
    }
  }
  return acc.value();
}

struct QuadOptions {
  double rel_tol = 1e-12;
  unsigned max_depth = 15;
};

/// Adaptive Gauss-Kronrod (7/15), bisecting until the error estimate is
/// below rel_tol times the L1 norm of f.
template <class F>
double integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, opt.max_depth, opt.rel_tol);
}

}  // namespace conelab
