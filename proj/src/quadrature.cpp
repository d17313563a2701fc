#include "conelab/quadrature.hpp"

#include <array>
#include <mutex>

namespace conelab {

namespace {

GaussRule build_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  const long double pi = 3.141592653589793238462643383279503L;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      const long double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-19L) break;
    }
    long double p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    const long double w = 2 / ((1 - z * z) * dp * dp);
    r.x[i] = static_cast<double>(-z);
    r.x[n - 1 - i] = static_cast<double>(z);
    r.w[i] = r.w[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::array<GaussRule, 65> rules;
  static std::once_flag flag;
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: order must be in [1, 64]");
  std::call_once(flag, [] {
    for (int k = 1; k <= 64; ++k) rules[k] = build_rule(k);
  });
  return rules[n];
}

}  // namespace conelab
