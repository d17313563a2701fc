#include "conelab/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace conelab {

namespace {

void check_sigma(double sigma, const char* who) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::domain_error(std::string(who) + ": sigma must lie in (0, 1)");
}

void check_n(int n, const char* who) {
  if (n < 1) throw std::domain_error(std::string(who) + ": n must be positive");
}

}  // namespace

double gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma: argument must be positive");
  if (x > 170.0) throw std::overflow_error("gamma: argument above 170 overflows");
  return std::tgamma(x);
}

double hardy_H(int n, double sigma) {
  check_n(n, "hardy_H");
  check_sigma(sigma, "hardy_H");
  const double d = sigma - 0.5 * n;
  const double ratio = gamma(0.25 * n + 0.5 * sigma) / gamma(0.25 * n - 0.5 * sigma + 1.0);
  return std::exp2(2.0 * sigma - 1.0) * d * d * ratio * ratio;
}

double hardy_c(int n, double sigma) {
  check_n(n, "hardy_c");
  check_sigma(sigma, "hardy_c");
  return std::exp2(2.0 * sigma - 1.0) * std::pow(std::numbers::pi, -0.5 * n) *
         gamma(0.5 * n + sigma) / gamma(2.0 - sigma) * sigma * (1.0 - sigma);
}

double hardy_ratio(double s) {
  if (!(s > 0.0 && s < 0.5)) throw std::domain_error("hardy_ratio: s must lie in (0, 1/2)");
  const double sigma = 0.5 * (1.0 + s);
  return hardy_H(1, sigma) / hardy_c(1, sigma);
}

HardyConstants hardy_constants(int n, double sigma) {
  return {n, sigma, hardy_H(n, sigma), hardy_c(n, sigma)};
}

}  // namespace conelab
