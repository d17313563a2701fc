#pragma once

namespace conelab {

/// Gamma function on the positive axis.
/// Throws std::domain_error for x <= 0 and std::overflow_error for x > 170.
double gamma(double x);

/// Sharp constant in the fractional Hardy inequality on R^n,
///   2^{2σ-1} (σ - n/2)^2 Γ(n/4 + σ/2)^2 / Γ(n/4 - σ/2 + 1)^2.
double hardy_H(int n, double sigma);

/// Normalization constant of the H^σ seminorm,
///   2^{2σ-1} π^{-n/2} Γ(n/2 + σ) / Γ(2 - σ) · σ(1 - σ).
double hardy_c(int n, double sigma);

/// hardy_H(1, σ) / hardy_c(1, σ) at σ = (1 + s)/2, for s in (0, 1/2).
/// Behaves like π²s²/2 as s -> 0.
double hardy_ratio(double s);

struct HardyConstants {
  int n;
  double sigma;
  double H;
  double c;
};

HardyConstants hardy_constants(int n, double sigma);

}  // namespace conelab
