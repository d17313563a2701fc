#pragma once

#include <Eigen/Core>
#include <vector>

namespace conelab {

/// Continuous piecewise-linear profile on (0, ∞) with compact support
/// [knots.front(), knots.back()], knots.front() > 0.
class RadialTestFunction {
public:
  RadialTestFunction(std::vector<double> knots, std::vector<double> values);

  /// Hat with peak `peak` at b, vanishing outside (a, c).
  static RadialTestFunction hat(double a, double b, double c, double peak = 1.0);

  double operator()(double r) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  int segments() const { return static_cast<int>(knots_.size()) - 1; }

  /// r ↦ ξ(r/λ).
  RadialTestFunction dilated(double lambda) const;

private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// I(s,θ) = ∫₀^∞ (1 + t² - 2t cos θ)^{-(2+s)/2} dt for s in [0, 1), θ in (0, 2π).
/// Throws std::domain_error at θ = 0 or 2π (non-integrable kernel).
double angular_integral(double s, double theta);

/// Coefficient of |x|^{-(1+s)} in ∫_{Σ_i} |x - y|^{-(2+s)} dσ(y) for x on a
/// ray at angle θ from Σ_i. Equal to I(s,θ).
double ray_potential_coefficient(double s, double theta);

/// B(ξ) = ∫₀^∞ ξ(x)² x^{-(1+s)} dx.
double potential_energy(const RadialTestFunction& xi, double s);

/// A(ξ) = ∬_{(0,∞)²} |ξ(x) - ξ(y)|² |x - y|^{-(2+s)} dx dy.
double sobolev_diag_energy(const RadialTestFunction& xi, double s);

/// ∬_{(0,∞)²} |ξ_a(x) - ξ_b(y)|² (x² + y² - 2xy cos θ)^{-(2+s)/2} dx dy,
/// i.e. the interaction of profiles carried by two rays at angle θ.
double sobolev_cross_energy(const RadialTestFunction& xi_a, const RadialTestFunction& xi_b,
                            double theta, double s);

/// C_θ(ξ_a, ξ_b) = ∬ ξ_a(x) ξ_b(y) (x² + y² - 2xy cos θ)^{-(2+s)/2} dx dy.
double cross_coupling(const RadialTestFunction& xi_a, const RadialTestFunction& xi_b,
                      double theta, double s);

/// Matrices in the hat basis of a knot grid. The basis functions are the
/// hats at the interior knots, so the dimension is knots.size() - 2.
Eigen::MatrixXd potential_matrix(const std::vector<double>& knots, double s);
Eigen::MatrixXd sobolev_diag_matrix(const std::vector<double>& knots, double s);
Eigen::MatrixXd cross_coupling_matrix(const std::vector<double>& knots, double theta, double s);

/// Knots r_min * (r_max/r_min)^{k/(count+1)}, k = 0..count+1: the grid
/// carrying `count` log-uniform hats.
std::vector<double> log_uniform_knots(double r_min, double r_max, int count);

}  // namespace conelab
