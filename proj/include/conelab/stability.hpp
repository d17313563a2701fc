#pragma once

#include <Eigen/Core>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/kernels.hpp"

namespace conelab {

/// Discretized second variation on a cone boundary for per-ray radial
/// profiles. Unknowns are ordered ray by ray: coefficient k of ray i sits at
/// index i*basis + k.
///   vᵀSv  = Σ_i A(ξ_i) + Σ_{i≠j} ∬ |ξ_i(x) - ξ_j(y)|² K_{θ_ij}(x, y)
///   vᵀPv  = Σ_i B(ξ_i) Σ_{j≠i} |ν_i - ν_j|² I(s, θ_ij)
///   vᵀMv  = Σ_i B(ξ_i)
struct QuadraticForm {
  int rays = 0;
  int basis = 0;
  double s = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  Eigen::MatrixXd S;
  Eigen::MatrixXd P;
  Eigen::MatrixXd M;

  int dimension() const { return rays * basis; }
};

enum class Verdict { stable_numerically, unstable };

struct StabilityReport {
  double s = 0.0;
  double min_rayleigh = 0.0;
  Eigen::VectorXd minimizer;  // M-normalized
  Verdict verdict = Verdict::stable_numerically;
  int basis_size = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  double tolerance = 1e-8;
  int negative_count = 0;  // eigenvalues below -tolerance
};

/// Log-uniform hats on [r_min, r_max].
struct BasisSpec {
  double r_min = 1e-3;
  double r_max = 1e3;
  int hats_per_ray = 64;
};

inline constexpr double instability_tolerance = 1e-8;

std::vector<RadialTestFunction> hat_basis(const BasisSpec& spec);

/// All basis functions must live on one knot grid.
QuadraticForm assemble_form(const PlanarCone& cone, const std::vector<RadialTestFunction>& basis,
                            double s);
QuadraticForm assemble_form(const PlanarCone& cone, const BasisSpec& spec, double s);

/// Smallest λ of (S - P)v = λMv via the Cholesky factor of M.
StabilityReport min_rayleigh(const QuadraticForm& form);

/// Σ_{i≠j} (|ν_i - ν_j|²/2) / (1 - cos θ_i^j)^{1+s}.
double interaction_sum(const PlanarCone& cone, int j, double s);

/// ξ(x) = x^{s/2} η(log x / L) with the trapezoid η (1 on [-½, ½], 0 outside
/// (-1, 1)), on a log-uniform grid with 32 knots per unit of log x.
RadialTestFunction saturating_family(double s, double cutoff_scale);

std::vector<StabilityReport> scan_instability(const PlanarCone& cone,
                                              const std::vector<double>& s_values,
                                              const BasisSpec& spec);

}  // namespace conelab
