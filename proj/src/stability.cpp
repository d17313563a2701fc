#include "conelab/stability.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace conelab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// Interior knot values of each basis function, one column per function.
Eigen::MatrixXd coefficient_matrix(const std::vector<RadialTestFunction>& basis) {
  if (basis.empty()) throw std::invalid_argument("basis: must not be empty");
  const auto& knots = basis.front().knots();
  const int interior = static_cast<int>(knots.size()) - 2;
  if (interior < 1) throw std::invalid_argument("basis: knot grid has no interior knots");
  Eigen::MatrixXd V(interior, static_cast<int>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].knots() != knots)
      throw std::invalid_argument("basis: functions must share a common knot grid");
    for (int i = 0; i < interior; ++i) V(i, static_cast<int>(k)) = basis[k].values()[i + 1];
  }
  return V;
}

}  // namespace

std::vector<RadialTestFunction> hat_basis(const BasisSpec& spec) {
  const auto knots = log_uniform_knots(spec.r_min, spec.r_max, spec.hats_per_ray);
  std::vector<RadialTestFunction> out;
  out.reserve(spec.hats_per_ray);
  for (int k = 0; k < spec.hats_per_ray; ++k) {
    std::vector<double> v(knots.size(), 0.0);
    v[k + 1] = 1.0;
    out.emplace_back(knots, std::move(v));
  }
  return out;
}

QuadraticForm assemble_form(const PlanarCone& cone, const std::vector<RadialTestFunction>& basis,
                            double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("assemble_form: s must lie in (0, 1)");
  const Eigen::MatrixXd V = coefficient_matrix(basis);
  const auto& knots = basis.front().knots();
  const int nb = static_cast<int>(V.cols());
  const int nr = cone.ray_count();
  const Eigen::MatrixXd A = V.transpose() * sobolev_diag_matrix(knots, s) * V;
  const Eigen::MatrixXd B = V.transpose() * potential_matrix(knots, s) * V;

  // The coupling kernel depends on cos θ only, so θ and 2π - θ share a matrix.
  std::map<double, Eigen::MatrixXd> coupling;
  auto coupling_for = [&](double theta) -> const Eigen::MatrixXd& {
    const double key = std::min(theta, two_pi - theta);
    auto it = coupling.find(key);
    if (it == coupling.end())
      it = coupling.emplace(key, V.transpose() * cross_coupling_matrix(knots, key, s) * V).first;
    return it->second;
  };

  QuadraticForm f;
  f.rays = nr;
  f.basis = nb;
  f.s = s;
  f.r_min = knots.front();
  f.r_max = knots.back();
  const int dim = nr * nb;
  f.S = Eigen::MatrixXd::Zero(dim, dim);
  f.P = Eigen::MatrixXd::Zero(dim, dim);
  f.M = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 1; i <= nr; ++i) {
    double spring = 0.0, weight = 0.0;
    for (int j = 1; j <= nr; ++j) {
      if (j == i) continue;
      const double theta = pairwise_angle(cone, i, j);
      const double I = angular_integral(s, theta);
      spring += 2.0 * I;
      weight += normal_jump_squared(cone, i, j) * I;
      if (j > i) {
        const Eigen::MatrixXd& C = coupling_for(theta);
        f.S.block((i - 1) * nb, (j - 1) * nb, nb, nb) = -2.0 * C;
        f.S.block((j - 1) * nb, (i - 1) * nb, nb, nb) = -2.0 * C.transpose();
      }
    }
    const int o = (i - 1) * nb;
    f.S.block(o, o, nb, nb) = A + spring * B;
    f.P.block(o, o, nb, nb) = weight * B;
    f.M.block(o, o, nb, nb) = B;
  }
  f.S = 0.5 * (f.S + f.S.transpose()).eval();
  return f;
}

QuadraticForm assemble_form(const PlanarCone& cone, const BasisSpec& spec, double s) {
  return assemble_form(cone, hat_basis(spec), s);
}

StabilityReport min_rayleigh(const QuadraticForm& form) {
  const int dim = form.dimension();
  if (dim < 1) throw std::invalid_argument("min_rayleigh: empty form");
  Eigen::LLT<Eigen::MatrixXd> llt(form.M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("min_rayleigh: mass matrix is not positive definite (degenerate basis)");
  const Eigen::MatrixXd L = llt.matrixL();
  if (L.diagonal().minCoeff() <= 1e-13 * L.diagonal().maxCoeff())
    throw std::runtime_error("min_rayleigh: mass matrix is numerically singular (degenerate basis)");
  // Reduce to L^{-1} (S - P) L^{-T}.
  Eigen::MatrixXd K = form.S - form.P;
  K = llt.matrixL().solve(K);
  K = llt.matrixL().solve(K.transpose().eval());
  K = 0.5 * (K + K.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success) throw std::runtime_error("min_rayleigh: eigensolver failed");
  StabilityReport r;
  r.s = form.s;
  r.tolerance = instability_tolerance;
  r.min_rayleigh = eig.eigenvalues()(0);
  Eigen::VectorXd v = llt.matrixU().solve(eig.eigenvectors().col(0));
  Eigen::Index at;
  v.cwiseAbs().maxCoeff(&at);
  if (v(at) < 0.0) v = -v;
  r.minimizer = v;
  r.verdict = r.min_rayleigh < -r.tolerance ? Verdict::unstable : Verdict::stable_numerically;
  r.basis_size = form.basis;
  r.r_min = form.r_min;
  r.r_max = form.r_max;
  r.negative_count = static_cast<int>((eig.eigenvalues().array() < -r.tolerance).count());
  return r;
}

double interaction_sum(const PlanarCone& cone, int j, double s) {
  double acc = 0.0;
  for (int i = 1; i <= cone.ray_count(); ++i) {
    if (i == j) continue;
    const double theta = pairwise_angle(cone, i, j);
    const double d = 1.0 - std::cos(theta);
    if (!(d > 0.0)) throw std::domain_error("interaction_sum: degenerate angle between rays");
    acc += 0.5 * normal_jump_squared(cone, i, j) / std::pow(d, 1.0 + s);
  }
  if (j < 1 || j > cone.ray_count()) throw std::out_of_range("ray index out of range");
  return acc;
}

RadialTestFunction saturating_family(double s, double cutoff_scale) {
  if (!(s > 0.0 && s < 0.5)) throw std::domain_error("saturating_family: s must lie in (0, 1/2)");
  const double L = cutoff_scale;
  if (!(L > 1.0) || !std::isfinite(L))
    throw std::domain_error("saturating_family: cutoff scale must exceed 1");
  const int K = static_cast<int>(std::ceil(64.0 * L));
  std::vector<double> knots(K + 1), values(K + 1);
  for (int k = 0; k <= K; ++k) {
    const double u = -1.0 + 2.0 * k / K;  // log x / L
    const double eta = std::abs(u) <= 0.5 ? 1.0 : std::max(0.0, 2.0 * (1.0 - std::abs(u)));
    knots[k] = std::exp(L * u);
    values[k] = std::exp(0.5 * s * L * u) * eta;
  }
  values.front() = values.back() = 0.0;
  return {std::move(knots), std::move(values)};
}

std::vector<StabilityReport> scan_instability(const PlanarCone& cone,
                                              const std::vector<double>& s_values,
                                              const BasisSpec& spec) {
  const auto basis = hat_basis(spec);
  std::vector<StabilityReport> out;
  out.reserve(s_values.size());
  for (double s : s_values) out.push_back(min_rayleigh(assemble_form(cone, basis, s)));
  return out;
}

}  // namespace conelab
