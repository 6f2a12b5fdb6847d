#include "qsa/escape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qsa/csv.hpp"

namespace qsa {

GeneralizedEigenvector solve_zeta(const ModelSpec& spec, double x_star) {
  const VectorXd rho = qss_distribution(spec, x_star);
  const VectorXd v = spec.v(x_star);
  const MatrixXd at = spec.A(x_star).transpose();
  GeneralizedEigenvector out;
  out.solvability = rho.dot(v);
  const double scale = std::max(1.0, v.lpNorm<Eigen::Infinity>());
  if (std::abs(out.solvability) > 1e-10 * scale) {
    std::ostringstream os;
    os << "rho.v = " << out.solvability << " at x=" << x_star << " (not a fixed point)";
    throw Error(ErrorKind::SolvabilityViolated, os.str());
  }
  out.zeta = at.completeOrthogonalDecomposition().solve(v);
  out.residual = (at * out.zeta - v).lpNorm<Eigen::Infinity>();
  return out;
}

double boundary_factor_B(const ModelSpec& spec, double x_star, const VectorXd& zeta) {
  const VectorXd rho = qss_distribution(spec, x_star);
  return rho.dot(spec.b(x_star) - spec.v(x_star).cwiseProduct(zeta));
}

double variant_boundary_factor(Variant variant, const ModelSpec& spec, double x_star) {
  switch (variant) {
    case Variant::Discrete:
    case Variant::SemiContinuous:
      return boundary_factor_B(spec, x_star, solve_zeta(spec, x_star).zeta);
    case Variant::VelocityJump: {
      const VectorXd rho = qss_distribution(spec, x_star);
      return -rho.dot(spec.v(x_star).cwiseProduct(solve_zeta(spec, x_star).zeta));
    }
    case Variant::QssDiffusion:
      return qss_coefficients(spec, x_star).g();
    case Variant::AdiabaticBirthDeath:
      return spec.phi() * averaged_rates(spec, x_star).death;
  }
  return 0.0;
}

EscapeRateResult principal_eigenvalue(const PotentialPair& pair, const ModelSpec& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "epsilon must be positive for escape rates");
  const auto xs = pair.fixed_points.as_array();
  EscapeRateResult r;
  r.variant = pair.variant;
  r.epsilon = epsilon;
  r.curvature_star = curvature_at_fixed_point(pair.variant, spec, xs[1]);
  const double cm = curvature_at_fixed_point(pair.variant, spec, xs[0]);
  const double cp = curvature_at_fixed_point(pair.variant, spec, xs[2]);
  if (!(r.curvature_star < 0.0 && cm > 0.0 && cp > 0.0)) {
    std::ostringstream os;
    os << "curvatures (" << cm << ", " << r.curvature_star << ", " << cp << ") do not form a double well";
    throw Error(ErrorKind::WrongCurvatureSign, os.str());
  }
  r.B = variant_boundary_factor(pair.variant, spec, xs[1]);
  auto fill = [&](WellRate& w, int well, double c) {
    w.curvature_well = c;
    w.barrier = pair.barrier(well);
    w.psi_barrier = pair.psi_barrier(well);
    w.lambda = r.B / std::numbers::pi * std::sqrt(std::abs(r.curvature_star) * c) *
               std::exp(-w.psi_barrier - w.barrier / epsilon);
    w.T = 1.0 / w.lambda;
  };
  fill(r.minus, -1, cm);
  fill(r.plus, +1, cp);
  return r;
}

namespace {

// Eigenpairs of m2 z^2 + m1 z + m0 through the companion matrix (m2 invertible).
Eigen::ComplexEigenSolver<Eigen::MatrixXcd> quadratic_eigen(const MatrixXd& m2, const MatrixXd& m1, const MatrixXd& m0) {
  const int m = static_cast<int>(m0.rows());
  const auto lu = m2.partialPivLu();
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  c.topRightCorner(m, m).setIdentity();
  c.bottomLeftCorner(m, m) = (-lu.solve(m0)).cast<cplx>();
  c.bottomRightCorner(m, m) = (-lu.solve(m1)).cast<cplx>();
  return Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(c);
}

}  // namespace

BoundaryLayerModes boundary_layer_modes(Variant variant, const ModelSpec& spec, double x_star, double curvature_star) {
  if (variant != Variant::SemiContinuous && variant != Variant::Discrete)
    throw Error(ErrorKind::InvalidConfig, "boundary-layer modes exist for the semi-continuous and discrete variants");
  const int m = spec.states();
  const MatrixXd at = spec.A(x_star).transpose();
  const VectorXd wp = spec.w_plus(x_star);
  const VectorXd wm = spec.w_minus(x_star);
  const VectorXd v = spec.v(x_star);
  const VectorXd b = spec.b(x_star);
  const VectorXd rho = qss_distribution(spec, x_star);
  const bool discrete = variant == Variant::Discrete;

  MatrixXd m2, m1, m0;
  if (discrete) {
    m2 = wp.asDiagonal();
    m1 = spec.phi() * at;
    m1.diagonal() -= wp + wm;
    m0 = wm.asDiagonal();
  } else {
    m2 = b.asDiagonal();
    m1 = -MatrixXd(v.asDiagonal());
    m0 = at;
  }
  const auto es = quadratic_eigen(m2, m1, m0);
  const cplx trivial = discrete ? cplx(1.0, 0.0) : cplx(0.0, 0.0);

  BoundaryLayerModes out;
  out.variant = variant;
  std::vector<int> order(2 * m);
  for (int i = 0; i < 2 * m; ++i) {
    order[i] = i;
    out.eigenvalues.push_back(es.eigenvalues()(i));
  }
  std::sort(order.begin(), order.end(), [&](int a, int c) {
    return std::abs(es.eigenvalues()(a) - trivial) < std::abs(es.eigenvalues()(c) - trivial);
  });
  out.degenerate = {es.eigenvalues()(order[0]), es.eigenvalues()(order[1])};
  if (std::abs(out.degenerate.second - trivial) > 1e-6) {
    std::ostringstream os;
    os << "no degenerate trivial pair at x*=" << x_star << " (closest " << std::abs(out.degenerate.second - trivial) << ")";
    throw Error(ErrorKind::ModeCountMismatch, os.str());
  }
  std::vector<int> kept;
  for (int k = 2; k < 2 * m; ++k) {
    const cplx z = es.eigenvalues()(order[k]);
    if (std::abs(z.imag()) > 1e-10 * std::max(1.0, std::abs(z))) continue;
    const bool decaying = discrete ? std::abs(z) < 1.0 : z.real() > 0.0;
    if (decaying) kept.push_back(order[k]);
  }
  if (static_cast<int>(kept.size()) != m - 1) {
    std::ostringstream os;
    os << kept.size() << " decaying boundary-layer modes, expected " << m - 1;
    throw Error(ErrorKind::ModeCountMismatch, os.str());
  }
  out.vectors.resize(m, m - 1);
  for (int j = 0; j < m - 1; ++j) {
    out.rates.push_back(es.eigenvalues()(kept[j]).real());
    VectorXd y = es.eigenvectors().col(kept[j]).head(m).real();
    const Eigen::Index imax = [&] {
      Eigen::Index i;
      y.cwiseAbs().maxCoeff(&i);
      return i;
    }();
    y /= y(imax);
    out.vectors.col(j) = y;
  }

  out.zeta = solve_zeta(spec, x_star).zeta;
  const double c0 = std::sqrt(2.0 * std::abs(curvature_star) / std::numbers::pi);
  MatrixXd basis(m, m);
  basis.col(0).setOnes();
  basis.rightCols(m - 1) = out.vectors;
  out.coefficients = basis.fullPivLu().solve(c0 * out.zeta);

  double sum = 0.0;
  if (discrete) {
    for (int j = 0; j < m - 1; ++j) {
      const double mu = out.rates[j];
      const VectorXd g = out.vectors.col(j);
      sum += out.coefficients(j + 1) / mu * rho.dot((mu * mu * wp - wm).cwiseProduct(g));
    }
    out.B = rho.dot(b - 0.5 * v.cwiseProduct(out.zeta)) + sum / (2.0 * c0);
  } else {
    for (int j = 0; j < m - 1; ++j)
      sum += out.coefficients(j + 1) * out.rates[j] * rho.dot(b.cwiseProduct(out.vectors.col(j)));
    out.B = rho.dot(b) - std::sqrt(std::numbers::pi / (2.0 * std::abs(curvature_star))) * sum;
  }
  return out;
}

std::pair<double, double> metastable_weights(double lambda_minus, double lambda_plus, double t, bool start_left) {
  if (lambda_minus < 0.0 || lambda_plus < 0.0) throw Error(ErrorKind::InvalidConfig, "rates must be nonnegative");
  const double q0 = start_left ? 1.0 : 0.0;
  const double total = lambda_minus + lambda_plus;
  double q_minus = q0;
  if (total > 0.0) {
    const double eq = lambda_plus / total;
    q_minus = eq + (q0 - eq) * std::exp(-total * t);
  }
  return {q_minus, 1.0 - q_minus};
}

void write_escape_csv(const std::string& path, const std::vector<EscapeRow>& rows) {
  CsvWriter csv(path, "escape",
                {"variant", "well", "epsilon", "phi", "beta", "sigma", "barrier", "B", "curvature_star",
                 "curvature_well", "lambda", "T"});
  for (const EscapeRow& row : rows) {
    for (int well : {-1, 1}) {
      const WellRate& w = row.result.well(well);
      csv.row_fields({std::string(to_string(row.result.variant)), well < 0 ? "left" : "right",
                      format_number(row.result.epsilon), format_number(row.phi), format_number(row.beta),
                      format_number(row.sigma), format_number(w.barrier), format_number(row.result.B),
                      format_number(row.result.curvature_star), format_number(w.curvature_well),
                      format_number(w.lambda), format_number(w.T)});
    }
  }
}

}  // namespace qsa
