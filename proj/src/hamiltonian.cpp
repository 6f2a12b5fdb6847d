#include "qsa/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsa {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Discrete: return "discrete";
    case Variant::SemiContinuous: return "semicontinuous";
    case Variant::QssDiffusion: return "qss";
    case Variant::VelocityJump: return "velocity_jump";
    case Variant::AdiabaticBirthDeath: return "adiabatic";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "discrete" || name == "disc") return Variant::Discrete;
  if (name == "semicontinuous" || name == "sc") return Variant::SemiContinuous;
  if (name == "qss" || name == "qss_diffusion") return Variant::QssDiffusion;
  if (name == "velocity_jump" || name == "qd" || name == "vj") return Variant::VelocityJump;
  if (name == "adiabatic" || name == "adiabatic_birth_death") return Variant::AdiabaticBirthDeath;
  throw Error(ErrorKind::InvalidConfig, "unknown variant '" + std::string(name) + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::Discrete, Variant::SemiContinuous, Variant::QssDiffusion, Variant::VelocityJump,
          Variant::AdiabaticBirthDeath};
}

bool is_matrix_variant(Variant v) {
  return v == Variant::Discrete || v == Variant::SemiContinuous || v == Variant::VelocityJump;
}

namespace {

void require_matrix_variant(Variant v) {
  if (!is_matrix_variant(v))
    throw Error(ErrorKind::InvalidConfig, "variant '" + std::string(to_string(v)) + "' has no h-function");
}

// h for one state given rates (generic scalar type for jets).
template <class T>
T h_of(Variant variant, double phi, const T& wp, const T& wm, const T& p) {
  switch (variant) {
    case Variant::Discrete:
      return (wm * (exp(-phi * p) - 1.0) + wp * (exp(phi * p) - 1.0)) / phi;
    case Variant::SemiContinuous:
      return p * (wp - wm) + p * p * (wp + wm) * (0.5 * phi);
    case Variant::VelocityJump:
      return p * (wp - wm);
    default:
      return T(0.0);
  }
}

double h_of(Variant variant, double phi, double wp, double wm, double p) {
  switch (variant) {
    case Variant::Discrete:
      return (wm * std::expm1(-phi * p) + wp * std::expm1(phi * p)) / phi;
    case Variant::SemiContinuous:
      return p * (wp - wm) + p * p * (wp + wm) * (0.5 * phi);
    case Variant::VelocityJump:
      return p * (wp - wm);
    default:
      return 0.0;
  }
}

Jet x_jet(const ModelSpec& spec, double x, int which, int s) {
  // which: 0 = W+, 1 = W-
  double d[4];
  for (int k = 0; k < 4; ++k) d[k] = (which == 0 ? spec.w_plus(x, k) : spec.w_minus(x, k))(s);
  return Jet::from_x_derivatives(d[0], d[1], d[2], d[3]);
}

Jet determinant(std::vector<std::vector<Jet>> m) {
  const int n = static_cast<int>(m.size());
  Jet det(1.0);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m[i][k].value()) > std::abs(m[piv][k].value())) piv = i;
    if (piv != k) {
      std::swap(m[piv], m[k]);
      det = -det;
    }
    if (m[k][k].value() == 0.0) {
      // Column with vanishing constant terms: Laplace expansion along it.
      Jet sum(0.0);
      for (int i = k; i < n; ++i) {
        std::vector<std::vector<Jet>> minor;
        for (int r = k; r < n; ++r) {
          if (r == i) continue;
          std::vector<Jet> row;
          for (int c = k + 1; c < n; ++c) row.push_back(m[r][c]);
          minor.push_back(row);
        }
        Jet term = m[i][k] * (minor.empty() ? Jet(1.0) : determinant(minor));
        if ((i - k) % 2 == 1) term = -term;
        sum += term;
      }
      return det * sum;
    }
    det = det * m[k][k];
    for (int i = k + 1; i < n; ++i) {
      const Jet f = m[i][k] / m[k][k];
      for (int j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return det;
}

// Closed forms for the built-in example.
template <class T>
T gs_rho1(const T& x, double beta) {
  return x * x / (x * x + beta);
}

template <class T>
void gs_qss(const T& x, const ModelParams& prm, T& a, T& mean_b, T& D) {
  const T r1 = gs_rho1(x, prm.beta);
  const T r0 = T(1.0) - r1;
  const T v0 = T(prm.sigma) - x;
  const T v1 = T(1.0) - x;
  a = r0 * v0 + r1 * v1;
  mean_b = (r0 * (T(prm.sigma) + x) + r1 * (T(1.0) + x)) * (0.5 * prm.phi);
  const T dv = v0 - v1;
  D = r0 * r1 * dv * dv / (x * x + prm.beta);
}

template <class T>
T gs_hamiltonian(Variant variant, const T& x, const T& p, const ModelParams& prm) {
  const T h0 = h_of<T>(variant, prm.phi, T(prm.sigma), x, p);
  const T h1 = h_of<T>(variant, prm.phi, T(1.0), x, p);
  // det([[h0 - x^2, beta], [x^2, h1 - beta]])
  return h0 * h1 - prm.beta * h0 - x * x * h1;
}

Jet scalar_jet(const std::function<double(double)>& f, double x) {
  return Jet::from_x_derivatives(f(x), richardson_derivative(f, x, 1), richardson_derivative(f, x, 2),
                                 richardson_derivative(f, x, 3));
}

}  // namespace

QssJets qss_jets(const ModelSpec& spec, double x) {
  QssJets out;
  if (spec.is_gene_switch()) {
    ModelParams prm = *spec.gene_switch_params();
    prm.phi = spec.phi();
    gs_qss(Jet::x_variable(x), prm, out.a, out.mean_b, out.D);
  } else {
    out.a = scalar_jet([&](double y) { return qss_coefficients(spec, y).a; }, x);
    out.mean_b = scalar_jet([&](double y) { return qss_coefficients(spec, y).mean_b; }, x);
    out.D = scalar_jet([&](double y) { return qss_coefficients(spec, y).D; }, x);
  }
  return out;
}

namespace {

Jet scalar_hamiltonian_jet(Variant variant, const ModelSpec& spec, double x, double p) {
  const Jet pj = Jet::p_variable(p);
  if (variant == Variant::QssDiffusion) {
    const QssJets q = qss_jets(spec, x);
    const Jet g = q.mean_b + q.D;
    return q.a * pj + g * pj * pj;
  }
  Jet birth, death;
  if (spec.is_gene_switch()) {
    const ModelParams& prm = *spec.gene_switch_params();
    const Jet xj = Jet::x_variable(x);
    const Jet r1 = gs_rho1(xj, prm.beta);
    birth = (Jet(1.0) - r1) * prm.sigma + r1;
    death = xj;
  } else {
    birth = scalar_jet([&](double y) { return averaged_rates(spec, y).birth; }, x);
    death = scalar_jet([&](double y) { return averaged_rates(spec, y).death; }, x);
  }
  const double phi = spec.phi();
  return (death * (exp(-phi * pj) - 1.0) + birth * (exp(phi * pj) - 1.0)) / phi;
}

double fd_partial(const std::function<double(double, double)>& f, double x, double p, int i, int j, double h) {
  static const std::vector<std::pair<int, double>> kStencil[4] = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
  };
  double s = 0.0;
  for (const auto& [a, wa] : kStencil[i])
    for (const auto& [b, wb] : kStencil[j]) s += wa * wb * f(x + a * h, p + b * h);
  return s / std::pow(h, i + j);
}

Jet fd_hamiltonian_partials(Variant variant, const ModelSpec& spec, double x, double p) {
  auto f = [&](double xx, double pp) { return hamiltonian_eval(variant, spec, xx, pp); };
  static constexpr double kStep[4] = {0.0, 1e-5, 1e-3, 3e-3};
  Jet out(f(x, p));
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j) {
      if (i + j == 0) continue;
      const double h = kStep[i + j];
      const double r1 = (4.0 * fd_partial(f, x, p, i, j, h / 2) - fd_partial(f, x, p, i, j, h)) / 3.0;
      const double r2 = (4.0 * fd_partial(f, x, p, i, j, h) - fd_partial(f, x, p, i, j, 2 * h)) / 3.0;
      const double mag = std::max({std::abs(r1), std::abs(out.value()), 1e-10});
      if (std::abs(r1 - r2) > 1e-6 * mag) {
        std::ostringstream os;
        os << "finite-difference partial (" << i << "," << j << ") unstable at x=" << x << ", p=" << p;
        throw Error(ErrorKind::DerivativeUnstable, os.str());
      }
      static constexpr double kFact[4] = {1.0, 1.0, 2.0, 6.0};
      out.at(i, j) = r1 / (kFact[i] * kFact[j]);
    }
  return out;
}

}  // namespace

double h_component(Variant variant, const ModelSpec& spec, double x, double p, int s) {
  require_matrix_variant(variant);
  return h_of(variant, spec.phi(), spec.w_plus(x)(s), spec.w_minus(x)(s), p);
}

VectorXd h_vector(Variant variant, const ModelSpec& spec, double x, double p) {
  require_matrix_variant(variant);
  const VectorXd wp = spec.w_plus(x);
  const VectorXd wm = spec.w_minus(x);
  VectorXd h(spec.states());
  for (int s = 0; s < spec.states(); ++s) h(s) = h_of(variant, spec.phi(), wp(s), wm(s), p);
  return h;
}

QssCoefficients qss_coefficients(const ModelSpec& spec, double x) {
  QssCoefficients c;
  const VectorXd rho = qss_distribution(spec, x);
  const VectorXd v = spec.v(x);
  c.a = rho.dot(v);
  c.mean_b = rho.dot(spec.b(x));
  // D = -rho^T (diag v - a I) y with A^T y = v - a 1 (minimal norm; gauge drops out).
  const MatrixXd at = spec.A(x).transpose();
  const VectorXd rhs = v - c.a * VectorXd::Ones(spec.states());
  const VectorXd y = at.completeOrthogonalDecomposition().solve(rhs);
  c.D = -(rho.array() * (v.array() - c.a) * y.array()).sum();
  return c;
}

AveragedRates averaged_rates(const ModelSpec& spec, double x) {
  const VectorXd rho = qss_distribution(spec, x);
  return {rho.dot(spec.w_plus(x)), rho.dot(spec.w_minus(x))};
}

double hamiltonian_eval(Variant variant, const ModelSpec& spec, double x, double p) {
  if (variant == Variant::QssDiffusion) {
    const QssCoefficients c = qss_coefficients(spec, x);
    return c.a * p + c.g() * p * p;
  }
  if (variant == Variant::AdiabaticBirthDeath) {
    const AveragedRates r = averaged_rates(spec, x);
    const double phi = spec.phi();
    return (r.death * std::expm1(-phi * p) + r.birth * std::expm1(phi * p)) / phi;
  }
  MatrixXd k = spec.A(x);
  k.diagonal() += h_vector(variant, spec, x, p);
  if (k.rows() == 2) return k(0, 0) * k(1, 1) - k(0, 1) * k(1, 0);
  return k.partialPivLu().determinant();
}

std::vector<Jet> h_jets(Variant variant, const ModelSpec& spec, double x, double p) {
  require_matrix_variant(variant);
  const Jet pj = Jet::p_variable(p);
  std::vector<Jet> out;
  for (int s = 0; s < spec.states(); ++s)
    out.push_back(h_of<Jet>(variant, spec.phi(), x_jet(spec, x, 0, s), x_jet(spec, x, 1, s), pj));
  return out;
}

Jet hamiltonian_partials(Variant variant, const ModelSpec& spec, double x, double p, PartialsRoute route) {
  if (route == PartialsRoute::FiniteDifference) return fd_hamiltonian_partials(variant, spec, x, p);
  if (!is_matrix_variant(variant)) return scalar_hamiltonian_jet(variant, spec, x, p);
  const bool closed = route == PartialsRoute::ClosedForm ||
                      (route == PartialsRoute::Auto && spec.is_gene_switch());
  if (closed) {
    if (!spec.is_gene_switch()) throw Error(ErrorKind::InvalidConfig, "closed-form partials need the built-in model");
    ModelParams prm = *spec.gene_switch_params();
    prm.phi = spec.phi();
    return gs_hamiltonian<Jet>(variant, Jet::x_variable(x), Jet::p_variable(p), prm);
  }
  const int m = spec.states();
  const std::vector<Jet> h = h_jets(variant, spec, x, p);
  MatrixXd a[4];
  for (int k = 0; k < 4; ++k) a[k] = spec.A(x, k);
  std::vector<std::vector<Jet>> mat(m, std::vector<Jet>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      mat[i][j] = Jet::from_x_derivatives(a[0](i, j), a[1](i, j), a[2](i, j), a[3](i, j));
      if (i == j) mat[i][j] += h[i];
    }
  return determinant(mat);
}

namespace {

NullPair generic_null_pair(const MatrixXd& k) {
  const int m = static_cast<int>(k.rows());
  Eigen::JacobiSVD<MatrixXd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  if (m > 1 && sv(m - 2) <= 1e-12 * std::max(sv(0), 1e-300))
    throw Error(ErrorKind::SingularBeyondRankOne, "conditional distribution is not unique");
  NullPair out;
  out.w = svd.matrixV().col(m - 1);
  out.l = svd.matrixU().col(m - 1);
  out.w /= out.w.sum();
  out.l /= out.l.dot(out.w);
  return out;
}

NullPair gene_switch_null_pair(const MatrixXd& k) {
  // Kernel vectors of a 2x2 matrix from whichever row (column) is better scaled.
  VectorXd w(2), l(2);
  if (k.row(0).squaredNorm() >= k.row(1).squaredNorm()) w << k(0, 1), -k(0, 0);
  else w << -k(1, 1), k(1, 0);
  if (k.col(0).squaredNorm() >= k.col(1).squaredNorm()) l << k(1, 0), -k(0, 0);
  else l << -k(1, 1), k(0, 1);
  NullPair out;
  out.w = w / w.sum();
  out.l = l / l.dot(out.w);
  return out;
}

}  // namespace

NullPair conditional_distribution(Variant variant, const ModelSpec& spec, double x, double p, NullspaceRoute route) {
  if (!is_matrix_variant(variant)) {
    NullPair out;
    out.w = qss_distribution(spec, x);
    out.l = VectorXd::Ones(spec.states());
    return out;
  }
  MatrixXd k = spec.A(x);
  k.diagonal() += h_vector(variant, spec, x, p);
  const bool closed = route == NullspaceRoute::ClosedForm ||
                      (route == NullspaceRoute::Auto && spec.is_gene_switch());
  NullPair out = (closed && k.rows() == 2) ? gene_switch_null_pair(k) : generic_null_pair(k);
  if (out.w.minCoeff() < -1e-12) {
    std::ostringstream os;
    os << "conditional distribution has a negative entry at x=" << x << ", p=" << p;
    throw Error(ErrorKind::NegativeNullspace, os.str());
  }
  return out;
}

double curvature_at_fixed_point(Variant variant, const ModelSpec& spec, double x_c) {
  const Jet h = hamiltonian_partials(variant, spec, x_c, 0.0);
  return -2.0 * h.partial(1, 1) / h.partial(0, 2);
}

double third_derivative_at_fixed_point(Variant variant, const ModelSpec& spec, double x_c) {
  const Jet h = hamiltonian_partials(variant, spec, x_c, 0.0);
  const double c2 = -2.0 * h.partial(1, 1) / h.partial(0, 2);
  return -2.0 * (h.partial(2, 1) + c2 * h.partial(1, 2) + c2 * c2 * h.partial(0, 3) / 3.0) / h.partial(0, 2);
}

}  // namespace qsa
