#include "qsa/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsa {

ModelParams ModelParams::from_rates(double beta, double sigma, double alpha_i, double alpha_e) {
  ModelParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.epsilon = 1.0 / alpha_i;
  p.phi = alpha_i / alpha_e;
  return p;
}

void ModelParams::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidConfig, m); };
  if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0, 1)");
  if (!(beta > 0.0)) fail("beta must be positive");
  if (!(phi > 0.0)) fail("phi must be positive");
  if (!(epsilon >= 0.0)) fail("epsilon must be nonnegative");
  if (!std::isfinite(beta) || !std::isfinite(sigma) || !std::isfinite(phi) || !std::isfinite(epsilon))
    fail("parameters must be finite");
}

ModelSpec::ModelSpec(int states, MatrixField a, VectorField w_plus, VectorField w_minus, double phi,
                     Interval domain, std::string name)
    : states_(states),
      a_(std::move(a)),
      w_plus_(std::move(w_plus)),
      w_minus_(std::move(w_minus)),
      phi_(phi),
      domain_(domain),
      name_(std::move(name)) {
  if (states_ < 1) throw Error(ErrorKind::InvalidConfig, "model needs at least one internal state");
  if (!(phi_ > 0.0)) throw Error(ErrorKind::InvalidConfig, "phi must be positive");
  if (!(domain_.hi > domain_.lo)) throw Error(ErrorKind::InvalidConfig, "empty domain");
}

ModelSpec ModelSpec::gene_switch(const ModelParams& params, Interval domain) {
  params.validate();
  const double beta = params.beta;
  const double sigma = params.sigma;
  MatrixField a = [beta](double x, int order) {
    MatrixXd m = MatrixXd::Zero(2, 2);
    switch (order) {
      case 0:
        m << -x * x, beta, x * x, -beta;
        break;
      case 1:
        m << -2.0 * x, 0.0, 2.0 * x, 0.0;
        break;
      case 2:
        m << -2.0, 0.0, 2.0, 0.0;
        break;
      default:
        break;
    }
    return m;
  };
  VectorField wp = [sigma](double, int order) {
    VectorXd w = VectorXd::Zero(2);
    if (order == 0) w << sigma, 1.0;
    return w;
  };
  VectorField wm = [](double x, int order) {
    VectorXd w = VectorXd::Zero(2);
    if (order == 0) w << x, x;
    if (order == 1) w << 1.0, 1.0;
    return w;
  };
  ModelSpec spec(2, a, wp, wm, params.phi, domain, "gene_switch");
  spec.gene_switch_ = params;
  return spec;
}

namespace {

template <class F>
MatrixXd fd_stencil(const F& f, double x, double h, int order) {
  switch (order) {
    case 1:
      return (f(x + h) - f(x - h)) / (2.0 * h);
    case 2:
      return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    case 3:
      return (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
    default:
      return f(x);
  }
}

}  // namespace

MatrixXd richardson_derivative(const std::function<MatrixXd(double)>& f, double x, int order) {
  if (order == 0) return f(x);
  // Relative step 1e-5 for first derivatives; larger for higher orders to limit cancellation.
  static constexpr double kRel[4] = {0.0, 1e-5, 1e-3, 1e-2};
  const double scale = std::max(1.0, std::abs(x)) * 0.1;
  const double h = kRel[order] * scale;
  auto richardson = [&](double step) {
    MatrixXd coarse = fd_stencil(f, x, step, order);
    MatrixXd fine = fd_stencil(f, x, step / 2.0, order);
    return MatrixXd((4.0 * fine - coarse) / 3.0);
  };
  MatrixXd r1 = richardson(h);
  MatrixXd r2 = richardson(2.0 * h);
  const double diff = (r1 - r2).cwiseAbs().maxCoeff();
  const double mag = std::max({r1.cwiseAbs().maxCoeff(), f(x).cwiseAbs().maxCoeff(), 1e-12});
  if (diff > 1e-6 * mag) {
    std::ostringstream os;
    os << "derivative of order " << order << " at x=" << x << " unstable (spread " << diff << ")";
    throw Error(ErrorKind::DerivativeUnstable, os.str());
  }
  return r1;
}

double richardson_derivative(const std::function<double(double)>& f, double x, int order) {
  std::function<MatrixXd(double)> g = [&f](double y) {
    MatrixXd m(1, 1);
    m(0, 0) = f(y);
    return m;
  };
  return richardson_derivative(g, x, order)(0, 0);
}

ModelSpec ModelSpec::from_callables(int states, std::function<MatrixXd(double)> a,
                                    std::function<VectorXd(double)> w_plus,
                                    std::function<VectorXd(double)> w_minus, double phi,
                                    Interval domain, std::string name) {
  MatrixField af = [a](double x, int order) { return order == 0 ? a(x) : richardson_derivative(a, x, order); };
  auto wrap = [](std::function<VectorXd(double)> g) -> VectorField {
    std::function<MatrixXd(double)> gm = [g](double x) { return MatrixXd(g(x)); };
    return [g, gm](double x, int order) -> VectorXd {
      if (order == 0) return g(x);
      return richardson_derivative(gm, x, order).col(0);
    };
  };
  return ModelSpec(states, af, wrap(std::move(w_plus)), wrap(std::move(w_minus)), phi, domain, std::move(name));
}

bool ModelSpec::singular_lower_boundary() const {
  const double lo = domain_.lo;
  return w_minus(lo).minCoeff() <= 0.0 || w_plus(lo).minCoeff() <= 0.0;
}

ModelSpec ModelSpec::with_phi(double phi) const {
  if (gene_switch_) {
    ModelParams p = *gene_switch_;
    p.phi = phi;  // alpha_i stays fixed, alpha_e follows
    return gene_switch(p, domain_);
  }
  ModelSpec copy = *this;
  copy.phi_ = phi;
  return copy;
}

bool is_irreducible(const MatrixXd& a) {
  const int m = static_cast<int>(a.rows());
  if (m == 1) return true;
  auto reach = [&](bool forward) {
    std::vector<char> seen(m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      for (int i = 0; i < m; ++i) {
        if (i == j || seen[i]) continue;
        // column j -> row i is the rate of the jump j -> i
        const double rate = forward ? a(i, j) : a(j, i);
        if (rate > 0.0) {
          seen[i] = 1;
          stack.push_back(i);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(true) && reach(false);
}

std::vector<ValidationIssue> check_w_matrix(const MatrixXd& a, double x, double tol) {
  std::vector<ValidationIssue> issues;
  const int m = static_cast<int>(a.rows());
  if (a.cols() != m) {
    issues.push_back({ErrorKind::NotWMatrix, x, -1, -1, "rate matrix is not square"});
    return issues;
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int j = 0; j < m; ++j) {
    const double colsum = a.col(j).sum();
    if (std::abs(colsum) > tol * scale) {
      std::ostringstream os;
      os << "column " << j << " sums to " << colsum << " at x=" << x;
      issues.push_back({ErrorKind::NotWMatrix, x, -1, j, os.str()});
    }
    for (int i = 0; i < m; ++i) {
      const bool bad = (i == j) ? a(i, j) > 0.0 : a(i, j) < 0.0;
      if (bad) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") = " << a(i, j) << " has the wrong sign at x=" << x;
        issues.push_back({ErrorKind::NotWMatrix, x, i, j, os.str()});
      }
    }
  }
  if (issues.empty() && !is_irreducible(a)) {
    std::ostringstream os;
    os << "rate matrix is reducible at x=" << x;
    issues.push_back({ErrorKind::Reducible, x, -1, -1, os.str()});
  }
  return issues;
}

void ValidationReport::require() const {
  if (!issues.empty()) throw Error(issues.front().kind, issues.front().message);
}

ValidationReport validate_model(const ModelSpec& spec, int grid_points) {
  ValidationReport report;
  report.singular_lower_boundary = spec.singular_lower_boundary();
  const Interval d = spec.domain();
  const int m = spec.states();
  // Open domain: interior points only.
  for (int k = 1; k <= grid_points; ++k) {
    const double x = d.lo + d.length() * k / (grid_points + 1.0);
    const MatrixXd a = spec.A(x);
    if (a.rows() != m) {
      report.issues.push_back({ErrorKind::NotWMatrix, x, -1, -1, "rate matrix has wrong dimension"});
      return report;
    }
    for (auto& issue : check_w_matrix(a, x)) report.issues.push_back(issue);
    const VectorXd wp = spec.w_plus(x);
    const VectorXd wm = spec.w_minus(x);
    for (int s = 0; s < m; ++s) {
      if (!(wp(s) > 0.0) || !(wm(s) > 0.0)) {
        std::ostringstream os;
        os << "external rate nonpositive at x=" << x << ", s=" << s;
        report.issues.push_back({ErrorKind::NonpositiveRate, x, s, -1, os.str()});
      }
    }
    if (!report.issues.empty()) break;
  }
  return report;
}

VectorXd nullvector(const MatrixXd& a) {
  const int m = static_cast<int>(a.rows());
  if (m == 1) return VectorXd::Ones(1);
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  const double top = std::max(sv(0), 1e-300);
  if (sv(m - 2) <= 1e-12 * top || sv(m - 1) > 1e-8 * top) {
    std::ostringstream os;
    os << "nullspace dimension is not one (singular values " << sv(m - 2) << ", " << sv(m - 1) << ")";
    throw Error(ErrorKind::SingularBeyondRankOne, os.str());
  }
  VectorXd w = svd.matrixV().col(m - 1);
  w /= w.sum();
  for (int i = 0; i < m; ++i) {
    if (w(i) < 0.0) {
      if (w(i) < -1e-12) throw Error(ErrorKind::NotWMatrix, "nullvector has mixed signs");
      w(i) = 0.0;
    }
  }
  return w / w.sum();
}

VectorXd qss_distribution(const ModelSpec& spec, double x) { return nullvector(spec.A(x)); }

VectorXd qss_distribution_derivative(const ModelSpec& spec, double x, int order) {
  if (spec.is_gene_switch()) {
    // rho_1 = x^2/(beta + x^2), rho_0 = 1 - rho_1
    const double beta = spec.gene_switch_params()->beta;
    const double d = beta + x * x;
    double r1 = 0.0;
    switch (order) {
      case 0:
        r1 = x * x / d;
        break;
      case 1:
        r1 = 2.0 * beta * x / (d * d);
        break;
      case 2:
        r1 = 2.0 * beta * (beta - 3.0 * x * x) / (d * d * d);
        break;
      case 3:
        r1 = 24.0 * beta * x * (x * x - beta) / (d * d * d * d);
        break;
      default:
        r1 = 0.0;
    }
    VectorXd out(2);
    out << (order == 0 ? 1.0 - r1 : -r1), r1;
    return out;
  }
  std::function<MatrixXd(double)> f = [&spec](double y) { return MatrixXd(qss_distribution(spec, y)); };
  return richardson_derivative(f, x, order).col(0);
}

double deterministic_drift(const ModelSpec& spec, double x) {
  return qss_distribution(spec, x).dot(spec.v(x));
}

namespace {

double refine_root(const ModelSpec& spec, double a, double b) {
  double fa = deterministic_drift(spec, a);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = deterministic_drift(spec, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  double x = 0.5 * (a + b);
  // Newton polish
  for (int it = 0; it < 3; ++it) {
    const double f = deterministic_drift(spec, x);
    if (std::abs(f) <= 1e-15) break;
    const double h = 1e-7 * std::max(1.0, std::abs(x));
    const double df = (deterministic_drift(spec, x + h) - deterministic_drift(spec, x - h)) / (2.0 * h);
    if (df == 0.0) break;
    const double xn = x - f / df;
    if (std::abs(deterministic_drift(spec, xn)) < std::abs(f)) x = xn; else break;
  }
  return x;
}

}  // namespace

std::vector<double> drift_roots(const ModelSpec& spec, int grid_points) {
  const Interval d = spec.domain();
  std::vector<double> roots;
  double x_prev = d.lo;
  double f_prev = deterministic_drift(spec, x_prev);
  for (int k = 1; k < grid_points; ++k) {
    const double x = d.lo + d.length() * k / (grid_points - 1.0);
    const double f = deterministic_drift(spec, x);
    if (f == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && (f > 0.0) != (f_prev > 0.0)) {
      roots.push_back(refine_root(spec, x_prev, x));
    }
    x_prev = x;
    f_prev = f;
  }
  return roots;
}

FixedPointSet find_fixed_points(const ModelSpec& spec, int grid_points) {
  const std::vector<double> roots = drift_roots(spec, grid_points);
  if (roots.size() != 3) {
    std::ostringstream os;
    os << "drift has " << roots.size() << " sign changes on the domain, expected 3";
    throw Error(ErrorKind::NotBistable, os.str());
  }
  FixedPointSet fp;
  fp.x_minus = roots[0];
  fp.x_star = roots[1];
  fp.x_plus = roots[2];
  for (int i = 0; i < 3; ++i) {
    const double x = roots[i];
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const double slope = (deterministic_drift(spec, x + h) - deterministic_drift(spec, x - h)) / (2.0 * h);
    fp.stability[i] = slope < 0.0 ? Stability::Stable : Stability::Unstable;
    if (std::abs(deterministic_drift(spec, x)) > 1e-12)
      throw Error(ErrorKind::NotBistable, "fixed point refinement did not reach tolerance");
  }
  if (fp.stability[0] != Stability::Stable || fp.stability[1] != Stability::Unstable ||
      fp.stability[2] != Stability::Stable)
    throw Error(ErrorKind::NotBistable, "fixed points do not follow the stable/unstable/stable pattern");
  return fp;
}

int gene_switch_root_count(double beta, double sigma) {
  // discriminant of x^3 - x^2 + beta x - beta sigma, divided by beta
  const double disc = beta - 4.0 * beta * beta - 4.0 * sigma + 18.0 * beta * sigma - 27.0 * beta * sigma * sigma;
  if (disc > 0.0) return 3;
  if (disc == 0.0) return 2;
  return 1;
}

BifurcationWindow bifurcation_scan(double sigma, double beta_lo, double beta_hi, int steps) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::InvalidConfig, "sigma must lie in (0, 1)");
  if (!(beta_hi > beta_lo) || beta_lo <= 0.0 || steps < 2)
    throw Error(ErrorKind::InvalidConfig, "invalid beta range");
  auto bistable = [sigma](double beta) { return gene_switch_root_count(beta, sigma) == 3; };
  auto bisect = [&](double a, double b) {
    const bool fa = bistable(a);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      if (bistable(mid) == fa) a = mid; else b = mid;
    }
    return 0.5 * (a + b);
  };
  std::optional<double> lower, upper;
  double prev = beta_lo;
  bool prev_state = bistable(prev);
  if (prev_state) lower = beta_lo;
  for (int k = 1; k < steps; ++k) {
    const double beta = beta_lo + (beta_hi - beta_lo) * k / (steps - 1.0);
    const bool state = bistable(beta);
    if (state && !prev_state && !lower) lower = bisect(prev, beta);
    if (!state && prev_state && lower && !upper) upper = bisect(prev, beta);
    prev = beta;
    prev_state = state;
  }
  if (!lower) throw Error(ErrorKind::NoBistableWindow, "no bistable beta in the scanned range");
  if (!upper) upper = beta_hi;
  return {*lower, *upper};
}

}  // namespace qsa
