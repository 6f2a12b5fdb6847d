#include "qsa/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace qsa {

namespace {

cplx complex_det(const Eigen::MatrixXcd& m) {
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return m.partialPivLu().determinant();
}

double scalar_momentum(Variant variant, const ModelSpec& spec, double x) {
  if (variant == Variant::QssDiffusion) {
    const QssCoefficients c = qss_coefficients(spec, x);
    return -c.a / c.g();
  }
  const AveragedRates r = averaged_rates(spec, x);
  return std::log(r.death / r.birth) / spec.phi();
}

}  // namespace

Poly momentum_polynomial(Variant variant, const ModelSpec& spec, double x) {
  if (!is_matrix_variant(variant))
    throw Error(ErrorKind::InvalidConfig, "momentum polynomial is defined for matrix variants only");
  const int m = spec.states();
  const Eigen::MatrixXcd a = spec.A(x).cast<cplx>();
  const VectorXd wp = spec.w_plus(x);
  const VectorXd wm = spec.w_minus(x);
  const VectorXd v = wp - wm;
  const double phi = spec.phi();
  std::function<cplx(cplx)> f;
  int degree = 2 * m;
  switch (variant) {
    case Variant::Discrete:
      // q^M det(A + diag h) with q h(q) = (W-(1 - q) + W+(q^2 - q)) / phi
      f = [&](cplx z) {
        Eigen::MatrixXcd k = z * a;
        for (int s = 0; s < m; ++s) k(s, s) += (wm(s) * (1.0 - z) + wp(s) * (z * z - z)) / phi;
        return complex_det(k);
      };
      break;
    case Variant::SemiContinuous:
      f = [&](cplx z) {
        Eigen::MatrixXcd k = a;
        for (int s = 0; s < m; ++s) k(s, s) += z * v(s) + z * z * (0.5 * phi * (wp(s) + wm(s)));
        return complex_det(k);
      };
      break;
    default:
      degree = m;
      f = [&](cplx z) {
        Eigen::MatrixXcd k = a;
        for (int s = 0; s < m; ++s) k(s, s) += z * v(s);
        return complex_det(k);
      };
      break;
  }
  const Poly c = interpolate_on_circle(f, degree, 1.0);
  return deflate(c, variant == Variant::Discrete ? 1.0 : 0.0);
}

std::vector<double> momentum_candidates(Variant variant, const ModelSpec& spec, double x) {
  if (!is_matrix_variant(variant)) return {scalar_momentum(variant, spec, x)};
  std::vector<double> out;
  for (const cplx& z : poly_roots(momentum_polynomial(variant, spec, x))) {
    if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z))) continue;
    if (variant == Variant::Discrete) {
      if (z.real() > 0.0) out.push_back(std::log(z.real()) / spec.phi());
    } else {
      out.push_back(z.real());
    }
  }
  return out;
}

Interval admissible_domain(Variant variant, const ModelSpec& spec, const FixedPointSet& fp,
                           const BranchOptions& options) {
  Interval d = spec.domain();
  if (spec.singular_lower_boundary()) d.lo += std::min(options.lower_cutoff, 0.5 * (fp.x_minus - d.lo));
  if (variant != Variant::VelocityJump) return d;
  // The velocity-jump nullvector is positive only where the velocities take both signs.
  auto mixed = [&](double x) {
    const VectorXd v = spec.v(x);
    return v.minCoeff() < 0.0 && v.maxCoeff() > 0.0;
  };
  auto boundary = [&](double inside, double outside_limit) {
    const int n = 4000;
    double prev = inside;
    for (int k = 1; k <= n; ++k) {
      const double x = inside + (outside_limit - inside) * k / n;
      if (!mixed(x)) {
        double a = prev, b = x;
        for (int it = 0; it < 200 && std::abs(b - a) > 1e-15; ++it) {
          const double mid = 0.5 * (a + b);
          if (mixed(mid)) a = mid; else b = mid;
        }
        return std::optional<double>(0.5 * (a + b));
      }
      prev = x;
    }
    return std::optional<double>();
  };
  if (auto lo = boundary(fp.x_minus, d.lo)) d.lo = std::max(d.lo, *lo + std::min(options.support_margin, 0.5 * (fp.x_minus - *lo)));
  if (auto hi = boundary(fp.x_plus, d.hi)) d.hi = std::min(d.hi, *hi - std::min(options.support_margin, 0.5 * (*hi - fp.x_plus)));
  return d;
}

MomentumBranch::MomentumBranch(Variant variant, ModelSpec spec, FixedPointSet fp, Interval domain,
                               std::vector<double> grid, std::vector<double> values)
    : variant_(variant),
      spec_(std::move(spec)),
      fp_(fp),
      domain_(domain),
      grid_(std::move(grid)),
      values_(std::move(values)) {
  const auto xs = fp_.as_array();
  for (int k = 0; k < 3; ++k) {
    fixed_curvature_[k] = curvature_at_fixed_point(variant_, spec_, xs[k]);
    fixed_third_[k] = third_derivative_at_fixed_point(variant_, spec_, xs[k]);
  }
}

int MomentumBranch::near_fixed_point(double x, double tol) const {
  const auto xs = fp_.as_array();
  for (int k = 0; k < 3; ++k)
    if (std::abs(x - xs[k]) <= tol) return k;
  return -1;
}

double MomentumBranch::p(double x) const {
  if (!is_matrix_variant(variant_)) return scalar_momentum(variant_, spec_, x);
  if (near_fixed_point(x, 0.0) >= 0) return 0.0;
  const double span = grid_.back() - grid_.front();
  if (x < grid_.front() - 1e-12 * span || x > grid_.back() + 1e-12 * span) {
    std::ostringstream os;
    os << "x=" << x << " lies outside the branch domain [" << grid_.front() << ", " << grid_.back() << "]";
    throw Error(ErrorKind::RootBranchLost, os.str());
  }
  auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  std::size_t i = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (i + 1 >= grid_.size()) i = grid_.size() - 2;
  const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
  const double pred = values_[i] + t * (values_[i + 1] - values_[i]);
  const std::vector<double> cands = momentum_candidates(variant_, spec_, x);
  if (cands.empty()) {
    std::ostringstream os;
    os << "no real momentum root at x=" << x;
    throw Error(ErrorKind::RootBranchLost, os.str());
  }
  double best = cands[0];
  double second = std::numeric_limits<double>::infinity();
  for (double c : cands) {
    if (std::abs(c - pred) < std::abs(best - pred)) {
      second = std::abs(best - pred);
      best = c;
    } else if (c != best) {
      second = std::min(second, std::abs(c - pred));
    }
  }
  const double local = std::abs(values_[i + 1] - values_[i]) + 1e-12;
  if (std::abs(best - pred) > 0.5 * second && std::abs(best - pred) > local) {
    std::ostringstream os;
    os << "ambiguous momentum root at x=" << x;
    throw Error(ErrorKind::RootBranchLost, os.str());
  }
  return best;
}

double MomentumBranch::q(double x) const { return std::exp(spec_.phi() * p(x)); }

NullPair MomentumBranch::null_pair(double x) const { return conditional_distribution(variant_, spec_, x, p(x)); }

double MomentumBranch::phi_second(double x) const {
  const int k = near_fixed_point(x, 1e-12);
  if (k >= 0) return fixed_curvature_[k];
  const double pv = p(x);
  if (near_fixed_point(x, 1e-3) < 0) {
    const Jet h = hamiltonian_partials(variant_, spec_, x, pv);
    return -h.partial(1, 0) / h.partial(0, 1);
  }
  // Near a fixed point both H_x and H_p vanish. Use the deflated Hamiltonian
  // G = (H(x, p) - H(x, 0)) / p = int_0^1 H_p(x, t p) dt instead.
  using Gauss = boost::math::quadrature::gauss<double, 10>;
  const double gx = Gauss::integrate(
      [&](double t) { return hamiltonian_partials(variant_, spec_, x, t * pv).partial(1, 1); }, 0.0, 1.0);
  const double gp = Gauss::integrate(
      [&](double t) { return t * hamiltonian_partials(variant_, spec_, x, t * pv).partial(0, 2); }, 0.0, 1.0);
  return -gx / gp;
}

VectorXd MomentumBranch::w_derivative(double x) const {
  if (!is_matrix_variant(variant_)) return qss_distribution_derivative(spec_, x, 1);
  const int m = spec_.states();
  const double pv = p(x);
  const double c2 = phi_second(x);
  const std::vector<Jet> h = h_jets(variant_, spec_, x, pv);
  MatrixXd k = spec_.A(x);
  MatrixXd da = spec_.A(x, 1);
  VectorXd dh(m);
  for (int s = 0; s < m; ++s) {
    k(s, s) += h[s].value();
    dh(s) = h[s].partial(1, 0) + h[s].partial(0, 1) * c2;
  }
  const VectorXd w = conditional_distribution(variant_, spec_, x, pv).w;
  da.diagonal() += dh;
  MatrixXd bordered(m + 1, m);
  bordered.topRows(m) = k;
  bordered.row(m).setOnes();
  VectorXd rhs(m + 1);
  rhs.head(m) = -da * w;
  rhs(m) = 0.0;
  return bordered.colPivHouseholderQr().solve(rhs);
}

MomentumBranch solve_momentum(Variant variant, const ModelSpec& spec, const BranchOptions& options) {
  return solve_momentum(variant, spec, find_fixed_points(spec), options);
}

MomentumBranch solve_momentum(Variant variant, const ModelSpec& spec, const FixedPointSet& fp,
                              const BranchOptions& options) {
  const Interval dom = admissible_domain(variant, spec, fp, options);
  const auto xs = fp.as_array();
  const double off = options.fixed_point_offset;
  std::vector<double> grid;
  const int n = std::max(options.grid_points, 16);
  for (int k = 0; k < n; ++k) {
    const double x = dom.lo + dom.length() * k / (n - 1.0);
    bool near = false;
    for (double xc : xs) near = near || std::abs(x - xc) <= off;
    if (!near) grid.push_back(x);
  }
  for (double xc : xs) {
    grid.push_back(xc);
    grid.push_back(xc - off);
    grid.push_back(xc + off);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> values(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (!is_matrix_variant(variant)) {
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = scalar_momentum(variant, spec, grid[i]);
  } else {
    auto index_of = [&](double x) {
      return static_cast<int>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
    };
    auto march = [&](int start, int dir, int stop) {
      values[start] = 0.0;
      double prev = 0.0, prevprev = 0.0;
      bool have_two = false;
      for (int i = start + dir; dir > 0 ? i <= stop : i >= stop; i += dir) {
        const double pred = have_two ? prev + (prev - prevprev) * (grid[i] - grid[i - dir]) /
                                                  (grid[i - dir] - grid[i - 2 * dir])
                                     : prev;
        const std::vector<double> cands = momentum_candidates(variant, spec, grid[i]);
        if (cands.empty()) {
          std::ostringstream os;
          os << "no real momentum root at x=" << grid[i];
          throw Error(ErrorKind::RootBranchLost, os.str());
        }
        double best = cands[0];
        for (double c : cands)
          if (std::abs(c - pred) < std::abs(best - pred)) best = c;
        for (double c : cands) {
          if (c == best) continue;
          if (std::abs(c - pred) < 2.0 * std::abs(best - pred)) {
            std::ostringstream os;
            os << "momentum roots too close to continue at x=" << grid[i];
            throw Error(ErrorKind::RootBranchLost, os.str());
          }
        }
        prevprev = prev;
        prev = best;
        have_two = true;
        values[i] = best;
      }
      return values[stop];
    };
    const int i_minus = index_of(xs[0]);
    const int i_star = index_of(xs[1]);
    const int i_plus = index_of(xs[2]);
    const int last = static_cast<int>(grid.size()) - 1;
    march(i_minus, -1, 0);
    march(i_plus, +1, last);
    auto meet = [&](int a, int b) {
      const int mid = (a + b) / 2;
      const double from_left = march(a, +1, mid);
      const double from_right = march(b, -1, mid);
      if (std::abs(from_left - from_right) > 1e-9 * (1.0 + std::abs(from_left))) {
        std::ostringstream os;
        os << "branches continued from neighbouring fixed points disagree at x=" << grid[mid];
        throw Error(ErrorKind::RootBranchLost, os.str());
      }
    };
    meet(i_minus, i_star);
    meet(i_star, i_plus);
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const NullPair np = conditional_distribution(variant, spec, grid[i], values[i]);
    if (!(np.w.minCoeff() > 0.0)) {
      std::ostringstream os;
      os << "selected momentum gives a non-positive conditional distribution at x=" << grid[i];
      throw Error(ErrorKind::NegativeNullspace, os.str());
    }
  }
  return MomentumBranch(variant, spec, fp, dom, std::move(grid), std::move(values));
}

}  // namespace qsa
