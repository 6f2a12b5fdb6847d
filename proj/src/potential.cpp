#include "qsa/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsa/csv.hpp"

namespace qsa {

namespace {

double scalar_psi_prime(const Jet& h, double c2) {
  return (h.partial(1, 1) + 0.5 * c2 * h.partial(0, 2)) / h.partial(0, 1);
}

void check_denominator(double den, double x) {
  if (std::abs(den) < 1e-12) {
    std::ostringstream os;
    os << "solvability denominator " << den << " vanishes at x=" << x << " away from a fixed point";
    throw Error(ErrorKind::DenominatorVanishes, os.str());
  }
}

double qss_psi_prime(const ModelSpec& spec, double x) {
  const QssJets q = qss_jets(spec, x);
  return q.mean_b.partial(1, 0) / (q.mean_b.value() + q.D.value());
}

// Derivatives along the branch of the null pair at a fixed point, from the
// differentiated null-vector equations (K = A there, since h(x, 0) = 0).
struct FixedPointNullJets {
  VectorXd w, dw, d2w, l, dl;
};

FixedPointNullJets fixed_point_null_jets(Variant variant, const ModelSpec& spec, double xc, double c2, double c3) {
  const int m = spec.states();
  const std::vector<Jet> h = h_jets(variant, spec, xc, 0.0);
  const NullPair np = conditional_distribution(variant, spec, xc, 0.0);
  MatrixXd k = spec.A(xc);
  MatrixXd k1 = spec.A(xc, 1);
  MatrixXd k2 = spec.A(xc, 2);
  for (int s = 0; s < m; ++s) {
    k(s, s) += h[s].value();
    k1(s, s) += h[s].partial(1, 0) + h[s].partial(0, 1) * c2;
    k2(s, s) += h[s].partial(2, 0) + 2.0 * h[s].partial(1, 1) * c2 + h[s].partial(0, 2) * c2 * c2 +
                h[s].partial(0, 1) * c3;
  }
  MatrixXd right(m + 1, m), left(m + 1, m);
  right.topRows(m) = k;
  right.row(m).setOnes();
  left.topRows(m) = k.transpose();
  left.row(m) = np.w.transpose();
  const auto qr_right = right.colPivHouseholderQr();
  VectorXd rhs(m + 1);
  FixedPointNullJets out;
  out.w = np.w;
  out.l = np.l;
  rhs << -k1 * out.w, 0.0;
  out.dw = qr_right.solve(rhs);
  rhs << -2.0 * k1 * out.dw - k2 * out.w, 0.0;
  out.d2w = qr_right.solve(rhs);
  rhs << -k1.transpose() * out.l, -out.l.dot(out.dw);
  out.dl = left.colPivHouseholderQr().solve(rhs);
  return out;
}

double regular_with(const MomentumBranch& branch, double x, const std::array<double, 3>& at_fixed) {
  if (branch.variant() == Variant::QssDiffusion) return qss_psi_prime(branch.spec(), x);
  const int k = branch.near_fixed_point(x, kFixedPointWindow);
  if (k < 0) return psi_prime(branch, x);
  const double xc = branch.fixed_points().as_array()[k];
  if (x == xc) return at_fixed[k];
  const double step = x > xc ? kFixedPointWindow : -kFixedPointWindow;
  const double f0 = at_fixed[k];
  const double f1 = psi_prime(branch, xc + step);
  const double f2 = psi_prime(branch, xc + 2.0 * step);
  const double t = (x - xc) / step;
  return 0.5 * f0 * (t - 1.0) * (t - 2.0) - f1 * t * (t - 2.0) + 0.5 * f2 * t * (t - 1.0);
}

}  // namespace

double psi_prime(const MomentumBranch& branch, double x) {
  const ModelSpec& spec = branch.spec();
  const Variant variant = branch.variant();
  if (variant == Variant::QssDiffusion) return qss_psi_prime(spec, x);
  const double p = branch.p(x);
  const double c2 = branch.phi_second(x);
  if (!is_matrix_variant(variant)) {
    const Jet h = hamiltonian_partials(variant, spec, x, p);
    check_denominator(h.partial(0, 1), x);
    return scalar_psi_prime(h, c2);
  }
  const NullPair np = branch.null_pair(x);
  const VectorXd dw = branch.w_derivative(x);
  const std::vector<Jet> h = h_jets(variant, spec, x, p);
  double num = 0.0, den = 0.0;
  for (int s = 0; s < spec.states(); ++s) {
    const double hp = h[s].partial(0, 1);
    const double hpx = h[s].partial(1, 1) * np.w(s) + hp * dw(s);
    const double hpp = h[s].partial(0, 2) * np.w(s);
    num += np.l(s) * (hpx + 0.5 * c2 * hpp);
    den += np.l(s) * hp * np.w(s);
  }
  check_denominator(den, x);
  return num / den;
}

double psi_prime_at_fixed_point(const MomentumBranch& branch, int k) {
  const ModelSpec& spec = branch.spec();
  const Variant variant = branch.variant();
  const double xc = branch.fixed_points().as_array()[k];
  if (variant == Variant::QssDiffusion) return qss_psi_prime(spec, xc);
  const double c2 = curvature_at_fixed_point(variant, spec, xc);
  const double c3 = third_derivative_at_fixed_point(variant, spec, xc);
  if (!is_matrix_variant(variant)) {
    const Jet h = hamiltonian_partials(variant, spec, xc, 0.0);
    const double num = h.partial(2, 1) + 0.5 * c2 * (3.0 * h.partial(1, 2) + c2 * h.partial(0, 3)) +
                       0.5 * c3 * h.partial(0, 2);
    const double den = h.partial(1, 1) + c2 * h.partial(0, 2);
    return num / den;
  }
  // L'Hopital: numerator and denominator of psi_prime both vanish at xc.
  const std::vector<Jet> h = h_jets(variant, spec, xc, 0.0);
  const FixedPointNullJets nj = fixed_point_null_jets(variant, spec, xc, c2, c3);
  double num = 0.0, den = 0.0;
  for (int s = 0; s < spec.states(); ++s) {
    const double w = nj.w(s), l = nj.l(s), dw = nj.dw(s), dl = nj.dl(s);
    const double hp = h[s].partial(0, 1), hpx = h[s].partial(1, 1), hpp = h[s].partial(0, 2);
    const double Hp = hp * w;
    const double Hpp = hpp * w;
    const double Hpx = hpx * w + hp * dw;
    const double Hpxx = h[s].partial(2, 1) * w + 2.0 * hpx * dw + hp * nj.d2w(s);
    const double Hppx = h[s].partial(1, 2) * w + hpp * dw;
    const double Hppp = h[s].partial(0, 3) * w;
    num += l * (Hpxx + 0.5 * c2 * (3.0 * Hppx + c2 * Hppp) + 0.5 * c3 * Hpp) + dl * (Hpx + 0.5 * c2 * Hpp);
    den += dl * Hp + l * (Hpx + c2 * Hpp);
  }
  if (std::abs(den) < 1e-14) {
    std::ostringstream os;
    os << "fixed-point limit of psi' is undefined at x=" << xc;
    throw Error(ErrorKind::DerivativeUnstable, os.str());
  }
  return num / den;
}

double psi_prime_regular(const MomentumBranch& branch, double x) {
  std::array<double, 3> at{};
  const int k = branch.near_fixed_point(x, kFixedPointWindow);
  if (k >= 0 && branch.variant() != Variant::QssDiffusion) at[k] = psi_prime_at_fixed_point(branch, k);
  return regular_with(branch, x, at);
}

std::array<double, 3> PotentialPair::phi_at_fixed_points() const {
  const auto xs = fixed_points.as_array();
  return {phi(xs[0]), phi(xs[1]), phi(xs[2])};
}

std::array<double, 3> PotentialPair::psi_at_fixed_points() const {
  const auto xs = fixed_points.as_array();
  return {psi(xs[0]), psi(xs[1]), psi(xs[2])};
}

double PotentialPair::barrier(int well) const {
  const auto v = phi_at_fixed_points();
  return v[1] - v[well < 0 ? 0 : 2];
}

double PotentialPair::psi_barrier(int well) const {
  const auto v = psi_at_fixed_points();
  return v[1] - v[well < 0 ? 0 : 2];
}

PotentialPair build_potential(const MomentumBranch& branch, const FitOptions& options) {
  const FixedPointSet& fp = branch.fixed_points();
  const Interval dom = branch.domain();
  std::array<double, 3> at{};
  for (int k = 0; k < 3; ++k) at[k] = psi_prime_at_fixed_point(branch, k);
  const double anchors[5] = {dom.lo, fp.x_minus, fp.x_star, fp.x_plus, dom.hi};

  PotentialPair pair;
  pair.variant = branch.variant();
  pair.fixed_points = fp;
  pair.domain = dom;
  auto p = [&](double x) { return branch.p(x); };
  auto q = [&](double x) { return regular_with(branch, x, at); };
  for (int i = 0; i < 4; ++i) {
    const Interval iv{anchors[i], anchors[i + 1]};
    if (!(iv.hi > iv.lo)) continue;
    pair.dphi.append(fit_adaptive(p, iv, options));
    pair.dpsi.append(fit_adaptive(q, iv, options));
  }
  pair.phi = pair.dphi.antiderivative();
  pair.psi = pair.dpsi.antiderivative();
  pair.phi += -pair.phi(fp.x_minus);
  pair.psi += -pair.psi(fp.x_minus);
  return pair;
}

std::vector<double> uniform_grid(const Interval& interval, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = interval.lo + interval.length() * i / (n - 1.0);
  g.back() = interval.hi;
  return g;
}

QuasiStationaryDensity quasi_stationary_density(const PotentialPair& pair, const MomentumBranch& branch,
                                                double epsilon, const std::vector<double>& grid, bool parallel) {
  if (epsilon < 0.0) throw Error(ErrorKind::InvalidConfig, "epsilon must be nonnegative");
  const int n = static_cast<int>(grid.size());
  const int m = branch.spec().states();
  QuasiStationaryDensity out;
  out.epsilon = epsilon;
  out.x = grid;
  out.w.resize(m, n);
  out.density.resize(m, n);
  out.marginal.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.landscape.resize(n);
  std::vector<double> logu(n);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      out.w.col(i) = branch.null_pair(grid[i]).w;
      const double ph = pair.phi(grid[i]);
      logu[i] = epsilon > 0.0 ? -ph / epsilon - pair.psi(grid[i]) : 0.0;
      out.landscape[i] = ph + epsilon * pair.psi(grid[i]);
    } catch (...) {
#pragma omp critical(qsa_density_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  if (epsilon == 0.0) {
    out.density.setConstant(std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const double top = *std::max_element(logu.begin(), logu.end());
  double z = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    z += 0.5 * (grid[i + 1] - grid[i]) * (std::exp(logu[i] - top) + std::exp(logu[i + 1] - top));
  out.log_normalization = top + std::log(z);
  for (int i = 0; i < n; ++i) {
    const double lu = logu[i] - out.log_normalization;
    out.marginal[i] = std::exp(lu);
    out.density.col(i) = out.w.col(i) * out.marginal[i];
    out.landscape[i] = -epsilon * lu;
  }
  return out;
}

VectorXd small_copy_correction(const ModelSpec& spec, const ModelParams& params, const VectorXd& at_first_site) {
  const double ai = params.alpha_i();
  const double ae = params.alpha_e();
  const int m = spec.states();
  // Balance at n = 0: internal switching, births out of 0, deaths in from n = 1.
  MatrixXd k = ai * spec.A(0.0);
  k.diagonal() -= ae * (spec.w_plus(0.0) + spec.w_minus(0.0));
  const VectorXd inflow = (ae * spec.w_minus(1.0 / ae)).cwiseProduct(at_first_site);
  Eigen::FullPivLU<MatrixXd> lu(k);
  if (lu.rank() < m || lu.rcond() < 1e-14) throw Error(ErrorKind::SingularMatrix, "origin balance matrix is singular");
  return -lu.solve(inflow);
}

bool in_small_copy_region(double x, const ModelParams& params) { return x < 3.0 / params.alpha_e(); }

void write_landscape_csv(const std::string& path, const PotentialPair& pair, const QuasiStationaryDensity& density) {
  std::vector<std::string> cols{"x", "phi", "psi", "landscape"};
  const int m = static_cast<int>(density.w.rows());
  for (int s = 0; s < m; ++s) cols.push_back("w" + std::to_string(s));
  CsvWriter csv(path, "landscape", cols);
  for (std::size_t i = 0; i < density.x.size(); ++i) {
    std::vector<double> row{density.x[i], pair.phi(density.x[i]), pair.psi(density.x[i]), density.landscape[i]};
    for (int s = 0; s < m; ++s) row.push_back(density.w(s, i));
    csv.row(row);
  }
}

}  // namespace qsa
