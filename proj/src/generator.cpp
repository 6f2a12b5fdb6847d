#include "qsa/generator.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsa {

namespace {

struct ColumnBuilder {
  std::vector<Eigen::Triplet<double>> triplets;

  // Off-diagonal entries of one column; the diagonal closes the column sum.
  void close_column(int col, std::vector<std::pair<int, double>>& entries, double leak) {
    std::sort(entries.begin(), entries.end());
    double out = 0.0;
    for (const auto& [row, rate] : entries) {
      if (rate == 0.0) continue;
      triplets.emplace_back(row, col, rate);
      out += rate;
    }
    triplets.emplace_back(col, col, -(out + leak));
    entries.clear();
  }
};

SparseMatrix from_triplets(int n, const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix g(n, n);
  g.setFromTriplets(t.begin(), t.end());
  g.makeCompressed();
  return g;
}

void check_rate(double r, int n, const char* what) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    std::ostringstream os;
    os << what << " rate " << r << " at n=" << n;
    throw Error(ErrorKind::NonpositiveRate, os.str());
  }
}

}  // namespace

std::vector<double> GeneratorMatrix::column_sums() const {
  std::vector<double> out(G.cols(), 0.0);
  for (int c = 0; c < G.outerSize(); ++c) {
    double off = 0.0, diag = 0.0;
    for (SparseMatrix::InnerIterator it(G, c); it; ++it) {
      if (it.row() == c) diag = it.value();
      else off += it.value();
    }
    out[c] = off + diag;
  }
  return out;
}

GeneratorMatrix build_generator(const ModelSpec& spec, const LatticeRates& rates, int n_max, BoundaryMode mode,
                                Well well, double x_star) {
  if (n_max < 1) throw Error(ErrorKind::InvalidConfig, "n_max must be at least 1");
  GeneratorMatrix gen;
  gen.states = spec.states();
  gen.n_max = n_max;
  gen.mode = mode;
  gen.well = well;
  gen.rates = rates;
  gen.n_lo = 0;
  gen.n_hi = n_max;
  if (mode == BoundaryMode::Absorbing) {
    gen.n_star = static_cast<int>(std::lround(rates.alpha_e * x_star));
    if (well == Well::Left) {
      gen.n_hi = gen.n_star - 1;
    } else {
      gen.n_lo = gen.n_star + 1;
    }
    if (gen.n_hi < gen.n_lo) throw Error(ErrorKind::InvalidConfig, "absorbing well contains no lattice sites");
  }
  const int m = gen.states;
  const int dim = m * (gen.n_hi - gen.n_lo + 1);
  ColumnBuilder cb;
  cb.triplets.reserve(static_cast<std::size_t>(dim) * (m + 2));
  std::vector<std::pair<int, double>> entries;
  for (int n = gen.n_lo; n <= gen.n_hi; ++n) {
    const double x = n / rates.alpha_e;
    const MatrixXd a = spec.A(x);
    const VectorXd wp = spec.w_plus(x);
    const VectorXd wm = spec.w_minus(x);
    for (int s = 0; s < m; ++s) {
      double leak = 0.0;
      const double birth = rates.alpha_e * wp(s);
      const double death = n > 0 ? rates.alpha_e * wm(s) : 0.0;
      check_rate(birth, n, "birth");
      check_rate(death, n, "death");
      if (n < gen.n_hi) entries.emplace_back(gen.index(n + 1, s), birth);
      else if (mode == BoundaryMode::Absorbing && well == Well::Left) leak += birth;
      if (n > gen.n_lo) entries.emplace_back(gen.index(n - 1, s), death);
      else if (mode == BoundaryMode::Absorbing && well == Well::Right) leak += death;
      for (int t = 0; t < m; ++t) {
        if (t == s) continue;
        const double r = rates.alpha_i * a(t, s);
        check_rate(r, n, "switching");
        entries.emplace_back(gen.index(n, t), r);
      }
      cb.close_column(gen.index(n, s), entries, leak);
    }
  }
  gen.G = from_triplets(dim, cb.triplets);
  return gen;
}

GeneratorMatrix build_generator(const ModelParams& params, int n_max, BoundaryMode mode, Well well) {
  params.validate();
  const ModelSpec spec = ModelSpec::gene_switch(params);
  const LatticeRates rates = LatticeRates::from(params);
  if (n_max < 0) n_max = static_cast<int>(std::ceil(3.0 * rates.alpha_e));
  double x_star = 0.0;
  if (mode == BoundaryMode::Absorbing) x_star = find_fixed_points(spec).x_star;
  return build_generator(spec, rates, n_max, mode, well, x_star);
}

GeneratorMatrix build_adiabatic_generator(const ModelSpec& spec, double alpha_e, int n_max) {
  GeneratorMatrix gen;
  gen.states = 1;
  gen.n_max = n_max;
  gen.n_hi = n_max;
  gen.rates = {0.0, alpha_e};
  ColumnBuilder cb;
  std::vector<std::pair<int, double>> entries;
  for (int n = 0; n <= n_max; ++n) {
    const double x = n / alpha_e;
    const VectorXd rho = qss_distribution(spec, x);
    if (n < n_max) entries.emplace_back(n + 1, alpha_e * rho.dot(spec.w_plus(x)));
    if (n > 0) entries.emplace_back(n - 1, alpha_e * rho.dot(spec.w_minus(x)));
    cb.close_column(n, entries, 0.0);
  }
  gen.G = from_triplets(n_max + 1, cb.triplets);
  return gen;
}

VectorXd LatticeDensity::marginal() const {
  const int sites = static_cast<int>(p.size()) / states;
  VectorXd u(sites);
  for (int i = 0; i < sites; ++i) u(i) = p.segment(states * i, states).sum();
  return u;
}

VectorXd stationary_gth(const MatrixXd& g) {
  const int n = static_cast<int>(g.rows());
  // Row convention: P(i, j) is the rate from i to j.
  MatrixXd p = g.transpose();
  for (int k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += p(k, j);
    if (!(s > 0.0)) throw Error(ErrorKind::NullspaceDegenerate, "generator is not irreducible");
    for (int i = 0; i < k; ++i) p(i, k) /= s;
    for (int i = 0; i < k; ++i) {
      const double pik = p(i, k);
      if (pik == 0.0) continue;
      for (int j = 0; j < k; ++j)
        if (i != j) p(i, j) += pik * p(k, j);
    }
  }
  VectorXd pi = VectorXd::Zero(n);
  pi(0) = 1.0;
  for (int k = 1; k < n; ++k)
    for (int i = 0; i < k; ++i) pi(k) += pi(i) * p(i, k);
  return pi / pi.sum();
}

LatticeDensity stationary_density_numeric(const GeneratorMatrix& gen) {
  if (gen.mode != BoundaryMode::Reflecting)
    throw Error(ErrorKind::InvalidConfig, "stationary density needs a reflecting generator");
  const int dim = gen.size();
  // Replace the last balance equation by the normalization sum(p) = 1.
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(gen.G.nonZeros() + dim);
  for (int c = 0; c < gen.G.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(gen.G, c); it; ++it)
      if (it.row() != dim - 1) t.emplace_back(it.row(), c, it.value());
  for (int c = 0; c < dim; ++c) t.emplace_back(dim - 1, c, 1.0);
  SparseMatrix k(dim, dim);
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();
  VectorXd rhs = VectorXd::Zero(dim);
  rhs(dim - 1) = 1.0;

  LatticeDensity out;
  out.states = gen.states;
  out.n_lo = gen.n_lo;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(k);
  if (lu.info() == Eigen::Success) out.p = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !out.p.allFinite()) {
    if (dim > 2000) throw Error(ErrorKind::NullspaceDegenerate, "sparse LU failed on the stationary system");
    out.p = stationary_gth(MatrixXd(gen.G));
  }
  const double top = out.p.maxCoeff();
  if (out.p.minCoeff() < -1e-12 * top) throw Error(ErrorKind::NullspaceDegenerate, "stationary vector has negative mass");
  out.p = out.p.cwiseMax(0.0);
  out.p /= out.p.sum();

  double gnorm = 0.0;
  for (int c = 0; c < gen.G.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(gen.G, c); it; ++it) gnorm = std::max(gnorm, std::abs(it.value()));
  out.residual = (gen.G * out.p).lpNorm<Eigen::Infinity>();
  if (out.residual > 1e-12 * 2.0 * gnorm) {
    std::ostringstream os;
    os << "stationary residual " << out.residual << " exceeds tolerance";
    throw Error(ErrorKind::NullspaceDegenerate, os.str());
  }
  double tail = 0.0;
  for (int n = std::max(gen.n_lo, gen.n_hi - 5); n <= gen.n_hi; ++n)
    for (int s = 0; s < gen.states; ++s) tail += out.p(gen.index(n, s));
  if (tail > 1e-10) {
    std::ostringstream os;
    os << "mass " << tail << " within five sites of n_max=" << gen.n_max;
    throw Error(ErrorKind::TruncationTooSmall, os.str());
  }
  return out;
}

double principal_eigenvalue_numeric(const GeneratorMatrix& gen, int max_iterations) {
  if (gen.mode != BoundaryMode::Absorbing)
    throw Error(ErrorKind::InvalidConfig, "principal eigenvalue needs an absorbing generator");
  const SparseMatrix k = -gen.G;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu(k);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "absorbing generator is singular");
  VectorXd x = VectorXd::Ones(gen.size()) / gen.size();
  double prev = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    VectorXd y = lu.solve(x);
    const double lambda = x.lpNorm<1>() / y.lpNorm<1>();
    x = y / y.lpNorm<1>();
    if (it > 0 && std::abs(lambda - prev) <= 1e-10 * std::abs(lambda)) return lambda;
    prev = lambda;
  }
  throw Error(ErrorKind::IterationStalled, "inverse iteration did not converge");
}

VectorXd mean_exit_times_numeric(const GeneratorMatrix& gen) {
  if (gen.mode != BoundaryMode::Absorbing)
    throw Error(ErrorKind::InvalidConfig, "exit times need an absorbing generator");
  const SparseMatrix kt = SparseMatrix(-gen.G.transpose());
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu(kt);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "absorbing generator is singular");
  return lu.solve(VectorXd::Ones(gen.size()));
}

double mean_exit_time_numeric(const GeneratorMatrix& gen, const ModelSpec& spec, int n_start) {
  const VectorXd tau = mean_exit_times_numeric(gen);
  const VectorXd rho = qss_distribution(spec, n_start / gen.rates.alpha_e);
  double t = 0.0;
  for (int s = 0; s < gen.states; ++s) t += rho(s) * tau(gen.index(n_start, s));
  return t;
}

VectorXd adiabatic_product_form(const ModelSpec& spec, double alpha_e, int n_max) {
  VectorXd logp(n_max + 1);
  logp(0) = 0.0;
  for (int n = 0; n < n_max; ++n) {
    const double x0 = n / alpha_e, x1 = (n + 1) / alpha_e;
    const double birth = alpha_e * qss_distribution(spec, x0).dot(spec.w_plus(x0));
    const double death = alpha_e * qss_distribution(spec, x1).dot(spec.w_minus(x1));
    logp(n + 1) = logp(n) + std::log(birth) - std::log(death);
  }
  const double top = logp.maxCoeff();
  VectorXd p = (logp.array() - top).exp();
  return p / p.sum();
}

}  // namespace qsa
