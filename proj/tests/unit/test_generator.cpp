#include <doctest.h>

#include <cmath>

#include "qsa/escape.hpp"
#include "qsa/generator.hpp"

using namespace qsa;

namespace {

ModelParams example(double beta, double sigma, double phi, double eps) {
  ModelParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.phi = phi;
  p.epsilon = eps;
  return p;
}

double tv(const VectorXd& a, const VectorXd& b) { return 0.5 * (a - b).lpNorm<1>(); }

}  // namespace

TEST_CASE("reflecting generator conserves probability exactly") {
  const GeneratorMatrix gen = build_generator(example(0.11, 0.015, 1.0, 0.01), 300);
  CHECK(gen.size() == 2 * 301);
  for (double s : gen.column_sums()) CHECK(s == 0.0);
  for (int c = 0; c < gen.G.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(gen.G, c); it; ++it)
      if (it.row() != c) CHECK(it.value() >= 0.0);
  // Channel rates at site n = 10, s = 1: birth alpha_e, death n, deactivation alpha_i beta.
  CHECK(gen.G.coeff(gen.index(11, 1), gen.index(10, 1)) == doctest::Approx(100.0));
  CHECK(gen.G.coeff(gen.index(9, 1), gen.index(10, 1)) == doctest::Approx(10.0));
  CHECK(gen.G.coeff(gen.index(10, 0), gen.index(10, 1)) == doctest::Approx(11.0));
  CHECK(gen.G.coeff(gen.index(10, 1), gen.index(10, 0)) == doctest::Approx(100.0 * 0.01));
}

TEST_CASE("absorbing generator leaks only next to n*") {
  const ModelParams p = ModelParams::from_rates(0.23, 0.04, 333, 200);
  for (Well w : {Well::Left, Well::Right}) {
    const GeneratorMatrix gen = build_generator(p, -1, BoundaryMode::Absorbing, w);
    const std::vector<double> sums = gen.column_sums();
    const int edge = w == Well::Left ? gen.n_star - 1 : gen.n_star + 1;
    for (int n = gen.n_lo; n <= gen.n_hi; ++n)
      for (int s = 0; s < 2; ++s) {
        const double v = sums[gen.index(n, s)];
        if (n == edge) CHECK(v < 0.0);
        else CHECK(v == 0.0);
      }
  }
}

TEST_CASE("stationary solve matches the dense elimination oracle") {
  const GeneratorMatrix gen = build_generator(example(0.11, 0.015, 1.0, 0.01), 300);
  const LatticeDensity d = stationary_density_numeric(gen);
  CHECK(d.p.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.p.minCoeff() >= 0.0);
  CHECK(d.residual < 1e-13);
  const VectorXd gth = stationary_gth(MatrixXd(gen.G));
  CHECK((gth - d.p).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(d.marginal().size() == 301);
}

TEST_CASE("truncation below the stationary mass is reported") {
  const GeneratorMatrix gen = build_generator(example(0.11, 0.015, 1.0, 0.01), 60);
  try {
    stationary_density_numeric(gen);
    FAIL("expected TruncationTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationTooSmall);
  }
}

TEST_CASE("reduced chain agrees with its product form") {
  const ModelSpec spec = ModelSpec::gene_switch(example(0.11, 0.015, 1.0, 0.01));
  const GeneratorMatrix gen = build_adiabatic_generator(spec, 100.0, 300);
  const LatticeDensity d = stationary_density_numeric(gen);
  const VectorXd pf = adiabatic_product_form(spec, 100.0, 300);
  CHECK((d.p - pf).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("reduced chain approximates the full marginal when switching is fast") {
  // alpha_i = 100 alpha_e
  const ModelParams p = ModelParams::from_rates(0.11, 0.015, 5000, 50);
  const LatticeDensity full = stationary_density_numeric(build_generator(p, 150));
  const VectorXd reduced = adiabatic_product_form(ModelSpec::gene_switch(p), 50, 150);
  CHECK(tv(full.marginal(), reduced) <= 0.05);
}

TEST_CASE("principal eigenvalue and exit times of the absorbing chain") {
  const ModelParams p = ModelParams::from_rates(0.23, 0.04, 333, 200);
  const ModelSpec spec = ModelSpec::gene_switch(p);
  const GeneratorMatrix gen = build_generator(p, -1, BoundaryMode::Absorbing, Well::Left);
  const double lambda = principal_eigenvalue_numeric(gen);
  CHECK(lambda > 0.0);
  CHECK(lambda < 1e-2 * 200.0);
  // Frozen reference value (inverse iteration, 106 states).
  CHECK(1.0 / lambda == doctest::Approx(245.44).epsilon(1e-4));
  const int n0 = static_cast<int>(std::lround(200 * find_fixed_points(spec).x_minus));
  const double tau = mean_exit_time_numeric(gen, spec, n0);
  CHECK(tau * lambda == doctest::Approx(1.0).epsilon(0.02));
  // Cross-check against the asymptotic rate at the same point.
  const PotentialPair pp = build_potential(solve_momentum(Variant::Discrete, spec));
  const double t_wkb = principal_eigenvalue(pp, spec, p.epsilon).minus.T;
  CHECK(std::abs(t_wkb * lambda - 1.0) < 0.25);
  CHECK_THROWS_AS(principal_eigenvalue_numeric(build_generator(p, 300)), Error);
}

TEST_CASE("asymptotic and lattice escape times converge as epsilon shrinks") {
  double prev = 1e300;
  for (double ai : {100.0, 200.0, 400.0}) {
    const ModelParams p = ModelParams::from_rates(0.23, 0.04, ai, ai / 1.665);
    const ModelSpec spec = ModelSpec::gene_switch(p);
    const double lambda = principal_eigenvalue_numeric(build_generator(p, -1, BoundaryMode::Absorbing, Well::Left));
    const double t_wkb = principal_eigenvalue(build_potential(solve_momentum(Variant::Discrete, spec)), spec, p.epsilon).minus.T;
    const double gap = std::abs(std::log(t_wkb * lambda));
    CHECK(gap < prev);
    prev = gap;
  }
}
