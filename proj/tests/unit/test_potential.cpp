#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "oracles.hpp"
#include "qsa/generator.hpp"
#include "qsa/potential.hpp"

using namespace qsa;

namespace {

ModelParams example(double beta, double sigma, double phi, double eps = 0.01) {
  ModelParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.phi = phi;
  p.epsilon = eps;
  return p;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

TEST_CASE("velocity-jump potentials match the closed forms") {
  const double beta = 0.11, sigma = 0.015;
  const ModelSpec spec = ModelSpec::gene_switch(example(beta, sigma, 1.0));
  const MomentumBranch br = solve_momentum(Variant::VelocityJump, spec);
  const PotentialPair pp = build_potential(br);
  const double x0 = br.fixed_points().x_minus;
  double e_phi = 0.0, e_psi = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double x = sigma + 0.01 + (0.99 - 0.01 - sigma) * i / 300.0;
    if (!pp.domain.contains(x)) continue;
    e_phi = std::max(e_phi, std::abs(pp.Phi(x) - (oracle::vj_phi(beta, sigma, x) - oracle::vj_phi(beta, sigma, x0))));
    e_psi = std::max(e_psi, std::abs(pp.Psi(x) - (oracle::vj_psi(sigma, x) - oracle::vj_psi(sigma, x0))));
  }
  CHECK(e_phi < 1e-10);
  CHECK(e_psi < 1e-8);
}

TEST_CASE("adiabatic potentials match the closed forms") {
  const double beta = 0.11, sigma = 0.015, phi = 1.0;
  const ModelSpec spec = ModelSpec::gene_switch(example(beta, sigma, phi));
  const MomentumBranch br = solve_momentum(Variant::AdiabaticBirthDeath, spec);
  const PotentialPair pp = build_potential(br);
  const double x0 = br.fixed_points().x_minus;
  double e_phi = 0.0, e_psi = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double x = 0.02 + 0.88 * i / 300.0;
    e_phi = std::max(e_phi, std::abs(pp.Phi(x) * phi - (oracle::adiabatic_phi(beta, sigma, x) -
                                                         oracle::adiabatic_phi(beta, sigma, x0))));
    e_psi = std::max(e_psi, std::abs(pp.Psi(x) - (oracle::adiabatic_psi(beta, sigma, x) -
                                                  oracle::adiabatic_psi(beta, sigma, x0))));
  }
  CHECK(e_phi < 1e-10);
  CHECK(e_psi < 1e-8);
}

TEST_CASE("potential normalization and fixed-point values") {
  const ModelSpec spec = ModelSpec::gene_switch(example(0.11, 0.015, 1.0));
  const PotentialPair pp = build_potential(solve_momentum(Variant::Discrete, spec));
  const auto phi = pp.phi_at_fixed_points();
  CHECK(phi[0] == 0.0);
  CHECK(pp.psi_at_fixed_points()[0] == 0.0);
  CHECK(pp.barrier(-1) == doctest::Approx(phi[1]).epsilon(1e-15));
  CHECK(pp.barrier(+1) == doctest::Approx(phi[1] - phi[2]).epsilon(1e-15));
  // Barrier heights computed by quadrature of the momentum branch.
  const MomentumBranch br = solve_momentum(Variant::Discrete, spec);
  const FixedPointSet& fp = br.fixed_points();
  CHECK(pp.barrier(-1) == doctest::Approx(integrate([&](double x) { return br.p(x); }, fp.x_minus, fp.x_star)).epsilon(1e-9));
  CHECK(pp.barrier(+1) == doctest::Approx(-integrate([&](double x) { return br.p(x); }, fp.x_star, fp.x_plus)).epsilon(1e-9));
  CHECK(pp.barrier(-1) == doctest::Approx(0.0024154797131).epsilon(1e-8));
  CHECK(pp.barrier(+1) == doctest::Approx(0.0855471413472).epsilon(1e-8));
}

TEST_CASE("Psi barrier agrees with quadrature of Psi'") {
  const ModelSpec spec = ModelSpec::gene_switch(ModelParams::from_rates(0.23, 0.04, 333, 200));
  const MomentumBranch br = solve_momentum(Variant::Discrete, spec);
  const PotentialPair pp = build_potential(br);
  const FixedPointSet& fp = br.fixed_points();
  const double quad = integrate([&](double x) { return psi_prime_regular(br, x); }, fp.x_minus, fp.x_star);
  CHECK(pp.psi_barrier(-1) == doctest::Approx(quad).epsilon(1e-7));
  CHECK(pp.psi_barrier(-1) == doctest::Approx(2.2811016869).epsilon(1e-7));
}

TEST_CASE("Psi' at a fixed point is the two-sided limit") {
  const ModelSpec spec = ModelSpec::gene_switch(example(0.11, 0.015, 1.0));
  for (Variant v : {Variant::Discrete, Variant::SemiContinuous, Variant::QssDiffusion, Variant::AdiabaticBirthDeath}) {
    const MomentumBranch br = solve_momentum(v, spec);
    for (int k = 0; k < 3; ++k) {
      const double xc = br.fixed_points().as_array()[k];
      auto sym = [&](double h) { return 0.5 * (psi_prime(br, xc + h) + psi_prime(br, xc - h)); };
      const double h = 2e-4;
      const double limit = (4.0 * sym(h / 2) - sym(h)) / 3.0;
      CHECK(psi_prime_at_fixed_point(br, k) == doctest::Approx(limit).epsilon(1e-6));
      CHECK(psi_prime_regular(br, xc) == psi_prime_at_fixed_point(br, k));
    }
  }
}

TEST_CASE("quasi-stationary density is normalized and positive") {
  const ModelParams p = example(0.24, 0.015, 1.0);
  const ModelSpec spec = ModelSpec::gene_switch(p);
  const MomentumBranch br = solve_momentum(Variant::SemiContinuous, spec);
  const PotentialPair pp = build_potential(br);
  const std::vector<double> grid = uniform_grid(pp.domain, 801);
  const QuasiStationaryDensity d = quasi_stationary_density(pp, br, p.epsilon, grid);
  double z = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) z += 0.5 * (grid[i + 1] - grid[i]) * (d.marginal[i] + d.marginal[i + 1]);
  CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.density.minCoeff() > 0.0);
  for (std::size_t i = 0; i < grid.size(); i += 50) {
    CHECK(d.w.col(i).sum() == doctest::Approx(1.0).epsilon(1e-13));
    const double shift = d.landscape[i] - (pp.Phi(grid[i]) + p.epsilon * pp.Psi(grid[i]));
    CHECK(shift == doctest::Approx(p.epsilon * d.log_normalization).epsilon(1e-9));
  }
  const QuasiStationaryDensity serial = quasi_stationary_density(pp, br, p.epsilon, grid, false);
  CHECK(serial.landscape == d.landscape);
  const QuasiStationaryDensity limit = quasi_stationary_density(pp, br, 0.0, grid);
  CHECK(std::isnan(limit.marginal[10]));
  CHECK(limit.landscape[10] == doctest::Approx(pp.Phi(grid[10])).epsilon(1e-15));
}

TEST_CASE("small-copy correction reproduces the lattice balance at the origin") {
  const ModelParams p = example(0.11, 0.015, 1.0);
  const ModelSpec spec = ModelSpec::gene_switch(p);
  const LatticeDensity dens = stationary_density_numeric(build_generator(p, 300));
  const VectorXd p0 = small_copy_correction(spec, p, dens.p.segment(2, 2));
  CHECK((p0 - dens.p.head(2)).lpNorm<Eigen::Infinity>() < 1e-10 * dens.p.head(2).lpNorm<Eigen::Infinity>());
  CHECK(in_small_copy_region(0.02, p));
  CHECK_FALSE(in_small_copy_region(0.031, p));
}
