#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qsa/escape.hpp"

using namespace qsa;

namespace {

const ModelParams kEscape = ModelParams::from_rates(0.23, 0.04, 333, 200);

}  // namespace

TEST_CASE("generalized eigenvector and boundary factor at x*") {
  const ModelSpec spec = ModelSpec::gene_switch(kEscape);
  const double xs = find_fixed_points(spec).x_star;
  const GeneralizedEigenvector z = solve_zeta(spec, xs);
  CHECK(z.residual < 1e-14);
  CHECK(std::abs(z.solvability) < 1e-12);
  CHECK(z.zeta(0) - z.zeta(1) == doctest::Approx((1 - xs) / kEscape.beta).epsilon(1e-13));
  const double b = boundary_factor_B(spec, xs, z.zeta);
  CHECK(std::abs(b - oracle::discrete_B(kEscape.beta, kEscape.sigma, kEscape.phi, xs)) < 1e-10);
  // Gauge invariance: zeta + c 1 gives the same B.
  for (double c : {-3.0, 0.5, 7.3}) {
    const VectorXd shifted = z.zeta.array() + c;
    CHECK(std::abs(boundary_factor_B(spec, xs, shifted) - b) < 1e-12);
  }
  CHECK_THROWS_AS(solve_zeta(spec, 0.5 * (xs + find_fixed_points(spec).x_plus)), Error);
}

TEST_CASE("variant boundary factors") {
  const ModelSpec spec = ModelSpec::gene_switch(kEscape);
  const double xs = find_fixed_points(spec).x_star;
  CHECK(variant_boundary_factor(Variant::VelocityJump, spec, xs) ==
        doctest::Approx(oracle::vj_B(kEscape.beta, kEscape.sigma, xs)).epsilon(1e-12));
  CHECK(variant_boundary_factor(Variant::AdiabaticBirthDeath, spec, xs) == doctest::Approx(kEscape.phi * xs).epsilon(1e-14));
  CHECK(variant_boundary_factor(Variant::QssDiffusion, spec, xs) ==
        doctest::Approx(variant_boundary_factor(Variant::Discrete, spec, xs)).epsilon(1e-10));
}

TEST_CASE("escape rate assembles barrier, curvatures and prefactor") {
  const ModelSpec spec = ModelSpec::gene_switch(kEscape);
  const MomentumBranch br = solve_momentum(Variant::Discrete, spec);
  const PotentialPair pp = build_potential(br);
  const EscapeRateResult r = principal_eigenvalue(pp, spec, kEscape.epsilon);
  // Independent assembly from quadrature of the branch and of Psi'.
  const FixedPointSet& fp = br.fixed_points();
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double dphi = GK::integrate([&](double x) { return br.p(x); }, fp.x_minus, fp.x_star, 15, 1e-13);
  const double dpsi = GK::integrate([&](double x) { return psi_prime_regular(br, x); }, fp.x_minus, fp.x_star, 15, 1e-13);
  const double h = 1e-5;
  auto slope = [&](double x) { return (br.p(x + h) - br.p(x - h)) / (2 * h); };
  const double b = oracle::discrete_B(kEscape.beta, kEscape.sigma, kEscape.phi, fp.x_star);
  const double lambda = b / std::numbers::pi * std::sqrt(std::abs(slope(fp.x_star)) * slope(fp.x_minus)) *
                        std::exp(-dpsi - dphi / kEscape.epsilon);
  CHECK(r.minus.lambda == doctest::Approx(lambda).epsilon(1e-6));
  CHECK(r.minus.T == doctest::Approx(264.281119418).epsilon(1e-7));
  CHECK(r.plus.T == doctest::Approx(97.3145732573).epsilon(1e-7));
  CHECK(r.minus.T * r.minus.lambda == doctest::Approx(1.0));
  CHECK_THROWS_AS(principal_eigenvalue(pp, spec, 0.0), Error);
}

TEST_CASE("semi-continuous boundary-layer modes reproduce B") {
  const ModelSpec spec = ModelSpec::gene_switch(kEscape);
  const double xs = find_fixed_points(spec).x_star;
  const double c = curvature_at_fixed_point(Variant::SemiContinuous, spec, xs);
  const BoundaryLayerModes m = boundary_layer_modes(Variant::SemiContinuous, spec, xs, c);
  REQUIRE(m.rates.size() == 1);
  CHECK(m.rates[0] > 0.0);
  CHECK(std::abs(m.degenerate.first) < 1e-6);
  CHECK(std::abs(m.degenerate.second) < 1e-6);
  CHECK(std::abs(m.B - boundary_factor_B(spec, xs, solve_zeta(spec, xs).zeta)) < 1e-8);
  // Each kept mode solves (A^T - gamma V + gamma^2 diag b) Y = 0.
  const double g = m.rates[0];
  const MatrixXd q = spec.A(xs).transpose() - g * MatrixXd(spec.v(xs).asDiagonal()) + g * g * MatrixXd(spec.b(xs).asDiagonal());
  CHECK((q * m.vectors.col(0)).norm() < 1e-10);
}

TEST_CASE("discrete boundary-layer modes reproduce B") {
  const ModelSpec spec = ModelSpec::gene_switch(kEscape);
  const double xs = find_fixed_points(spec).x_star;
  const double c = curvature_at_fixed_point(Variant::Discrete, spec, xs);
  const BoundaryLayerModes m = boundary_layer_modes(Variant::Discrete, spec, xs, c);
  REQUIRE(m.rates.size() == 1);
  CHECK(std::abs(m.rates[0]) < 1.0);
  CHECK(std::abs(m.degenerate.first - 1.0) < 1e-6);
  CHECK(std::abs(m.B - boundary_factor_B(spec, xs, solve_zeta(spec, xs).zeta)) < 1e-8);
  CHECK_THROWS_AS(boundary_layer_modes(Variant::QssDiffusion, spec, xs, c), Error);
}

TEST_CASE("two-well occupation conserves probability") {
  for (double t : {0.0, 0.7, 10.0, 1e6}) {
    const auto [qm, qp] = metastable_weights(0.3, 0.7, t, true);
    CHECK(qm + qp == 1.0);
  }
  const auto [qm, qp] = metastable_weights(0.3, 0.7, 1e6, false);
  CHECK(qm == doctest::Approx(0.7));
  CHECK(metastable_weights(0.0, 0.0, 5.0, true).first == 1.0);
  CHECK_THROWS_AS(metastable_weights(-1.0, 0.1, 1.0, true), Error);
}

TEST_CASE("rates grow with epsilon for every variant") {
  const ModelSpec spec = ModelSpec::gene_switch(kEscape);
  for (Variant v : all_variants()) {
    const PotentialPair pp = build_potential(solve_momentum(v, spec));
    const double t1 = principal_eigenvalue(pp, spec, 0.002).minus.T;
    const double t2 = principal_eigenvalue(pp, spec, 0.004).minus.T;
    CHECK(t1 > t2);
  }
}
