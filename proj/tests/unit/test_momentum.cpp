#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsa/momentum.hpp"

using namespace qsa;

namespace {

ModelSpec example(double beta, double sigma, double phi) {
  ModelParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.phi = phi;
  p.epsilon = 0.01;
  return ModelSpec::gene_switch(p);
}

}  // namespace

TEST_CASE("velocity-jump branch reproduces the closed-form momentum") {
  const double beta = 0.11, sigma = 0.015;
  const MomentumBranch br = solve_momentum(Variant::VelocityJump, example(beta, sigma, 1.0));
  CHECK(br.domain().lo > sigma);
  CHECK(br.domain().hi < 1.0);
  double err = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = sigma + 0.01 + (0.98 - sigma) * i / 200.0;
    err = std::max(err, std::abs(br.p(x) - (beta / (1 - x) + x * x / (sigma - x))));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("branches vanish at the fixed points and solve H = 0") {
  const ModelSpec spec = example(0.11, 0.015, 1.0);
  const FixedPointSet fp = find_fixed_points(spec);
  for (Variant v : all_variants()) {
    const MomentumBranch br = solve_momentum(v, spec, fp);
    for (double xc : fp.as_array()) CHECK(std::abs(br.p(xc)) < 1e-12);
    double res = 0.0;
    for (std::size_t i = 0; i < br.grid().size(); i += 7)
      res = std::max(res, std::abs(hamiltonian_eval(v, spec, br.grid()[i], br.values()[i])));
    CHECK(res < 1e-10);
    // Phi' changes sign at every fixed point: positive between x- and x*.
    CHECK(br.p(0.5 * (fp.x_minus + fp.x_star)) > 0.0);
    CHECK(br.p(0.5 * (fp.x_star + fp.x_plus)) < 0.0);
  }
}

TEST_CASE("Phi'' follows the branch derivative, including near fixed points") {
  const ModelSpec spec = example(0.11, 0.015, 1.0);
  const MomentumBranch br = solve_momentum(Variant::Discrete, spec);
  const FixedPointSet& fp = br.fixed_points();
  for (double x : {0.06, 0.4, fp.x_star + 5e-4, fp.x_star - 2e-6, fp.x_plus}) {
    const double h = 1e-5;
    const double fd = (br.p(x + h) - br.p(x - h)) / (2 * h);
    CHECK(br.phi_second(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
  for (int k = 0; k < 3; ++k) {
    const double xc = fp.as_array()[k];
    auto d2 = [&](double h) { return (br.p(xc + h) - 2 * br.p(xc) + br.p(xc - h)) / (h * h); };
    const double fd3 = (4.0 * d2(5e-4) - d2(1e-3)) / 3.0;
    CHECK(br.fixed_point_third(k) == doctest::Approx(fd3).epsilon(1e-4));
    CHECK(br.fixed_point_curvature(k) == doctest::Approx(curvature_at_fixed_point(Variant::Discrete, spec, xc)).epsilon(1e-12));
  }
}

TEST_CASE("w' along the branch matches differences of the null vector") {
  const MomentumBranch br = solve_momentum(Variant::SemiContinuous, example(0.24, 0.015, 1.0));
  for (double x : {0.05, 0.3, 0.8}) {
    const double h = 1e-5;
    const VectorXd fd = (br.null_pair(x + h).w - br.null_pair(x - h).w) / (2 * h);
    CHECK((br.w_derivative(x) - fd).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("discrete branch approaches the velocity-jump branch as phi shrinks") {
  const double beta = 0.11, sigma = 0.015;
  double prev = 1e300;
  for (double phi : {1.0, 0.1, 0.01}) {
    ModelParams p;
    p.beta = beta;
    p.sigma = sigma;
    p.phi = phi;
    const MomentumBranch br = solve_momentum(Variant::Discrete, ModelSpec::gene_switch(p, {0.0165, 1.5}));
    const double err = std::abs(br.p(0.5) - (beta / 0.5 + 0.25 / (sigma - 0.5)));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("admissible domains") {
  const ModelSpec spec = example(0.11, 0.015, 1.0);
  const FixedPointSet fp = find_fixed_points(spec);
  const Interval disc = admissible_domain(Variant::Discrete, spec, fp);
  CHECK(disc.lo == doctest::Approx(0.005));
  const Interval vj = admissible_domain(Variant::VelocityJump, spec, fp);
  CHECK(vj.lo == doctest::Approx(0.015 + std::min(0.005, 0.5 * (fp.x_minus - 0.015))).epsilon(1e-9));
  CHECK(vj.hi == doctest::Approx(1.0 - 0.005).epsilon(1e-9));
}
