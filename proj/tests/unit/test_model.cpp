#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsa/model.hpp"

using namespace qsa;

namespace {

ModelParams params(double beta, double sigma, double phi = 1.0) {
  ModelParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.phi = phi;
  p.epsilon = 0.01;
  return p;
}

ErrorKind thrown_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST_CASE("gene switch rate matrix is a W-matrix on the open domain") {
  const ModelSpec spec = ModelSpec::gene_switch(params(0.11, 0.015));
  for (double x : {0.01, 0.3, 0.9, 1.4}) {
    const MatrixXd a = spec.A(x);
    CHECK(a.col(0).sum() == 0.0);
    CHECK(a.col(1).sum() == 0.0);
    CHECK(check_w_matrix(a, x).empty());
  }
  CHECK(validate_model(spec).ok());
  CHECK(validate_model(spec).singular_lower_boundary);
}

TEST_CASE("W-matrix validation rejects malformed generators") {
  MatrixXd bad_sum(2, 2);
  bad_sum << -1.0, 0.5, 1.0, -0.4;
  REQUIRE_FALSE(check_w_matrix(bad_sum).empty());
  CHECK(check_w_matrix(bad_sum).front().kind == ErrorKind::NotWMatrix);

  MatrixXd bad_sign(2, 2);
  bad_sign << 1.0, 0.5, -1.0, -0.5;
  CHECK(check_w_matrix(bad_sign).front().kind == ErrorKind::NotWMatrix);

  MatrixXd reducible(3, 3);
  reducible << -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  REQUIRE_FALSE(check_w_matrix(reducible).empty());
  CHECK(check_w_matrix(reducible).front().kind == ErrorKind::Reducible);

  const ModelSpec negative_rate = ModelSpec::from_callables(
      2, [](double x) { MatrixXd a(2, 2); a << -x, 1.0, x, -1.0; return a; },
      [](double) { return VectorXd::Constant(2, 1.0); }, [](double x) { return VectorXd::Constant(2, x - 0.5); }, 1.0,
      {0.0, 1.0});
  const ValidationReport r = validate_model(negative_rate);
  REQUIRE_FALSE(r.ok());
  CHECK(r.issues.front().kind == ErrorKind::NonpositiveRate);
  CHECK(thrown_kind([&] { r.require(); }) == ErrorKind::NonpositiveRate);
}

TEST_CASE("parameter validation") {
  CHECK(thrown_kind([] { params(0.11, 1.5).validate(); }) == ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] { params(-0.1, 0.015).validate(); }) == ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] { params(0.11, 0.015, 0.0).validate(); }) == ErrorKind::InvalidConfig);
  const ModelParams r = ModelParams::from_rates(0.23, 0.04, 333, 200);
  CHECK(r.epsilon == doctest::Approx(1.0 / 333).epsilon(1e-15));
  CHECK(r.phi == doctest::Approx(333.0 / 200).epsilon(1e-15));
  CHECK(r.alpha_e() == doctest::Approx(200).epsilon(1e-13));
}

TEST_CASE("QSS distribution matches the two-state closed form") {
  const ModelSpec spec = ModelSpec::gene_switch(params(0.11, 0.015));
  for (double x : {0.02, 0.2, 0.7, 1.2}) {
    const VectorXd rho = qss_distribution(spec, x);
    const auto want = oracle::rho(0.11, x);
    CHECK(rho(0) == doctest::Approx(want[0]).epsilon(1e-13));
    CHECK(rho(1) == doctest::Approx(want[1]).epsilon(1e-13));
    // d rho_1 / dx = 2 beta x / (beta + x^2)^2
    const double d = 2 * 0.11 * x / ((0.11 + x * x) * (0.11 + x * x));
    CHECK(qss_distribution_derivative(spec, x)(1) == doctest::Approx(d).epsilon(1e-8));
  }
}

TEST_CASE("fixed points agree with the trigonometric cubic roots") {
  for (auto [beta, sigma] : {std::pair{0.11, 0.015}, {0.24, 0.015}, {0.23, 0.04}}) {
    const FixedPointSet fp = find_fixed_points(ModelSpec::gene_switch(params(beta, sigma)));
    const auto want = oracle::fixed_points(beta, sigma);
    CHECK(fp.x_minus == doctest::Approx(want[0]).epsilon(1e-11));
    CHECK(fp.x_star == doctest::Approx(want[1]).epsilon(1e-11));
    CHECK(fp.x_plus == doctest::Approx(want[2]).epsilon(1e-11));
    CHECK(fp.stability[1] == Stability::Unstable);
  }
}

TEST_CASE("monostable parameters are rejected") {
  CHECK(thrown_kind([] { find_fixed_points(ModelSpec::gene_switch(params(0.4, 0.015))); }) == ErrorKind::NotBistable);
  CHECK(gene_switch_root_count(0.4, 0.015) == 1);
  CHECK(gene_switch_root_count(0.11, 0.015) == 3);
}

TEST_CASE("saddle-node scan matches the double-root condition") {
  const BifurcationWindow w = bifurcation_scan(0.015, 0.01, 0.3, 291);
  const auto [lo, hi] = oracle::saddle_nodes(0.015);
  CHECK(w.beta_minus == doctest::Approx(lo).epsilon(1e-12));
  CHECK(w.beta_plus == doctest::Approx(hi).epsilon(1e-12));
  // Leading asymptotics of the lower boundary: 4 sigma - 8 sigma^2 + O(sigma^3).
  CHECK(std::abs(w.beta_minus - (4 * 0.015 - 8 * 0.015 * 0.015)) < 20 * std::pow(0.015, 3));
  CHECK(thrown_kind([] { bifurcation_scan(0.015, 0.3, 0.5, 50); }) == ErrorKind::NoBistableWindow);
}

TEST_CASE("Richardson derivatives of a smooth scalar") {
  const std::function<double(double)> f = [](double x) { return std::sin(3 * x); };
  CHECK(richardson_derivative(f, 0.4, 1) == doctest::Approx(3 * std::cos(1.2)).epsilon(1e-9));
  CHECK(richardson_derivative(f, 0.4, 2) == doctest::Approx(-9 * std::sin(1.2)).epsilon(1e-7));
  CHECK(richardson_derivative(f, 0.4, 3) == doctest::Approx(-27 * std::cos(1.2)).epsilon(1e-5));
}

TEST_CASE("callable models reproduce the built-in example") {
  const ModelParams p = params(0.11, 0.015);
  const ModelSpec builtin = ModelSpec::gene_switch(p);
  const ModelSpec generic = ModelSpec::from_callables(
      2, [&](double x) { MatrixXd a(2, 2); a << -x * x, p.beta, x * x, -p.beta; return a; },
      [&](double) { VectorXd w(2); w << p.sigma, 1.0; return w; }, [](double x) { return VectorXd::Constant(2, x); },
      p.phi, {0.0, 1.5});
  CHECK_FALSE(generic.is_gene_switch());
  for (double x : {0.1, 0.6}) {
    CHECK((generic.A(x, 1) - builtin.A(x, 1)).norm() < 1e-8);
    CHECK((generic.A(x, 2) - builtin.A(x, 2)).norm() < 1e-6);
    CHECK((generic.w_minus(x, 1) - builtin.w_minus(x, 1)).norm() < 1e-8);
  }
  const FixedPointSet a = find_fixed_points(builtin), b = find_fixed_points(generic);
  CHECK(a.x_star == doctest::Approx(b.x_star).epsilon(1e-12));
}

TEST_CASE("nullvector rejects a rank-deficient generator") {
  MatrixXd a = MatrixXd::Zero(3, 3);
  a(0, 0) = -1.0;
  a(1, 0) = 1.0;
  CHECK(thrown_kind([&] { nullvector(a); }) == ErrorKind::SingularBeyondRankOne);
}
