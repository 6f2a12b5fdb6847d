#include "qsa/polynomial.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace qsa {

double poly_eval(const Poly& c, double z) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
  return r;
}

cplx poly_eval(const Poly& c, cplx z) {
  cplx r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * z + *it;
  return r;
}

namespace {

cplx poly_deriv_eval(const Poly& c, cplx z) {
  cplx r = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) r = r * z + static_cast<double>(k) * c[k];
  return r;
}

}  // namespace

std::vector<cplx> poly_roots(const Poly& coeffs) {
  Poly c = coeffs;
  const double scale = [&] {
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
  }();
  while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * scale) c.pop_back();
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  if (n == 1) return {cplx(-c[0] / c[1], 0.0)};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  for (auto& z : roots) {
    for (int it = 0; it < 3; ++it) {
      const cplx f = poly_eval(c, z);
      const cplx df = poly_deriv_eval(c, z);
      if (std::abs(df) == 0.0) break;
      const cplx zn = z - f / df;
      if (std::abs(poly_eval(c, zn)) < std::abs(f)) z = zn; else break;
    }
  }
  return roots;
}

Poly deflate(const Poly& c, double r) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  Poly q(n, 0.0);
  double carry = c[n];
  q[n - 1] = carry;
  for (int k = n - 1; k >= 1; --k) {
    carry = c[k] + r * carry;
    q[k - 1] = carry;
  }
  return q;
}

Poly interpolate_on_circle(const std::function<cplx(cplx)>& f, int degree, double radius) {
  const int n = degree + 1;
  std::vector<cplx> vals(n);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    vals[k] = f(radius * cplx(std::cos(t), std::sin(t)));
  }
  Poly c(n, 0.0);
  double rpow = 1.0;
  for (int j = 0; j < n; ++j) {
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = -2.0 * std::numbers::pi * static_cast<double>(j) * k / n;
      s += vals[k] * cplx(std::cos(t), std::sin(t));
    }
    c[j] = (s / static_cast<double>(n)).real() / rpow;
    rpow *= radius;
  }
  return c;
}

}  // namespace qsa
