#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace qsa {

using cplx = std::complex<double>;

/// Coefficients in ascending order: c[0] + c[1] z + ... + c[n] z^n.
using Poly = std::vector<double>;

double poly_eval(const Poly& c, double z);
cplx poly_eval(const Poly& c, cplx z);

/// Roots via eigenvalues of the companion matrix, each polished by Newton steps.
std::vector<cplx> poly_roots(const Poly& c);

/// Divide out (z - r); the remainder is dropped.
Poly deflate(const Poly& c, double r);

/// Recover the coefficients of a degree-n polynomial from its values on n+1 points of a circle.
Poly interpolate_on_circle(const std::function<cplx(cplx)>& f, int degree, double radius = 1.0);

}  // namespace qsa
