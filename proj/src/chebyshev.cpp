#include "qsa/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qsa {

ChebyshevSeries::ChebyshevSeries(Interval interval, std::vector<double> coeffs)
    : interval_(interval), coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

std::vector<double> ChebyshevSeries::lobatto_nodes(int n, Interval iv) {
  std::vector<double> x(n + 1);
  const double mid = 0.5 * (iv.lo + iv.hi);
  const double half = 0.5 * (iv.hi - iv.lo);
  for (int k = 0; k <= n; ++k) x[k] = mid - half * std::cos(std::numbers::pi * k / n);
  x.front() = iv.lo;
  x.back() = iv.hi;
  return x;
}

ChebyshevSeries ChebyshevSeries::from_lobatto_values(Interval interval, const std::vector<double>& values) {
  const int n = static_cast<int>(values.size()) - 1;
  if (n == 0) return ChebyshevSeries(interval, {values[0]});
  // Ascending nodes are the standard cos(pi k / n) nodes in reverse order.
  std::vector<double> f(values.rbegin(), values.rend());
  std::vector<double> c(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double w = (k == 0 || k == n) ? 0.5 : 1.0;
      s += w * f[k] * std::cos(std::numbers::pi * static_cast<double>(j) * k / n);
    }
    c[j] = 2.0 * s / n;
  }
  c[0] *= 0.5;
  c[n] *= 0.5;
  return ChebyshevSeries(interval, std::move(c));
}

double ChebyshevSeries::operator()(double x) const {
  const double t = (2.0 * x - interval_.lo - interval_.hi) / (interval_.hi - interval_.lo);
  double b1 = 0.0, b2 = 0.0;
  for (int k = degree(); k >= 1; --k) {
    const double b0 = coeffs_[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs_[0] + t * b1 - b2;
}

ChebyshevSeries ChebyshevSeries::derivative() const {
  const int n = degree();
  if (n == 0) return ChebyshevSeries(interval_, {0.0});
  std::vector<double> d(n + 1, 0.0);
  for (int k = n; k >= 1; --k) d[k - 1] = (k + 1 <= n ? d[k + 1] : 0.0) + 2.0 * k * coeffs_[k];
  d[0] *= 0.5;
  d.pop_back();
  const double scale = 2.0 / (interval_.hi - interval_.lo);
  for (double& v : d) v *= scale;
  return ChebyshevSeries(interval_, std::move(d));
}

ChebyshevSeries ChebyshevSeries::antiderivative() const {
  const int n = degree();
  auto c = [&](int k) { return k <= n ? coeffs_[k] : 0.0; };
  std::vector<double> a(n + 2, 0.0);
  a[1] = c(0) - 0.5 * c(2);
  for (int k = 2; k <= n + 1; ++k) a[k] = (c(k - 1) - c(k + 1)) / (2.0 * k);
  const double scale = 0.5 * (interval_.hi - interval_.lo);
  double at_left = 0.0;
  for (int k = 1; k <= n + 1; ++k) {
    a[k] *= scale;
    at_left += (k % 2 == 0 ? 1.0 : -1.0) * a[k];
  }
  a[0] = -at_left;
  return ChebyshevSeries(interval_, std::move(a));
}

ChebyshevSeries& ChebyshevSeries::operator+=(double c) {
  coeffs_[0] += c;
  return *this;
}

PiecewiseChebyshev::PiecewiseChebyshev(std::vector<ChebyshevSeries> pieces) : pieces_(std::move(pieces)) {}

double PiecewiseChebyshev::operator()(double x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const ChebyshevSeries& s) { return v < s.interval().hi; });
  if (it == pieces_.end()) --it;
  return (*it)(x);
}

PiecewiseChebyshev PiecewiseChebyshev::derivative() const {
  std::vector<ChebyshevSeries> out;
  for (const auto& s : pieces_) out.push_back(s.derivative());
  return PiecewiseChebyshev(std::move(out));
}

PiecewiseChebyshev PiecewiseChebyshev::antiderivative() const {
  std::vector<ChebyshevSeries> out;
  double offset = 0.0;
  for (const auto& s : pieces_) {
    ChebyshevSeries a = s.antiderivative();
    a += offset;
    offset = a(s.interval().hi);
    out.push_back(std::move(a));
  }
  return PiecewiseChebyshev(std::move(out));
}

PiecewiseChebyshev& PiecewiseChebyshev::operator+=(double c) {
  for (auto& s : pieces_) s += c;
  return *this;
}

void PiecewiseChebyshev::append(const PiecewiseChebyshev& other) {
  pieces_.insert(pieces_.end(), other.pieces_.begin(), other.pieces_.end());
}

int PiecewiseChebyshev::max_degree() const {
  int d = 0;
  for (const auto& s : pieces_) d = std::max(d, s.degree());
  return d;
}

namespace {

std::vector<double> sample(const std::function<double(double)>& f, const std::vector<double>& xs,
                           const std::vector<double>* known, bool parallel) {
  // known holds values at the even-indexed nodes (previous level), if any.
  const int n = static_cast<int>(xs.size());
  std::vector<double> out(n);
  std::vector<int> todo;
  for (int k = 0; k < n; ++k) {
    if (known && k % 2 == 0) out[k] = (*known)[k / 2];
    else todo.push_back(k);
  }
  const int m = static_cast<int>(todo.size());
  if (parallel) {
    // Errors thrown inside the region are captured and rethrown after it.
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < m; ++i) {
      try {
        out[todo[i]] = f(xs[todo[i]]);
      } catch (...) {
#pragma omp critical(qsa_fit_error)
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (int i = 0; i < m; ++i) out[todo[i]] = f(xs[todo[i]]);
  }
  return out;
}

void fit_into(const std::function<double(double)>& f, Interval iv, const FitOptions& opt, int depth,
              std::vector<ChebyshevSeries>& out) {
  int n = opt.min_degree;
  std::vector<double> values = sample(f, ChebyshevSeries::lobatto_nodes(n, iv), nullptr, opt.parallel);
  while (true) {
    ChebyshevSeries coarse = ChebyshevSeries::from_lobatto_values(iv, values);
    const std::vector<double> fine_nodes = ChebyshevSeries::lobatto_nodes(2 * n, iv);
    std::vector<double> fine = sample(f, fine_nodes, &values, opt.parallel);
    double scale = 1.0, resid = 0.0;
    for (double v : fine) scale = std::max(scale, std::abs(v));
    for (int k = 1; k < 2 * n; k += 2) resid = std::max(resid, std::abs(coarse(fine_nodes[k]) - fine[k]));
    if (resid <= opt.tol * scale) {
      out.push_back(ChebyshevSeries::from_lobatto_values(iv, fine));
      return;
    }
    n *= 2;
    values = std::move(fine);
    if (n >= opt.max_degree) break;
  }
  if (depth >= opt.max_splits) {
    std::ostringstream os;
    os << "Chebyshev fit on [" << iv.lo << ", " << iv.hi << "] did not reach " << opt.tol << " at degree "
       << opt.max_degree;
    throw Error(ErrorKind::FitToleranceNotMet, os.str());
  }
  const double mid = 0.5 * (iv.lo + iv.hi);
  fit_into(f, {iv.lo, mid}, opt, depth + 1, out);
  fit_into(f, {mid, iv.hi}, opt, depth + 1, out);
}

}  // namespace

PiecewiseChebyshev fit_adaptive(const std::function<double(double)>& f, Interval interval, const FitOptions& options) {
  std::vector<ChebyshevSeries> pieces;
  fit_into(f, interval, options, 0, pieces);
  return PiecewiseChebyshev(std::move(pieces));
}

}  // namespace qsa
