#pragma once

#include <functional>
#include <vector>

#include "qsa/model.hpp"

namespace qsa {

/// Chebyshev series sum c_k T_k(t) on an interval mapped to t in [-1, 1].
class ChebyshevSeries {
 public:
  ChebyshevSeries() = default;
  ChebyshevSeries(Interval interval, std::vector<double> coeffs);

  /// Interpolant through values at the Chebyshev-Lobatto points of lobatto_nodes(n, interval).
  static ChebyshevSeries from_lobatto_values(Interval interval, const std::vector<double>& values);
  /// n+1 Lobatto points in ascending order.
  static std::vector<double> lobatto_nodes(int n, Interval interval);

  double operator()(double x) const;
  ChebyshevSeries derivative() const;
  /// Antiderivative vanishing at the left end.
  ChebyshevSeries antiderivative() const;

  const Interval& interval() const { return interval_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  ChebyshevSeries& operator+=(double c);

 private:
  Interval interval_{};
  std::vector<double> coeffs_;
};

struct FitOptions {
  double tol = 1e-9;
  int min_degree = 16;
  int max_degree = 256;
  /// Halvings allowed when the degree cap is reached.
  int max_splits = 6;
  bool parallel = true;
};

/// Piecewise series over consecutive intervals.
class PiecewiseChebyshev {
 public:
  PiecewiseChebyshev() = default;
  explicit PiecewiseChebyshev(std::vector<ChebyshevSeries> pieces);

  double operator()(double x) const;
  PiecewiseChebyshev derivative() const;
  /// Continuous antiderivative, zero at the left end of the first piece.
  PiecewiseChebyshev antiderivative() const;
  PiecewiseChebyshev& operator+=(double c);
  void append(const PiecewiseChebyshev& other);

  const std::vector<ChebyshevSeries>& pieces() const { return pieces_; }
  double lo() const { return pieces_.front().interval().lo; }
  double hi() const { return pieces_.back().interval().hi; }
  int max_degree() const;

 private:
  std::vector<ChebyshevSeries> pieces_;
};

/// Adaptive fit: degree doubling until the interpolant reproduces f at the new
/// Lobatto points within tol * max(1, |f|_inf); bisects the interval when the
/// degree cap is reached. Throws FitToleranceNotMet when splitting is exhausted.
PiecewiseChebyshev fit_adaptive(const std::function<double(double)>& f, Interval interval,
                                const FitOptions& options = {});

}  // namespace qsa
