#pragma once

#include <vector>

#include "qsa/hamiltonian.hpp"
#include "qsa/polynomial.hpp"

namespace qsa {

struct BranchOptions {
  int grid_points = 1024;
  /// Distance kept from a lower boundary where an external rate vanishes.
  double lower_cutoff = 0.005;
  /// Distance kept from the ends of the velocity-jump support.
  double support_margin = 0.005;
  /// One-sided perturbation used to leave each fixed point.
  double fixed_point_offset = 1e-4;
};

/// Nontrivial factor of the matrix-variant Hamiltonian: a polynomial in
/// q = exp(phi p) for Discrete and in p otherwise, with the trivial root removed.
Poly momentum_polynomial(Variant variant, const ModelSpec& spec, double x);

/// Real candidate momenta at x (positive-q roots mapped to p for Discrete).
std::vector<double> momentum_candidates(Variant variant, const ModelSpec& spec, double x);

/// Interval on which the variant's branch is computed.
Interval admissible_domain(Variant variant, const ModelSpec& spec, const FixedPointSet& fp,
                           const BranchOptions& options = {});

/// The physical root p = Phi'(x), tabulated on a grid by continuation from the fixed points.
/// Off-grid evaluation re-solves the polynomial and picks the root nearest the interpolant.
class MomentumBranch {
 public:
  MomentumBranch(Variant variant, ModelSpec spec, FixedPointSet fp, Interval domain, std::vector<double> grid,
                 std::vector<double> values);

  Variant variant() const { return variant_; }
  const ModelSpec& spec() const { return spec_; }
  const FixedPointSet& fixed_points() const { return fp_; }
  const Interval& domain() const { return domain_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  double p(double x) const;
  /// exp(phi p), meaningful for the Discrete variant.
  double q(double x) const;
  NullPair null_pair(double x) const;
  /// Phi''(x) = -H_x/H_p, through the deflated Hamiltonian near fixed points.
  double phi_second(double x) const;
  /// dw/dx along the branch from the differentiated null-vector equation.
  VectorXd w_derivative(double x) const;
  /// Index of the fixed point within distance tol of x, or -1.
  int near_fixed_point(double x, double tol) const;
  /// Phi'' and Phi''' at fixed point k (0: x-, 1: x*, 2: x+).
  double fixed_point_curvature(int k) const { return fixed_curvature_[k]; }
  double fixed_point_third(int k) const { return fixed_third_[k]; }

 private:
  Variant variant_;
  ModelSpec spec_;
  FixedPointSet fp_;
  Interval domain_;
  std::vector<double> grid_;
  std::vector<double> values_;
  double fixed_curvature_[3];
  double fixed_third_[3];
};

MomentumBranch solve_momentum(Variant variant, const ModelSpec& spec, const BranchOptions& options = {});
MomentumBranch solve_momentum(Variant variant, const ModelSpec& spec, const FixedPointSet& fp,
                              const BranchOptions& options = {});

}  // namespace qsa
