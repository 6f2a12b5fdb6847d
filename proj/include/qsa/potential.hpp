#pragma once

#include <array>
#include <string>
#include <vector>

#include "qsa/chebyshev.hpp"
#include "qsa/momentum.hpp"

namespace qsa {

/// Distance from a fixed point inside which Psi' is taken from the fixed-point limit.
inline constexpr double kFixedPointWindow = 1e-6;

/// Psi'(x) away from the fixed points (solvability of the first corrector).
/// Throws DenominatorVanishes when l.H_p collapses off a fixed point.
double psi_prime(const MomentumBranch& branch, double x);

/// Limit of Psi' at fixed point index k (0: x-, 1: x*, 2: x+).
double psi_prime_at_fixed_point(const MomentumBranch& branch, int k);

/// psi_prime with the removable singularities filled in: the fixed-point value
/// at the fixed points and a quadratic bridge inside kFixedPointWindow.
double psi_prime_regular(const MomentumBranch& branch, double x);

/// Phi and Psi on the branch domain, split at the fixed points,
/// normalized so that Phi(x-) = Psi(x-) = 0.
struct PotentialPair {
  Variant variant = Variant::Discrete;
  FixedPointSet fixed_points;
  Interval domain;
  double epsilon = 0.0;
  PiecewiseChebyshev dphi;
  PiecewiseChebyshev dpsi;
  PiecewiseChebyshev phi;
  PiecewiseChebyshev psi;

  double Phi(double x) const { return phi(x); }
  double Psi(double x) const { return psi(x); }
  /// Phi at (x-, x*, x+).
  std::array<double, 3> phi_at_fixed_points() const;
  std::array<double, 3> psi_at_fixed_points() const;
  /// Phi(x*) - Phi(x-/+).
  double barrier(int well) const;
  double psi_barrier(int well) const;
};

PotentialPair build_potential(const MomentumBranch& branch, const FitOptions& options = {});

/// Vector density w(x) exp(-Phi/eps - Psi), its marginal and the landscape -eps ln u.
struct QuasiStationaryDensity {
  double epsilon = 0.0;
  std::vector<double> x;
  /// states x points
  MatrixXd density;
  MatrixXd w;
  std::vector<double> marginal;
  std::vector<double> landscape;
  /// ln of the trapezoid normalization applied to the marginal.
  double log_normalization = 0.0;
};

/// Evaluates on `grid` (ascending). Computation is done in log space.
QuasiStationaryDensity quasi_stationary_density(const PotentialPair& pair, const MomentumBranch& branch,
                                                double epsilon, const std::vector<double>& grid,
                                                bool parallel = true);

/// Uniform grid of n points over the pair's domain.
std::vector<double> uniform_grid(const Interval& interval, int n);

/// Density at n = 0 from the lattice balance at the origin, given the
/// density vector at x = 1/alpha_e. Throws SingularMatrix.
VectorXd small_copy_correction(const ModelSpec& spec, const ModelParams& params, const VectorXd& at_first_site);

/// Region x < 3/alpha_e where Psi is not trusted.
bool in_small_copy_region(double x, const ModelParams& params);

/// Columns x, phi, psi, landscape, w0..w(M-1).
void write_landscape_csv(const std::string& path, const PotentialPair& pair, const QuasiStationaryDensity& density);

}  // namespace qsa
