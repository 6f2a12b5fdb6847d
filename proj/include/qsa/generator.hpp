#pragma once

#include <Eigen/Sparse>

#include <vector>

#include "qsa/model.hpp"

namespace qsa {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lattice scales: internal switching alpha_i, external copy-number scale alpha_e (x = n / alpha_e).
struct LatticeRates {
  double alpha_i = 100.0;
  double alpha_e = 100.0;
  static LatticeRates from(const ModelParams& p) { return {p.alpha_i(), p.alpha_e()}; }
};

enum class BoundaryMode { Reflecting, Absorbing };
enum class Well { Left, Right };

/// Column-convention generator (dp/dt = G p) of the truncated master equation.
/// State (n, s) has index states * (n - n_lo) + s.
struct GeneratorMatrix {
  SparseMatrix G;
  int states = 2;
  int n_max = 0;
  /// Smallest and largest lattice site kept.
  int n_lo = 0;
  int n_hi = 0;
  BoundaryMode mode = BoundaryMode::Reflecting;
  Well well = Well::Left;
  /// Absorbing site round(alpha_e x*) (absorbing mode only).
  int n_star = -1;
  LatticeRates rates;

  int index(int n, int s) const { return states * (n - n_lo) + s; }
  int size() const { return static_cast<int>(G.rows()); }
  /// Column sums accumulated as (sum of off-diagonals) + diagonal.
  std::vector<double> column_sums() const;
};

/// Births alpha_e W+(n/alpha_e | s), deaths alpha_e W-(n/alpha_e | s), switching alpha_i A(n/alpha_e).
/// Reflecting mode drops births out of n_max. Absorbing mode keeps the sites on the
/// chosen side of n_star = round(alpha_e x*) and lets mass leak into n_star.
GeneratorMatrix build_generator(const ModelSpec& spec, const LatticeRates& rates, int n_max,
                                BoundaryMode mode = BoundaryMode::Reflecting, Well well = Well::Left,
                                double x_star = 0.0);

/// Built-in example with n_max defaulting to 3 alpha_e.
GeneratorMatrix build_generator(const ModelParams& params, int n_max = -1,
                                BoundaryMode mode = BoundaryMode::Reflecting, Well well = Well::Left);

/// Reduced one-state chain of the adiabatic limit: births alpha_e rho.W+, deaths alpha_e rho.W-.
GeneratorMatrix build_adiabatic_generator(const ModelSpec& spec, double alpha_e, int n_max);

struct LatticeDensity {
  /// Probability per (n, s), index states * (n - n_lo) + s.
  VectorXd p;
  int states = 2;
  int n_lo = 0;
  double residual = 0.0;
  /// Marginal over the internal state, one entry per site.
  VectorXd marginal() const;
};

/// Normalized nonnegative nullvector of a reflecting generator. Throws
/// TruncationTooSmall when mass within five sites of n_max exceeds 1e-10,
/// NullspaceDegenerate when the solve does not give a clean nullvector.
LatticeDensity stationary_density_numeric(const GeneratorMatrix& gen);

/// Dense Grassmann-Taylor-Heyman elimination; subtraction-free, used as an oracle.
VectorXd stationary_gth(const MatrixXd& g);

/// Smallest-magnitude eigenvalue magnitude of an absorbing generator by inverse power iteration.
/// Throws IterationStalled.
double principal_eigenvalue_numeric(const GeneratorMatrix& gen, int max_iterations = 500);

/// Mean absorption time from each kept state (backward equation).
VectorXd mean_exit_times_numeric(const GeneratorMatrix& gen);

/// Mean absorption time starting at site n with the internal state drawn from rho(n/alpha_e).
double mean_exit_time_numeric(const GeneratorMatrix& gen, const ModelSpec& spec, int n_start);

/// Product-form stationary law of the reduced chain, pi(n+1)/pi(n) = birth(n)/death(n+1).
VectorXd adiabatic_product_form(const ModelSpec& spec, double alpha_e, int n_max);

}  // namespace qsa
