#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qsa/potential.hpp"

namespace qsa {

/// Solution of A(x*)^T zeta = v(x*), minimal norm.
struct GeneralizedEigenvector {
  VectorXd zeta;
  double residual = 0.0;
  /// rho(x*).v(x*), zero at a fixed point.
  double solvability = 0.0;
};

/// Throws SolvabilityViolated if rho.v does not vanish at x_star.
GeneralizedEigenvector solve_zeta(const ModelSpec& spec, double x_star);

/// B = sum_s rho(s|x*) (b(s, x*) - v(s, x*) zeta(s)).
double boundary_factor_B(const ModelSpec& spec, double x_star, const VectorXd& zeta);

/// Variant-specific B entering the rate formula. Matrix variants use the
/// general expression (b = 0 for the velocity-jump limit); the QSS diffusion
/// uses its diffusivity at x*; the adiabatic chain uses phi x* (epsilon units).
double variant_boundary_factor(Variant variant, const ModelSpec& spec, double x_star);

struct WellRate {
  double lambda = 0.0;
  double T = 0.0;
  double barrier = 0.0;
  double psi_barrier = 0.0;
  double curvature_well = 0.0;
};

struct EscapeRateResult {
  Variant variant = Variant::Discrete;
  double epsilon = 0.0;
  double B = 0.0;
  double curvature_star = 0.0;
  WellRate minus;
  WellRate plus;
  /// well < 0 selects x-, otherwise x+.
  const WellRate& well(int w) const { return w < 0 ? minus : plus; }
};

/// lambda = (B/pi) sqrt(|Phi''(x*)| Phi''(x_well)) exp(-(Psi(x*) - Psi(x_well))) exp(-(Phi(x*) - Phi(x_well))/eps).
/// Throws WrongCurvatureSign unless Phi''(x*) < 0 < Phi''(x-/+).
EscapeRateResult principal_eigenvalue(const PotentialPair& pair, const ModelSpec& spec, double epsilon);

/// Boundary-layer modes at x*: gamma_j of (A^T - gamma V + gamma^2 diag b) Y = 0
/// for the semi-continuous process, mu_j of
/// (mu^2 W+ + mu (phi A^T - W+ - W-) + W-) G = 0 for the discrete one.
struct BoundaryLayerModes {
  Variant variant = Variant::SemiContinuous;
  /// All 2M eigenvalues of the companion linearization.
  std::vector<cplx> eigenvalues;
  /// The two eigenvalues forming the degenerate pair (gamma = 0 or mu = 1).
  std::pair<cplx, cplx> degenerate;
  /// Retained decaying modes (gamma > 0, or |mu| < 1) and their vectors as columns.
  std::vector<double> rates;
  MatrixXd vectors;
  /// Coefficients (c_1, c_2, ..., c_M) of 1, Y_2, ..., Y_M expanding sqrt(2|Phi''|/pi) zeta.
  VectorXd coefficients;
  VectorXd zeta;
  /// B recomputed through the boundary-layer expression.
  double B = 0.0;
};

/// Throws ModeCountMismatch when the number of decaying modes differs from M - 1.
BoundaryLayerModes boundary_layer_modes(Variant variant, const ModelSpec& spec, double x_star, double curvature_star);

/// Solution of the two-well occupation dynamics q-' = -l- q- + l+ q+ with q- + q+ = 1.
std::pair<double, double> metastable_weights(double lambda_minus, double lambda_plus, double t, bool start_left);

struct EscapeRow {
  EscapeRateResult result;
  double phi = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
};

/// Columns variant, well, epsilon, phi, beta, sigma, barrier, B, curvature_star, curvature_well, lambda, T.
void write_escape_csv(const std::string& path, const std::vector<EscapeRow>& rows);

}  // namespace qsa
