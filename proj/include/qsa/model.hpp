#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsa/error.hpp"

namespace qsa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Parameters of the built-in gene-switch model.
struct ModelParams {
  double beta = 0.11;
  double sigma = 0.015;
  double phi = 1.0;      // alpha_i / alpha_e
  double epsilon = 0.0;  // 1 / alpha_i; zero means the asymptotic limit only

  double alpha_i() const { return 1.0 / epsilon; }
  double alpha_e() const { return 1.0 / (phi * epsilon); }

  static ModelParams from_rates(double beta, double sigma, double alpha_i, double alpha_e);

  /// Throws Error(InvalidConfig) if any field is out of range.
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.5;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Map x -> value or derivative of the given order (0..3).
using MatrixField = std::function<MatrixXd(double x, int order)>;
using VectorField = std::function<VectorXd(double x, int order)>;

/// Coupled internal/external process: internal generator A(x), external
/// birth rates W+(x|s) and death rates W-(x|s).
class ModelSpec {
 public:
  ModelSpec(int states, MatrixField a, VectorField w_plus, VectorField w_minus, double phi,
            Interval domain, std::string name = "custom");

  /// The two-state gene switch with A = [[-x^2, beta], [x^2, -beta]],
  /// W+ = (sigma, 1), W- = (x, x).
  static ModelSpec gene_switch(const ModelParams& params, Interval domain = {0.0, 1.5});

  /// Adapter for user models given as plain callables; derivatives are taken
  /// by Richardson-extrapolated central differences.
  static ModelSpec from_callables(int states, std::function<MatrixXd(double)> a,
                                  std::function<VectorXd(double)> w_plus,
                                  std::function<VectorXd(double)> w_minus, double phi,
                                  Interval domain, std::string name = "custom");

  int states() const { return states_; }
  double phi() const { return phi_; }
  const Interval& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  MatrixXd A(double x, int order = 0) const { return a_(x, order); }
  VectorXd w_plus(double x, int order = 0) const { return w_plus_(x, order); }
  VectorXd w_minus(double x, int order = 0) const { return w_minus_(x, order); }
  /// v = W+ - W-
  VectorXd v(double x, int order = 0) const { return w_plus(x, order) - w_minus(x, order); }
  /// b = (phi/2)(W+ + W-)
  VectorXd b(double x, int order = 0) const { return 0.5 * phi_ * (w_plus(x, order) + w_minus(x, order)); }

  /// Set for the built-in example; enables closed-form code paths.
  const std::optional<ModelParams>& gene_switch_params() const { return gene_switch_; }
  bool is_gene_switch() const { return gene_switch_.has_value(); }

  /// True when some external rate vanishes at the lower domain end.
  bool singular_lower_boundary() const;

  /// Same model with a different phi (the built-in example keeps its params in sync).
  ModelSpec with_phi(double phi) const;

 private:
  int states_;
  MatrixField a_;
  VectorField w_plus_;
  VectorField w_minus_;
  double phi_;
  Interval domain_;
  std::string name_;
  std::optional<ModelParams> gene_switch_;
};

/// Richardson-extrapolated central difference of order 1..3.
/// Throws DerivativeUnstable if the two extrapolants disagree beyond 1e-6 relative.
MatrixXd richardson_derivative(const std::function<MatrixXd(double)>& f, double x, int order);
double richardson_derivative(const std::function<double(double)>& f, double x, int order);

struct ValidationIssue {
  ErrorKind kind;
  double x = 0.0;
  int row = -1;
  int col = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool singular_lower_boundary = false;
  bool ok() const { return issues.empty(); }
  /// Throws the first issue as an Error.
  void require() const;
};

ValidationReport validate_model(const ModelSpec& spec, int grid_points = 257);

/// W-matrix check of a single matrix (columns sum to zero, sign pattern, irreducible).
std::vector<ValidationIssue> check_w_matrix(const MatrixXd& a, double x = 0.0, double tol = 1e-12);
bool is_irreducible(const MatrixXd& a);

/// Unique normalized nullvector of a W-matrix (or any rank M-1 matrix with a nonnegative kernel).
VectorXd nullvector(const MatrixXd& a);
VectorXd qss_distribution(const ModelSpec& spec, double x);
/// d/dx of the QSS distribution (closed form for the example, differences otherwise).
VectorXd qss_distribution_derivative(const ModelSpec& spec, double x, int order = 1);

double deterministic_drift(const ModelSpec& spec, double x);

enum class Stability { Stable, Unstable };

struct FixedPointSet {
  double x_minus = 0.0;
  double x_star = 0.0;
  double x_plus = 0.0;
  std::array<Stability, 3> stability{Stability::Stable, Stability::Unstable, Stability::Stable};
  std::array<double, 3> as_array() const { return {x_minus, x_star, x_plus}; }
};

/// All sign changes of the drift on a uniform grid (refined roots).
std::vector<double> drift_roots(const ModelSpec& spec, int grid_points = 2048);

/// Three roots of the drift, bisection then Newton polish to |v| <= 1e-12.
FixedPointSet find_fixed_points(const ModelSpec& spec, int grid_points = 2048);

struct BifurcationWindow {
  double beta_minus = 0.0;
  double beta_plus = 0.0;
};

/// Number of distinct real roots of x^3 - x^2 + beta x - beta sigma in the open unit interval.
int gene_switch_root_count(double beta, double sigma);

/// Saddle-node boundaries of the bistable window of the example model.
BifurcationWindow bifurcation_scan(double sigma, double beta_lo, double beta_hi, int steps);

}  // namespace qsa
