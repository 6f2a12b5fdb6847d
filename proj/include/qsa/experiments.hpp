#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsa/config.hpp"
#include "qsa/escape.hpp"
#include "qsa/ssa.hpp"

namespace qsa {

/// Phi' of the velocity-jump limit of the example, valid for sigma < x < 1.
double velocity_jump_momentum_exact(double beta, double sigma, double x);

/// Landscape -eps ln(u) and conditional distribution of a lattice density, one entry per site.
struct NumericLandscape {
  std::vector<double> x;
  std::vector<double> landscape;
  MatrixXd w;
};

NumericLandscape numeric_landscape(const LatticeDensity& density, double epsilon, double alpha_e);

/// Constant c minimizing max |a + c - b| (midrange of b - a).
double alignment_constant(const std::vector<double>& a, const std::vector<double>& b);

/// Analytic landscape sampled at the lattice sites inside the branch domain.
struct LandscapeComparison {
  Variant variant = Variant::Discrete;
  QuasiStationaryDensity analytic;
  /// Lattice index of each analytic point.
  std::vector<int> sites;
  std::vector<double> numeric;
  /// analytic + alignment - numeric
  std::vector<double> error;
  /// 1-norm of the conditional-distribution error.
  std::vector<double> w_error;
  double alignment = 0.0;
  /// max |error| over the comparison window.
  double max_error = 0.0;
};

/// Alignment and max error are taken over x in [window_lo, window_hi].
LandscapeComparison compare_landscape(const PotentialPair& pair, const MomentumBranch& branch,
                                      const NumericLandscape& numeric, double epsilon, double alpha_e,
                                      double window_lo, double window_hi, bool parallel = true);

/// Parameters of a sweep point (epsilon, alpha_i or alpha_e replaced).
ModelParams sweep_point(const ModelParams& base, const std::string& name, double value);

struct VariantEscape {
  Variant variant = Variant::Discrete;
  std::optional<EscapeRateResult> result;
  /// Error kind when the variant failed at this point.
  std::string status = "ok";
};

struct SweepRow {
  double value = 0.0;
  ModelParams params;
  std::vector<VariantEscape> variants;
  double numeric_lambda = std::nan("");
  double ssa_mean = std::nan("");
  double ssa_stderr = std::nan("");
  int ssa_count = 0;
  /// ok, truncated, skipped_budget, not_requested, or an error kind.
  std::string ssa_status = "not_requested";
  double predicted_events = std::nan("");
};

struct SweepOptions {
  bool run_ssa = true;
  bool run_numeric = true;
  bool parallel = true;
};

/// Analytic and numeric rates for every sweep point (points run concurrently),
/// then budgeted SSA ensembles point by point. Rows are in sweep order.
std::vector<SweepRow> exit_time_sweep(const ExperimentConfig& cfg, const std::string& name,
                                      const std::vector<double>& values, const SweepOptions& options = {});

/// Writes the fully resolved config to dir/config.json, creating dir.
void write_config_echo(const ExperimentConfig& cfg, const std::string& dir);

struct LandscapeReport {
  std::map<std::string, double> alignment;
  std::map<std::string, double> max_error;
  bool numeric_computed = false;
  std::string notice;
};

LandscapeReport cmd_landscape(const ExperimentConfig& cfg, const std::string& out_dir);
std::vector<SweepRow> cmd_exit_times(const ExperimentConfig& cfg, const std::string& out_dir);
BifurcationWindow cmd_bifurcation(const ExperimentConfig& cfg, const std::string& out_dir);
/// Returns the number of events written.
std::int64_t cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

struct LimitReport {
  std::vector<double> phis;
  /// Sup error over [sigma + 0.01, 0.99] per phi.
  std::vector<double> momentum_error;
  std::vector<double> probe_x;
  /// Error at each probe_x, one row per phi.
  std::vector<std::vector<double>> pointwise_error;
  std::vector<double> alpha_i;
  std::vector<double> log_gap;
};

/// Discrete momentum vs the velocity-jump closed form as phi -> 0, and
/// |ln T_qss - ln T_discrete| as alpha_i grows at fixed alpha_e.
LimitReport cmd_compare_limits(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace qsa
