#include "qsa/experiments.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "qsa/csv.hpp"

namespace qsa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot open " + path);
  out << j.dump(2) << '\n';
}

int start_site(const FixedPointSet& fp, Well well, double alpha_e) {
  return static_cast<int>(std::lround(alpha_e * (well == Well::Left ? fp.x_minus : fp.x_plus)));
}

// Mean total event rate at site n with s drawn from rho.
double event_rate(const ModelSpec& spec, const LatticeRates& rates, int n) {
  const double x = n / rates.alpha_e;
  const VectorXd rho = qss_distribution(spec, x);
  const MatrixXd a = spec.A(x);
  const VectorXd wp = spec.w_plus(x), wm = spec.w_minus(x);
  double r = 0.0;
  for (int s = 0; s < spec.states(); ++s)
    r += rho(s) * (rates.alpha_e * (wp(s) + wm(s)) - rates.alpha_i * a(s, s));
  return r;
}

}  // namespace

double velocity_jump_momentum_exact(double beta, double sigma, double x) {
  return beta / (1.0 - x) + x * x / (sigma - x);
}

NumericLandscape numeric_landscape(const LatticeDensity& density, double epsilon, double alpha_e) {
  NumericLandscape out;
  const VectorXd u = density.marginal();
  const int sites = static_cast<int>(u.size());
  out.w.resize(density.states, sites);
  for (int i = 0; i < sites; ++i) {
    out.x.push_back((density.n_lo + i) / alpha_e);
    out.landscape.push_back(u(i) > 0.0 ? -epsilon * std::log(u(i)) : std::numeric_limits<double>::infinity());
    out.w.col(i) = u(i) > 0.0 ? VectorXd(density.p.segment(density.states * i, density.states) / u(i))
                              : VectorXd::Constant(density.states, kNaN);
  }
  return out;
}

double alignment_constant(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) throw Error(ErrorKind::InvalidConfig, "alignment needs equal nonempty series");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lo = std::min(lo, b[i] - a[i]);
    hi = std::max(hi, b[i] - a[i]);
  }
  return 0.5 * (lo + hi);
}

LandscapeComparison compare_landscape(const PotentialPair& pair, const MomentumBranch& branch,
                                      const NumericLandscape& numeric, double epsilon, double alpha_e,
                                      double window_lo, double window_hi, bool parallel) {
  LandscapeComparison out;
  out.variant = pair.variant;
  std::vector<double> grid;
  const int n_lo = static_cast<int>(std::ceil(pair.domain.lo * alpha_e - 1e-9));
  const int n_hi = std::min(static_cast<int>(std::floor(pair.domain.hi * alpha_e + 1e-9)),
                            static_cast<int>(numeric.x.size()) - 1);
  for (int n = n_lo; n <= n_hi; ++n) {
    const double x = std::clamp(n / alpha_e, pair.domain.lo, pair.domain.hi);
    grid.push_back(x);
    out.sites.push_back(n);
  }
  if (grid.size() < 3) throw Error(ErrorKind::InvalidConfig, "too few lattice sites inside the branch domain");
  out.analytic = quasi_stationary_density(pair, branch, epsilon, grid, parallel);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.numeric.push_back(numeric.landscape[out.sites[i]]);
    if (grid[i] >= window_lo && grid[i] <= window_hi) {
      a.push_back(out.analytic.landscape[i]);
      b.push_back(out.numeric.back());
    }
  }
  out.alignment = alignment_constant(a, b);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.error.push_back(out.analytic.landscape[i] + out.alignment - out.numeric[i]);
    out.w_error.push_back((out.analytic.w.col(i) - numeric.w.col(out.sites[i])).lpNorm<1>());
    if (grid[i] >= window_lo && grid[i] <= window_hi) out.max_error = std::max(out.max_error, std::abs(out.error.back()));
  }
  return out;
}

ModelParams sweep_point(const ModelParams& base, const std::string& name, double value) {
  if (!(value > 0.0)) throw Error(ErrorKind::InvalidConfig, "sweep values must be positive");
  if (name == "epsilon") {
    ModelParams p = base;
    p.epsilon = value;
    return p;
  }
  if (!(base.epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "rate sweeps need a finite base epsilon");
  if (name == "alpha_i") return ModelParams::from_rates(base.beta, base.sigma, value, base.alpha_e());
  if (name == "alpha_e") return ModelParams::from_rates(base.beta, base.sigma, base.alpha_i(), value);
  throw Error(ErrorKind::InvalidConfig, "sweep must be epsilon, alpha_i or alpha_e, got '" + name + "'");
}

std::vector<SweepRow> exit_time_sweep(const ExperimentConfig& cfg, const std::string& name,
                                      const std::vector<double>& values, const SweepOptions& options) {
  if (values.empty()) throw Error(ErrorKind::InvalidConfig, "sweep has no values");
  const int count = static_cast<int>(values.size());
  std::vector<SweepRow> rows(count);
  for (int i = 0; i < count; ++i) {
    rows[i].value = values[i];
    rows[i].params = sweep_point(cfg.params, name, values[i]);
    rows[i].params.validate();
  }
  FitOptions fit;
  fit.parallel = false;
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1) if (options.parallel)
  for (int i = 0; i < count; ++i) {
    try {
      SweepRow& row = rows[i];
      const ModelSpec spec = ModelSpec::gene_switch(row.params, cfg.domain);
      const FixedPointSet fp = find_fixed_points(spec);
      for (Variant v : cfg.variants) {
        VariantEscape ve;
        ve.variant = v;
        try {
          const PotentialPair pair = build_potential(solve_momentum(v, spec, fp), fit);
          ve.result = principal_eigenvalue(pair, spec, row.params.epsilon);
        } catch (const Error& e) {
          if (classify(e.kind()) == ErrorClass::Validation) throw;
          ve.status = std::string(to_string(e.kind()));
        }
        row.variants.push_back(std::move(ve));
      }
      if (options.run_numeric) {
        try {
          const GeneratorMatrix gen = build_generator(spec, LatticeRates::from(row.params),
                                                      static_cast<int>(std::ceil(3.0 * row.params.alpha_e())),
                                                      BoundaryMode::Absorbing, cfg.ssa.well, fp.x_star);
          row.numeric_lambda = principal_eigenvalue_numeric(gen);
        } catch (const Error& e) {
          if (classify(e.kind()) == ErrorClass::Validation) throw;
        }
      }
    } catch (...) {
#pragma omp critical(qsa_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  if (!options.run_ssa) return rows;
  for (int i = 0; i < count; ++i) {
    SweepRow& row = rows[i];
    const ModelSpec spec = ModelSpec::gene_switch(row.params, cfg.domain);
    const LatticeRates rates = LatticeRates::from(row.params);
    const FixedPointSet fp = find_fixed_points(spec);
    double t_pred = kNaN;
    for (const VariantEscape& ve : row.variants) {
      if (!ve.result) continue;
      t_pred = ve.result->well(cfg.ssa.well == Well::Left ? -1 : 1).T;
      if (ve.variant == Variant::Discrete) break;
    }
    if (std::isfinite(row.numeric_lambda) && !std::isfinite(t_pred)) t_pred = 1.0 / row.numeric_lambda;
    row.predicted_events = t_pred * event_rate(spec, rates, start_site(fp, cfg.ssa.well, rates.alpha_e));
    if (!(row.predicted_events <= static_cast<double>(cfg.ssa.max_events) / cfg.ssa.overhead)) {
      row.ssa_status = "skipped_budget";
      continue;
    }
    SsaOptions so;
    so.samples = cfg.ssa.samples;
    so.max_events = cfg.ssa.max_events;
    so.seed = cfg.ssa.seed + 1'000'003ULL * static_cast<std::uint64_t>(i);
    so.parallel = options.parallel;
    const FirstPassageStats st = gillespie_exit_time(spec, rates, cfg.ssa.well, so);
    row.ssa_mean = st.mean;
    row.ssa_stderr = st.stderr_mean;
    row.ssa_count = st.count;
    row.ssa_status = st.complete() ? "ok" : "truncated";
  }
  return rows;
}

void write_config_echo(const ExperimentConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  write_json(path_in(dir, "config.json"), cfg.to_json());
}

LandscapeReport cmd_landscape(const ExperimentConfig& cfg, const std::string& out_dir) {
  write_config_echo(cfg, out_dir);
  const ModelParams& prm = cfg.params;
  const ModelSpec spec = ModelSpec::gene_switch(prm, cfg.domain);
  const FixedPointSet fp = find_fixed_points(spec);
  const double eps = prm.epsilon;
  LandscapeReport report;

  std::optional<NumericLandscape> numeric;
  double alpha_e = 0.0;
  if (eps > 0.0) {
    alpha_e = prm.alpha_e();
    const GeneratorMatrix gen = build_generator(prm, cfg.n_max);
    const LatticeDensity dens = stationary_density_numeric(gen);
    numeric = numeric_landscape(dens, eps, alpha_e);
    report.numeric_computed = true;
    CsvWriter csv(path_in(out_dir, "landscape_numeric.csv"), "landscape_numeric", {"n", "x", "landscape", "w0", "w1"});
    for (std::size_t i = 0; i < numeric->x.size(); ++i)
      csv.row({static_cast<double>(i), numeric->x[i], numeric->landscape[i], numeric->w(0, i), numeric->w(1, i)});
  } else {
    report.notice = "epsilon = 0: the lattice density does not exist in this limit; numeric landscape skipped";
    std::cerr << "notice: " << report.notice << '\n';
  }

  const double window_lo = eps > 0.0 ? 3.0 / alpha_e : 0.0;
  const double window_hi = 0.9;
  for (Variant v : cfg.variants) {
    const MomentumBranch branch = solve_momentum(v, spec, fp);
    const PotentialPair pair = build_potential(branch);
    const std::string name(to_string(v));
    std::vector<std::string> cols{"x", "phi", "psi", "landscape"};
    for (int s = 0; s < spec.states(); ++s) cols.push_back("w" + std::to_string(s));
    if (numeric) {
      cols.insert(cols.end(), {"numeric_landscape", "landscape_error", "w_error"});
      const LandscapeComparison cmp =
          compare_landscape(pair, branch, *numeric, eps, alpha_e, window_lo, window_hi);
      report.alignment[name] = cmp.alignment;
      report.max_error[name] = cmp.max_error;
      CsvWriter csv(path_in(out_dir, "landscape_" + name + ".csv"), "landscape", cols);
      for (std::size_t i = 0; i < cmp.analytic.x.size(); ++i) {
        const double x = cmp.analytic.x[i];
        std::vector<double> r{x, pair.Phi(x), pair.Psi(x), cmp.analytic.landscape[i] + cmp.alignment};
        for (int s = 0; s < spec.states(); ++s) r.push_back(cmp.analytic.w(s, i));
        r.insert(r.end(), {cmp.numeric[i], cmp.error[i], cmp.w_error[i]});
        csv.row(r);
      }
    } else {
      const QuasiStationaryDensity dens =
          quasi_stationary_density(pair, branch, 0.0, uniform_grid(pair.domain, cfg.grid));
      CsvWriter csv(path_in(out_dir, "landscape_" + name + ".csv"), "landscape", cols);
      for (std::size_t i = 0; i < dens.x.size(); ++i) {
        const double x = dens.x[i];
        std::vector<double> r{x, pair.Phi(x), pair.Psi(x), dens.landscape[i]};
        for (int s = 0; s < spec.states(); ++s) r.push_back(dens.w(s, i));
        csv.row(r);
      }
    }
  }
  json summary = {{"numeric", report.numeric_computed},
                  {"window", {window_lo, window_hi}},
                  {"alignment", report.alignment},
                  {"max_error", report.max_error}};
  if (!report.notice.empty()) summary["notice"] = report.notice;
  write_json(path_in(out_dir, "landscape_summary.json"), summary);
  return report;
}

std::vector<SweepRow> cmd_exit_times(const ExperimentConfig& cfg, const std::string& out_dir) {
  write_config_echo(cfg, out_dir);
  const std::vector<SweepRow> rows = exit_time_sweep(cfg, cfg.sweep.name, cfg.sweep.values);
  const std::string own_well = cfg.ssa.well == Well::Left ? "left" : "right";
  CsvWriter csv(path_in(out_dir, "exit_times.csv"), "exit_times",
                {"sweep", "value", "variant", "well", "epsilon", "phi", "beta", "sigma", "alpha_i", "alpha_e",
                 "barrier", "B", "curvature_star", "curvature_well", "lambda", "T", "status", "numeric_lambda",
                 "ssa_mean", "ssa_stderr", "ssa_count", "ssa_status"});
  for (const SweepRow& row : rows) {
    const ModelParams& p = row.params;
    for (const VariantEscape& ve : row.variants) {
      for (int well : {-1, 1}) {
        const std::string wname = well < 0 ? "left" : "right";
        const bool own = wname == own_well;
        std::vector<std::string> f{cfg.sweep.name,         format_number(row.value), std::string(to_string(ve.variant)),
                                   wname,                  format_number(p.epsilon), format_number(p.phi),
                                   format_number(p.beta),  format_number(p.sigma),   format_number(p.alpha_i()),
                                   format_number(p.alpha_e())};
        if (ve.result) {
          const WellRate& w = ve.result->well(well);
          f.insert(f.end(), {format_number(w.barrier), format_number(ve.result->B),
                             format_number(ve.result->curvature_star), format_number(w.curvature_well),
                             format_number(w.lambda), format_number(w.T)});
        } else {
          f.insert(f.end(), 6, "");
        }
        f.push_back(ve.status);
        f.push_back(own ? format_number(row.numeric_lambda) : "");
        f.push_back(own ? format_number(row.ssa_mean) : "");
        f.push_back(own ? format_number(row.ssa_stderr) : "");
        f.push_back(own && row.ssa_count > 0 ? std::to_string(row.ssa_count) : "");
        f.push_back(own ? row.ssa_status : "");
        csv.row_fields(f);
      }
    }
  }
  return rows;
}

BifurcationWindow cmd_bifurcation(const ExperimentConfig& cfg, const std::string& out_dir) {
  write_config_echo(cfg, out_dir);
  const BifurcationConfig& b = cfg.bifurcation;
  const int steps = static_cast<int>(std::floor((b.beta_hi - b.beta_lo) / b.beta_step + 1e-9)) + 1;
  CsvWriter csv(path_in(out_dir, "bifurcation.csv"), "bifurcation", {"beta", "roots", "x_minus", "x_star", "x_plus"});
  for (int k = 0; k < steps; ++k) {
    ModelParams p = cfg.params;
    p.beta = b.beta_lo + k * b.beta_step;
    const std::vector<double> roots = drift_roots(ModelSpec::gene_switch(p, {0.0, 1.0}), 4096);
    double xm = kNaN, xs = kNaN, xp = kNaN;
    if (roots.size() == 3) {
      xm = roots[0];
      xs = roots[1];
      xp = roots[2];
    } else if (roots.size() == 1) {
      // The lone root continues the lower or the upper stable branch.
      (roots[0] < 1.0 / 3.0 ? xm : xp) = roots[0];
    }
    csv.row({p.beta, static_cast<double>(roots.size()), xm, xs, xp});
  }
  const BifurcationWindow w = bifurcation_scan(cfg.params.sigma, b.beta_lo, b.beta_hi, std::max(steps, 2));
  write_json(path_in(out_dir, "bifurcation_summary.json"),
             {{"sigma", cfg.params.sigma}, {"beta_minus", w.beta_minus}, {"beta_plus", w.beta_plus}});
  return w;
}

std::int64_t cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  write_config_echo(cfg, out_dir);
  const ModelParams& p = cfg.params;
  if (!(p.epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "simulate needs a finite epsilon");
  const ModelSpec spec = ModelSpec::gene_switch(p, cfg.domain);
  const LatticeRates rates = LatticeRates::from(p);
  const FixedPointSet fp = find_fixed_points(spec);
  const int n0 = start_site(fp, cfg.ssa.well, rates.alpha_e);
  const VectorXd rho = qss_distribution(spec, n0 / rates.alpha_e);
  Eigen::Index s0 = 0;
  rho.maxCoeff(&s0);
  const std::vector<TrajectoryEvent> path =
      simulate_trajectory(spec, rates, n0, static_cast<int>(s0), cfg.simulate.max_events, cfg.simulate.t_max,
                          cfg.ssa.seed);
  const int n_star = static_cast<int>(std::lround(rates.alpha_e * fp.x_star));
  int crossings = 0, side = n0 < n_star ? -1 : 1;
  {
    CsvWriter csv(path_in(out_dir, "trajectory.csv"), "trajectory", {"t", "s", "n"});
    for (std::size_t i = 1; i < path.size(); ++i) {
      const TrajectoryEvent& e = path[i];
      csv.row_fields({format_number(e.t), std::to_string(e.s), std::to_string(e.n)});
      const int now = e.n < n_star ? -1 : (e.n > n_star ? 1 : side);
      if (now != side) ++crossings;
      side = now;
    }
  }
  const std::int64_t events = static_cast<std::int64_t>(path.size()) - 1;
  const double t_end = path.back().t;
  write_json(path_in(out_dir, "simulate_summary.json"), {{"n0", n0},
                                                         {"s0", s0},
                                                         {"n_star", n_star},
                                                         {"events", events},
                                                         {"t_end", t_end},
                                                         {"crossings", crossings},
                                                         {"seed", cfg.ssa.seed}});
  if (std::isfinite(cfg.simulate.t_max) && events >= cfg.simulate.max_events)
    throw Error(ErrorKind::MaxEventsExceeded, "event cap reached at t=" + format_number(t_end) +
                                                  " before t_max=" + format_number(cfg.simulate.t_max));
  return events;
}

LimitReport cmd_compare_limits(const ExperimentConfig& cfg, const std::string& out_dir) {
  write_config_echo(cfg, out_dir);
  const ModelParams& base = cfg.params;
  LimitReport report;
  report.phis = {1.0, 0.1, 0.01};
  report.probe_x = {0.05, 0.3, 0.5, 0.7, 0.95};
  {
    std::vector<std::string> cols{"phi", "sup_error"};
    for (double x : report.probe_x) cols.push_back("error_at_" + format_number(x));
    CsvWriter csv(path_in(out_dir, "limits_momentum.csv"), "limits_momentum", cols);
    const FixedPointSet fp0 = find_fixed_points(ModelSpec::gene_switch(base, cfg.domain));
    for (double phi : report.phis) {
      ModelParams p = base;
      p.phi = phi;
      // The small-phi branch is only continued on the support of the limit, x > sigma.
      const Interval dom{std::max(cfg.domain.lo, p.sigma + 0.5 * (fp0.x_minus - p.sigma)), cfg.domain.hi};
      const MomentumBranch br = solve_momentum(Variant::Discrete, ModelSpec::gene_switch(p, dom));
      auto err_at = [&](double x) { return std::abs(br.p(x) - velocity_jump_momentum_exact(p.beta, p.sigma, x)); };
      const double lo = std::max(p.sigma + 0.01, br.domain().lo), hi = std::min(0.99, br.domain().hi);
      double err = 0.0;
      for (int i = 0; i <= 400; ++i) err = std::max(err, err_at(lo + (hi - lo) * i / 400.0));
      std::vector<double> row{phi, err};
      std::vector<double> pointwise;
      for (double x : report.probe_x) pointwise.push_back(err_at(x));
      row.insert(row.end(), pointwise.begin(), pointwise.end());
      report.momentum_error.push_back(err);
      report.pointwise_error.push_back(pointwise);
      csv.row(row);
    }
  }
  const double alpha_e = cfg.rates_given ? base.alpha_e() : 200.0;
  report.alpha_i = cfg.sweep.name == "alpha_i" && !cfg.sweep.values.empty() ? cfg.sweep.values
                                                                              : std::vector<double>{200.0, 400.0, 800.0};
  const int well = cfg.ssa.well == Well::Left ? -1 : 1;
  CsvWriter csv(path_in(out_dir, "limits_rates.csv"), "limits_rates",
                {"alpha_i", "alpha_e", "T_discrete", "T_qss", "log_gap"});
  for (double ai : report.alpha_i) {
    const ModelParams p = ModelParams::from_rates(base.beta, base.sigma, ai, alpha_e);
    const ModelSpec spec = ModelSpec::gene_switch(p, cfg.domain);
    const FixedPointSet fp = find_fixed_points(spec);
    auto T = [&](Variant v) {
      return principal_eigenvalue(build_potential(solve_momentum(v, spec, fp)), spec, p.epsilon).well(well).T;
    };
    const double td = T(Variant::Discrete), tq = T(Variant::QssDiffusion);
    const double gap = std::abs(std::log(tq) - std::log(td));
    report.log_gap.push_back(gap);
    csv.row({ai, alpha_e, td, tq, gap});
  }
  return report;
}

}  // namespace qsa
