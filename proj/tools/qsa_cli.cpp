#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "qsa/experiments.hpp"

namespace {

int exit_code(qsa::ErrorClass c) {
  switch (c) {
    case qsa::ErrorClass::Validation: return 2;
    case qsa::ErrorClass::Numerical: return 3;
    case qsa::ErrorClass::Budget: return 4;
  }
  return 3;
}

void report_error(const std::string& kind, const std::string& cls, const std::string& message) {
  nlohmann::json j = {{"error", kind}, {"class", cls}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

std::string class_name(qsa::ErrorClass c) {
  switch (c) {
    case qsa::ErrorClass::Validation: return "validation";
    case qsa::ErrorClass::Numerical: return "numerical";
    case qsa::ErrorClass::Budget: return "budget";
  }
  return "numerical";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-stationary analysis of the stochastic gene switch"};
  app.require_subcommand(1);
  std::string config_path, out_dir, variants, sweep, values;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", seed, "SSA seed (overrides the config)");
    cmd->add_option("--variants", variants, "Comma-separated variant list");
  };
  CLI::App* landscape = app.add_subcommand("landscape", "Stability landscapes and the lattice ground truth");
  CLI::App* exit_times = app.add_subcommand("exit-times", "Mean exit times over a parameter sweep");
  CLI::App* bifurcation = app.add_subcommand("bifurcation", "Fixed points against beta");
  CLI::App* simulate = app.add_subcommand("simulate", "One seeded SSA path");
  CLI::App* limits = app.add_subcommand("compare-limits", "Convergence towards the reduced limits");
  for (CLI::App* cmd : {landscape, exit_times, bifurcation, simulate, limits}) add_common(cmd);
  for (CLI::App* cmd : {exit_times, limits}) {
    cmd->add_option("--sweep", sweep, "epsilon, alpha_i or alpha_e");
    cmd->add_option("--values", values, "Comma-separated sweep values (ratios like 1/50 allowed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("InvalidArguments", "validation", e.what());
    return 2;
  }

  if (const char* threads = std::getenv("QSA_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }

  try {
    qsa::ExperimentConfig cfg = config_path.empty()
                                    ? qsa::ExperimentConfig::from_json({{"model", {{"epsilon", 0.01}}}})
                                    : qsa::ExperimentConfig::load(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (seed != 0) cfg.ssa.seed = seed;
    if (!variants.empty()) cfg.variants = qsa::parse_variant_list(variants);
    if (!sweep.empty()) cfg.sweep.name = sweep;
    if (!values.empty()) cfg.sweep.values = qsa::parse_number_list(values);

    if (*landscape) {
      const qsa::LandscapeReport r = qsa::cmd_landscape(cfg, cfg.output);
      for (const auto& [name, c] : r.alignment)
        std::cout << name << ": alignment " << c << ", max error " << r.max_error.at(name) << '\n';
    } else if (*exit_times) {
      if (cfg.sweep.values.empty()) cfg.sweep.values = {cfg.params.epsilon};
      const auto rows = qsa::cmd_exit_times(cfg, cfg.output);
      for (const auto& row : rows) std::cout << cfg.sweep.name << "=" << row.value << " ssa " << row.ssa_status << '\n';
    } else if (*bifurcation) {
      const qsa::BifurcationWindow w = qsa::cmd_bifurcation(cfg, cfg.output);
      std::cout << "bistable for beta in [" << w.beta_minus << ", " << w.beta_plus << "]\n";
    } else if (*simulate) {
      std::cout << qsa::cmd_simulate(cfg, cfg.output) << " events\n";
    } else if (*limits) {
      const qsa::LimitReport r = qsa::cmd_compare_limits(cfg, cfg.output);
      for (std::size_t k = 0; k < r.phis.size(); ++k)
        std::cout << "phi=" << r.phis[k] << " momentum error " << r.momentum_error[k] << '\n';
      for (std::size_t k = 0; k < r.alpha_i.size(); ++k)
        std::cout << "alpha_i=" << r.alpha_i[k] << " |ln T_qss - ln T_discrete| " << r.log_gap[k] << '\n';
    }
  } catch (const qsa::Error& e) {
    const qsa::ErrorClass c = qsa::classify(e.kind());
    report_error(std::string(qsa::to_string(e.kind())), class_name(c), e.detail());
    return exit_code(c);
  } catch (const std::exception& e) {
    report_error("Internal", "numerical", e.what());
    return 3;
  }
  return 0;
}
