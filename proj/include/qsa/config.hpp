#pragma once

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qsa/hamiltonian.hpp"
#include "qsa/generator.hpp"

namespace qsa {

struct SsaConfig {
  int samples = 1000;
  /// Event cap per sample (exit-times) or per path (simulate).
  std::int64_t max_events = 100'000'000;
  std::uint64_t seed = 1;
  Well well = Well::Left;
  /// Wall-time guard for the sweep pre-pass: predicted events per sample
  /// (T times the start-site event rate) must stay below max_events / overhead.
  double overhead = 4.0;
};

struct SweepConfig {
  std::string name = "epsilon";
  std::vector<double> values;
};

struct BifurcationConfig {
  double beta_lo = 0.01;
  double beta_hi = 0.3;
  double beta_step = 0.001;
};

struct SimulateConfig {
  std::int64_t max_events = 1'000'000;
  double t_max = std::numeric_limits<double>::infinity();
};

/// Fully resolved experiment configuration.
struct ExperimentConfig {
  ModelParams params;
  /// True when the model was given through (alpha_i, alpha_e).
  bool rates_given = false;
  std::vector<Variant> variants{Variant::Discrete, Variant::SemiContinuous, Variant::QssDiffusion};
  Interval domain{0.0, 1.5};
  int grid = 401;
  SsaConfig ssa;
  /// Lattice truncation; negative selects 3 alpha_e.
  int n_max = -1;
  std::string output = "out";
  SweepConfig sweep;
  BifurcationConfig bifurcation;
  SimulateConfig simulate;

  /// Throws InvalidConfig.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

std::vector<Variant> parse_variant_list(const std::string& csv);
std::vector<double> parse_number_list(const std::string& csv);

}  // namespace qsa
