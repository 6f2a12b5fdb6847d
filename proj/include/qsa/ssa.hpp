#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qsa/generator.hpp"

namespace qsa {

struct SsaOptions {
  int samples = 1000;
  /// Event cap per sample; a sample hitting it is dropped and the stats flagged.
  std::int64_t max_events = 100'000'000;
  std::uint64_t seed = 1;
  bool parallel = true;
};

struct FirstPassageStats {
  std::vector<double> samples;
  std::vector<std::int64_t> events;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double cv = 0.0;
  int count = 0;
  /// Samples that hit the event cap.
  int truncated = 0;
  std::uint64_t seed = 0;
  std::int64_t total_events = 0;

  bool complete() const { return truncated == 0; }
  /// Throws MaxEventsExceeded when any sample was truncated.
  void require_complete() const;
};

/// Independent engine per (seed, stream) pair.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);
/// Uniform in (0, 1].
inline double uniform_open0(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

/// Exact SSA first passage from round(alpha_e x-/+) to the lattice point
/// n* = round(alpha_e x*): n >= n* from the left well, n <= n* from the right.
/// The initial internal state is drawn from rho at the start site.
FirstPassageStats gillespie_exit_time(const ModelSpec& spec, const LatticeRates& rates, Well start,
                                      const SsaOptions& options);
FirstPassageStats gillespie_exit_time(const ModelParams& params, Well start, const SsaOptions& options);

/// Summary statistics of a sample list (stderr = stddev / sqrt(count)).
void summarize(FirstPassageStats& stats);

struct TrajectoryEvent {
  double t = 0.0;
  int s = 0;
  int n = 0;
};

/// One seeded path; the first entry is the initial state. Stops after
/// max_events events or once t exceeds t_max.
std::vector<TrajectoryEvent> simulate_trajectory(const ModelSpec& spec, const LatticeRates& rates, int n0, int s0,
                                                 std::int64_t max_events, double t_max, std::uint64_t seed);

/// Time-weighted occupancy of (n, s) over a long path, index states * n + s, normalized.
VectorXd occupancy_histogram(const ModelSpec& spec, const LatticeRates& rates, int n0, int s0, int n_max,
                             std::int64_t events, std::uint64_t seed);

/// Columns sample_index, exit_time, events.
void write_samples_csv(const std::string& path, const FirstPassageStats& stats);
/// mean, stderr, cv, count, seed, truncated, total_events.
void write_stats_json(const std::string& path, const FirstPassageStats& stats);

}  // namespace qsa
