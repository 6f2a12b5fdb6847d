#include "qsa/ssa.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include "qsa/csv.hpp"

namespace qsa {

namespace {

// Propensities per (n, s), tabulated once and extended on demand.
class RateTable {
 public:
  RateTable(const ModelSpec& spec, const LatticeRates& rates, int n_cap) : spec_(spec), rates_(rates), m_(spec.states()) {
    extend(n_cap);
  }

  int states() const { return m_; }

  // Layout per (n, s): birth, death, then switching to each t != s.
  const double* at(int n, int s) {
    if (n > n_cap_) extend(std::max(2 * n_cap_, n));
    return &table_[(static_cast<std::size_t>(n) * m_ + s) * (m_ + 1)];
  }

  double total(int n, int s) { return totals_[static_cast<std::size_t>(at_index(n)) * m_ + s]; }

 private:
  int at_index(int n) {
    if (n > n_cap_) extend(std::max(2 * n_cap_, n));
    return n;
  }

  void extend(int n_cap) {
    const std::size_t stride = m_ + 1;
    table_.resize(static_cast<std::size_t>(n_cap + 1) * m_ * stride);
    totals_.resize(static_cast<std::size_t>(n_cap + 1) * m_);
    for (int n = n_cap_ + 1; n <= n_cap; ++n) {
      const double x = n / rates_.alpha_e;
      const MatrixXd a = spec_.A(x);
      const VectorXd wp = spec_.w_plus(x);
      const VectorXd wm = spec_.w_minus(x);
      for (int s = 0; s < m_; ++s) {
        double* r = &table_[(static_cast<std::size_t>(n) * m_ + s) * stride];
        r[0] = rates_.alpha_e * wp(s);
        r[1] = n > 0 ? rates_.alpha_e * wm(s) : 0.0;
        int k = 2;
        for (int t = 0; t < m_; ++t)
          if (t != s) r[k++] = rates_.alpha_i * a(t, s);
        double sum = 0.0;
        for (std::size_t j = 0; j < stride; ++j) {
          if (!(r[j] >= 0.0)) {
            std::ostringstream os;
            os << "propensity " << r[j] << " at n=" << n << ", s=" << s;
            throw Error(ErrorKind::NonpositiveRate, os.str());
          }
          sum += r[j];
        }
        totals_[static_cast<std::size_t>(n) * m_ + s] = sum;
      }
    }
    n_cap_ = n_cap;
  }

  const ModelSpec& spec_;
  LatticeRates rates_;
  int m_;
  int n_cap_ = -1;
  std::vector<double> table_;
  std::vector<double> totals_;
};

struct Walker {
  int n = 0;
  int s = 0;
  double t = 0.0;

  // One Gillespie step; returns false if the state is absorbing (zero total rate).
  bool step(RateTable& table, std::mt19937_64& rng) {
    const double total = table.total(n, s);
    if (!(total > 0.0)) return false;
    const double* r = table.at(n, s);
    t += -std::log(uniform_open0(rng)) / total;
    double u = uniform_open0(rng) * total;
    const int m = table.states();
    int channel = 0;
    for (; channel < m + 1; ++channel) {
      u -= r[channel];
      if (u <= 0.0 && r[channel] > 0.0) break;
    }
    if (channel == m + 1) {
      // Rounding left u above zero: take the last open channel.
      channel = m;
      while (channel > 0 && r[channel] == 0.0) --channel;
    }
    if (channel == 0) ++n;
    else if (channel == 1) --n;
    else {
      int target = channel - 2;
      if (target >= s) ++target;
      s = target;
    }
    return true;
  }
};

int draw_state(const VectorXd& rho, std::mt19937_64& rng) {
  double u = uniform_open0(rng);
  for (int s = 0; s < rho.size() - 1; ++s) {
    u -= rho(s);
    if (u <= 0.0) return s;
  }
  return static_cast<int>(rho.size()) - 1;
}

struct SampleOutcome {
  double time = 0.0;
  std::int64_t events = 0;
  bool truncated = false;
};

}  // namespace

void FirstPassageStats::require_complete() const {
  if (truncated == 0) return;
  std::ostringstream os;
  os << truncated << " of " << truncated + count << " samples hit the event cap; " << count << " completed";
  throw Error(ErrorKind::MaxEventsExceeded, os.str());
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

void summarize(FirstPassageStats& stats) {
  stats.count = static_cast<int>(stats.samples.size());
  if (stats.count == 0) {
    stats.mean = stats.stderr_mean = stats.cv = std::nan("");
    return;
  }
  double sum = 0.0;
  for (double v : stats.samples) sum += v;
  stats.mean = sum / stats.count;
  double ss = 0.0;
  for (double v : stats.samples) ss += (v - stats.mean) * (v - stats.mean);
  const double sd = stats.count > 1 ? std::sqrt(ss / (stats.count - 1)) : 0.0;
  stats.stderr_mean = sd / std::sqrt(static_cast<double>(stats.count));
  stats.cv = sd / stats.mean;
}

FirstPassageStats gillespie_exit_time(const ModelSpec& spec, const LatticeRates& rates, Well start,
                                      const SsaOptions& options) {
  if (options.samples < 1) throw Error(ErrorKind::InvalidConfig, "samples must be positive");
  const FixedPointSet fp = find_fixed_points(spec);
  const int n_star = static_cast<int>(std::lround(rates.alpha_e * fp.x_star));
  const double x_start = start == Well::Left ? fp.x_minus : fp.x_plus;
  const int n_start = static_cast<int>(std::lround(rates.alpha_e * x_start));
  if ((start == Well::Left && n_start >= n_star) || (start == Well::Right && n_start <= n_star))
    throw Error(ErrorKind::InvalidConfig, "start site already lies beyond n*");
  const VectorXd rho = qss_distribution(spec, n_start / rates.alpha_e);
  const bool left = start == Well::Left;
  const int n_cap = left ? n_star : static_cast<int>(std::ceil(3.0 * rates.alpha_e)) + 2;

  // Prebuild the shared table; each thread copies it so extensions stay local.
  const RateTable shared(spec, rates, n_cap);
  std::vector<SampleOutcome> outcomes(options.samples);
  std::exception_ptr failure;

#pragma omp parallel if (options.parallel)
  {
    RateTable table = shared;
#pragma omp for schedule(dynamic, 4)
    for (int i = 0; i < options.samples; ++i) {
      try {
        std::mt19937_64 rng = make_stream(options.seed, static_cast<std::uint64_t>(i));
        Walker w{n_start, draw_state(rho, rng), 0.0};
        SampleOutcome& out = outcomes[i];
        while (left ? w.n < n_star : w.n > n_star) {
          if (out.events >= options.max_events) {
            out.truncated = true;
            break;
          }
          if (!w.step(table, rng)) throw Error(ErrorKind::NonpositiveRate, "walker reached an absorbing state");
          ++out.events;
        }
        out.time = w.t;
      } catch (...) {
#pragma omp critical(qsa_ssa_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  FirstPassageStats stats;
  stats.seed = options.seed;
  for (const SampleOutcome& o : outcomes) {
    stats.total_events += o.events;
    if (o.truncated) {
      ++stats.truncated;
      continue;
    }
    stats.samples.push_back(o.time);
    stats.events.push_back(o.events);
  }
  summarize(stats);
  return stats;
}

FirstPassageStats gillespie_exit_time(const ModelParams& params, Well start, const SsaOptions& options) {
  params.validate();
  return gillespie_exit_time(ModelSpec::gene_switch(params), LatticeRates::from(params), start, options);
}

std::vector<TrajectoryEvent> simulate_trajectory(const ModelSpec& spec, const LatticeRates& rates, int n0, int s0,
                                                 std::int64_t max_events, double t_max, std::uint64_t seed) {
  if (n0 < 0 || s0 < 0 || s0 >= spec.states()) throw Error(ErrorKind::InvalidConfig, "initial state out of range");
  RateTable table(spec, rates, static_cast<int>(std::ceil(3.0 * rates.alpha_e)) + 2);
  std::mt19937_64 rng = make_stream(seed, 0);
  Walker w{n0, s0, 0.0};
  std::vector<TrajectoryEvent> path{{0.0, s0, n0}};
  for (std::int64_t k = 0; k < max_events; ++k) {
    if (!w.step(table, rng)) break;
    if (w.t > t_max) break;
    path.push_back({w.t, w.s, w.n});
  }
  return path;
}

VectorXd occupancy_histogram(const ModelSpec& spec, const LatticeRates& rates, int n0, int s0, int n_max,
                             std::int64_t events, std::uint64_t seed) {
  const int m = spec.states();
  RateTable table(spec, rates, n_max + 1);
  std::mt19937_64 rng = make_stream(seed, 0);
  Walker w{n0, s0, 0.0};
  VectorXd occ = VectorXd::Zero(static_cast<Eigen::Index>(m) * (n_max + 1));
  for (std::int64_t k = 0; k < events; ++k) {
    const int n = w.n, s = w.s;
    const double t0 = w.t;
    if (!w.step(table, rng)) break;
    if (n <= n_max) occ(static_cast<Eigen::Index>(m) * n + s) += w.t - t0;
  }
  return occ / occ.sum();
}

void write_samples_csv(const std::string& path, const FirstPassageStats& stats) {
  CsvWriter csv(path, "exit_samples", {"sample_index", "exit_time", "events"});
  for (std::size_t i = 0; i < stats.samples.size(); ++i)
    csv.row_fields({std::to_string(i), format_number(stats.samples[i]), std::to_string(stats.events[i])});
}

void write_stats_json(const std::string& path, const FirstPassageStats& stats) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"mean", num(stats.mean)},       {"stderr", num(stats.stderr_mean)},
                      {"cv", num(stats.cv)},           {"count", stats.count},
                      {"seed", stats.seed},            {"truncated", stats.truncated},
                      {"total_events", stats.total_events}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace qsa
