#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "qsa/csv.hpp"
#include "qsa/experiments.hpp"

using namespace qsa;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qsa_unit_" + name);
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind thrown_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST_CASE("config requires exactly one of epsilon or the rate pair") {
  using nlohmann::json;
  const ExperimentConfig a = ExperimentConfig::from_json({{"model", {{"beta", 0.23}, {"sigma", 0.04}, {"alpha_i", 333}, {"alpha_e", 200}}}});
  CHECK(a.rates_given);
  CHECK(a.params.epsilon == doctest::Approx(1.0 / 333));
  CHECK(a.params.phi == doctest::Approx(1.665));
  CHECK(thrown_kind([] { ExperimentConfig::from_json({{"model", {{"epsilon", 0.01}, {"alpha_i", 100}, {"alpha_e", 100}}}}); }) ==
        ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] { ExperimentConfig::from_json({{"model", {{"beta", 0.1}}}}); }) == ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] { ExperimentConfig::from_json({{"model", {{"alpha_i", 100}}}}); }) == ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] {
          ExperimentConfig::from_json({{"model", {{"alpha_i", 100}, {"alpha_e", 50}, {"phi", 1.0}}}});
        }) == ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] { ExperimentConfig::from_json({{"model", {{"epsilon", 0.01}}}, {"colour", 1}}); }) ==
        ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] { ExperimentConfig::from_json({{"model", {{"epsilon", "x"}}}}); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("config round trip through JSON") {
  ExperimentConfig cfg = ExperimentConfig::from_json({{"model", {{"beta", 0.24}, {"epsilon", 0.005}, {"phi", 2.0}}},
                                                      {"variants", {"disc", "qss"}},
                                                      {"ssa", {{"samples", 77}, {"seed", 9}, {"well", "right"}}},
                                                      {"sweep", {{"name", "alpha_e"}, {"values", {100, 200}}}}});
  const ExperimentConfig back = ExperimentConfig::from_json([&] {
    nlohmann::json j = cfg.to_json();
    j.erase("resolved");
    return j;
  }());
  CHECK(back.params.beta == cfg.params.beta);
  CHECK(back.params.phi == cfg.params.phi);
  CHECK(back.variants == cfg.variants);
  CHECK(back.ssa.samples == 77);
  CHECK(back.ssa.well == Well::Right);
  CHECK(back.sweep.values == cfg.sweep.values);
}

TEST_CASE("value and variant lists") {
  const std::vector<double> v = parse_number_list("1/50,0.01,2e-3");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 0.02);
  CHECK(v[2] == 0.002);
  CHECK_THROWS_AS(parse_number_list("1/x"), Error);
  CHECK_THROWS_AS(parse_number_list("abc"), Error);
  CHECK(parse_variant_list("disc,sc").size() == 2);
}

TEST_CASE("alignment constant minimizes the sup-norm gap") {
  const std::vector<double> a{0.0, 1.0, 2.0}, b{0.5, 1.7, 2.3};
  const double c = alignment_constant(a, b);
  CHECK(c == doctest::Approx(0.5));
  CHECK_THROWS_AS(alignment_constant({}, {}), Error);
}

TEST_CASE("sweep points keep the other rate fixed") {
  const ModelParams base = ModelParams::from_rates(0.23, 0.04, 333, 200);
  CHECK(sweep_point(base, "alpha_i", 800).alpha_e() == doctest::Approx(200));
  CHECK(sweep_point(base, "alpha_i", 800).alpha_i() == doctest::Approx(800));
  CHECK(sweep_point(base, "alpha_e", 100).alpha_i() == doctest::Approx(333));
  CHECK(sweep_point(base, "epsilon", 0.01).phi == base.phi);
  CHECK_THROWS_AS(sweep_point(base, "gamma", 1.0), Error);
}

TEST_CASE("bifurcation output is continuous and monostable outside the window") {
  ExperimentConfig cfg = ExperimentConfig::from_json({{"model", {{"sigma", 0.015}, {"epsilon", 0.01}}}});
  const std::string dir = scratch("bif");
  const BifurcationWindow w = cmd_bifurcation(cfg, dir);
  CHECK(w.beta_minus == doctest::Approx(oracle::saddle_nodes(0.015).first).epsilon(1e-10));
  const CsvTable t = read_csv(dir + "/bifurcation.csv");
  const int roots = t.column("roots");
  const int xm = t.column("x_minus"), xp = t.column("x_plus");
  CHECK(t.rows.size() == 291);
  auto num = [](const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); };
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double beta = num(t.rows[i][0]);
    if (beta < w.beta_minus || beta > w.beta_plus) CHECK(t.rows[i][roots] == "1");
    if (i == 0) continue;
    for (int c : {xm, xp}) {
      const double a = num(t.rows[i - 1][c]), b = num(t.rows[i][c]);
      if (std::isfinite(a) && std::isfinite(b)) CHECK(std::abs(a - b) < 0.02);
    }
  }
  CHECK(fs::exists(dir + "/config.json"));
}

TEST_CASE("landscape command with and without the lattice ground truth") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"model", {{"beta", 0.24}, {"sigma", 0.015}, {"phi", 1.0}, {"epsilon", 0.01}}}, {"variants", {"disc", "sc", "qss"}}});
  const std::string dir = scratch("land");
  const LandscapeReport r = cmd_landscape(cfg, dir);
  CHECK(r.numeric_computed);
  CHECK(r.alignment.size() == 3);
  CHECK(fs::exists(dir + "/landscape_numeric.csv"));
  const CsvTable t = read_csv(dir + "/landscape_discrete.csv");
  CHECK(t.kind == "landscape");
  CHECK(t.column("w_error") >= 0);

  cfg.params.epsilon = 0.0;
  const std::string dir0 = scratch("land0");
  const LandscapeReport r0 = cmd_landscape(cfg, dir0);
  CHECK_FALSE(r0.numeric_computed);
  CHECK_FALSE(r0.notice.empty());
  CHECK_FALSE(fs::exists(dir0 + "/landscape_numeric.csv"));

  cfg.params.beta = 0.4;
  cfg.params.epsilon = 0.01;
  CHECK(thrown_kind([&] { cmd_landscape(cfg, scratch("land_bad")); }) == ErrorKind::NotBistable);
}

TEST_CASE("epsilon sweep gives increasing exit times") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"model", {{"beta", 0.11}, {"sigma", 0.015}, {"phi", 1.0}, {"epsilon", 0.01}}}, {"ssa", {{"samples", 50}}}});
  const std::vector<SweepRow> rows = exit_time_sweep(cfg, "epsilon", {1.0 / 50, 1.0 / 100, 1.0 / 200});
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    CHECK(rows[1].variants[v].result->minus.T > rows[0].variants[v].result->minus.T);
    CHECK(rows[2].variants[v].result->minus.T > rows[1].variants[v].result->minus.T);
  }
  for (const SweepRow& r : rows) {
    CHECK(r.ssa_status == "ok");
    CHECK(r.numeric_lambda > 0.0);
  }
  SweepOptions serial;
  serial.parallel = false;
  const std::vector<SweepRow> again = exit_time_sweep(cfg, "epsilon", {1.0 / 50, 1.0 / 100, 1.0 / 200}, serial);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].ssa_mean == rows[i].ssa_mean);
    CHECK(again[i].numeric_lambda == rows[i].numeric_lambda);
  }
}

TEST_CASE("budget guard skips infeasible SSA points") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"model", {{"beta", 0.23}, {"sigma", 0.04}, {"alpha_i", 333}, {"alpha_e", 200}}}, {"ssa", {{"samples", 20}, {"max_events", 1000}}}});
  const std::vector<SweepRow> rows = exit_time_sweep(cfg, "alpha_e", {200});
  CHECK(rows[0].ssa_status == "skipped_budget");
  CHECK(std::isnan(rows[0].ssa_mean));
  CHECK(rows[0].predicted_events > 1000);
}

TEST_CASE("exit-times command writes one row per variant and well") {
  ExperimentConfig cfg = ExperimentConfig::from_json({{"model", {{"beta", 0.23}, {"sigma", 0.04}, {"alpha_i", 333}, {"alpha_e", 200}}},
                                                      {"ssa", {{"samples", 30}}},
                                                      {"sweep", {{"name", "alpha_i"}, {"values", {200, 333, 800}}}}});
  const std::string dir = scratch("exit");
  cmd_exit_times(cfg, dir);
  const CsvTable t = read_csv(dir + "/exit_times.csv");
  CHECK(t.rows.size() == 3 * cfg.variants.size() * 2);
  for (const char* col : {"ssa_mean", "ssa_stderr", "numeric_lambda", "T", "B", "barrier"}) CHECK(t.column(col) >= 0);
}

TEST_CASE("simulate is deterministic and writes one line per event") {
  ExperimentConfig cfg = ExperimentConfig::from_json(
      {{"model", {{"beta", 0.11}, {"sigma", 0.015}, {"phi", 1.0}, {"epsilon", 0.02}}}, {"simulate", {{"max_events", 5000}}}});
  const std::string d1 = scratch("sim1"), d2 = scratch("sim2");
  CHECK(cmd_simulate(cfg, d1) == 5000);
  cmd_simulate(cfg, d2);
  CHECK(slurp(d1 + "/trajectory.csv") == slurp(d2 + "/trajectory.csv"));
  const CsvTable t = read_csv(d1 + "/trajectory.csv");
  CHECK(t.rows.size() == 5000);
  cfg.simulate.t_max = 1e9;
  CHECK(thrown_kind([&] { cmd_simulate(cfg, scratch("sim3")); }) == ErrorKind::MaxEventsExceeded);
}

TEST_CASE("csv numbers") {
  CHECK(format_number(std::nan("")).empty());
  CHECK(std::stod(format_number(0.1 + 0.2)) == doctest::Approx(0.3).epsilon(1e-15));
  const std::string path = scratch("csv") + ".csv";
  {
    CsvWriter w(path, "demo", {"a", "b"});
    w.row({1.5, std::nan("")});
    CHECK_THROWS_AS(w.row({1.0}), Error);
  }
  const CsvTable t = read_csv(path);
  CHECK(t.kind == "demo");
  CHECK(t.rows[0][1].empty());
}
