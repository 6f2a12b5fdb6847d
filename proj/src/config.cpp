#include "qsa/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qsa {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); }

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Well parse_well(const std::string& s) {
  if (s == "left") return Well::Left;
  if (s == "right") return Well::Right;
  fail("well must be 'left' or 'right', got '" + s + "'");
}

void parse_model(const json& m, ExperimentConfig& cfg) {
  check_keys(m, "model", {"beta", "sigma", "phi", "epsilon", "alpha_i", "alpha_e"});
  ModelParams& p = cfg.params;
  read(m, "beta", p.beta);
  read(m, "sigma", p.sigma);
  const bool has_eps = m.contains("epsilon");
  const bool has_ai = m.contains("alpha_i");
  const bool has_ae = m.contains("alpha_e");
  if (has_ai != has_ae) fail("alpha_i and alpha_e must be given together");
  if (has_eps == has_ai) fail("give exactly one of epsilon or (alpha_i, alpha_e)");
  if (has_eps) {
    read(m, "epsilon", p.epsilon);
    read(m, "phi", p.phi);
    cfg.rates_given = false;
  } else {
    const double ai = m.at("alpha_i").get<double>();
    const double ae = m.at("alpha_e").get<double>();
    if (!(ai > 0.0 && ae > 0.0)) fail("alpha_i and alpha_e must be positive");
    const ModelParams r = ModelParams::from_rates(p.beta, p.sigma, ai, ae);
    if (m.contains("phi")) {
      const double given = m.at("phi").get<double>();
      if (std::abs(given - r.phi) > 1e-12 * r.phi) fail("phi disagrees with alpha_i / alpha_e");
    }
    p = r;
    cfg.rates_given = true;
  }
  p.validate();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    check_keys(j, "config",
               {"model", "variants", "domain", "grid", "ssa", "numeric", "output", "sweep", "bifurcation", "simulate"});
    if (!j.contains("model")) fail("missing 'model'");
    parse_model(j.at("model"), cfg);
    if (j.contains("variants")) {
      cfg.variants.clear();
      for (const auto& v : j.at("variants")) cfg.variants.push_back(parse_variant(v.get<std::string>()));
      if (cfg.variants.empty()) fail("variant list is empty");
    }
    if (j.contains("domain")) {
      const auto d = j.at("domain").get<std::vector<double>>();
      if (d.size() != 2 || !(d[1] > d[0]) || d[0] < 0.0) fail("domain must be [lo, hi] with 0 <= lo < hi");
      cfg.domain = {d[0], d[1]};
    }
    read(j, "grid", cfg.grid);
    if (cfg.grid < 3) fail("grid must have at least 3 points");
    read(j, "output", cfg.output);
    if (j.contains("ssa")) {
      const json& s = j.at("ssa");
      check_keys(s, "ssa", {"samples", "max_events", "seed", "well", "overhead"});
      read(s, "samples", cfg.ssa.samples);
      read(s, "max_events", cfg.ssa.max_events);
      read(s, "seed", cfg.ssa.seed);
      read(s, "overhead", cfg.ssa.overhead);
      if (s.contains("well")) cfg.ssa.well = parse_well(s.at("well").get<std::string>());
      if (cfg.ssa.samples < 1 || cfg.ssa.max_events < 1 || !(cfg.ssa.overhead >= 1.0))
        fail("ssa needs samples >= 1, max_events >= 1, overhead >= 1");
    }
    if (j.contains("numeric")) {
      check_keys(j.at("numeric"), "numeric", {"n_max"});
      read(j.at("numeric"), "n_max", cfg.n_max);
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      check_keys(s, "sweep", {"name", "values"});
      read(s, "name", cfg.sweep.name);
      read(s, "values", cfg.sweep.values);
    }
    if (j.contains("bifurcation")) {
      const json& b = j.at("bifurcation");
      check_keys(b, "bifurcation", {"beta_lo", "beta_hi", "beta_step"});
      read(b, "beta_lo", cfg.bifurcation.beta_lo);
      read(b, "beta_hi", cfg.bifurcation.beta_hi);
      read(b, "beta_step", cfg.bifurcation.beta_step);
      if (!(cfg.bifurcation.beta_hi > cfg.bifurcation.beta_lo && cfg.bifurcation.beta_step > 0.0))
        fail("bifurcation grid needs beta_lo < beta_hi and beta_step > 0");
    }
    if (j.contains("simulate")) {
      const json& s = j.at("simulate");
      check_keys(s, "simulate", {"max_events", "t_max"});
      read(s, "max_events", cfg.simulate.max_events);
      read(s, "t_max", cfg.simulate.t_max);
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("cannot parse " + path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json model = {{"beta", params.beta}, {"sigma", params.sigma}};
  if (rates_given) {
    model["alpha_i"] = params.alpha_i();
    model["alpha_e"] = params.alpha_e();
  } else {
    model["phi"] = params.phi;
    model["epsilon"] = params.epsilon;
  }
  json variants = json::array();
  for (Variant v : this->variants) variants.push_back(std::string(to_string(v)));
  json simulate_j = {{"max_events", simulate.max_events}};
  if (std::isfinite(simulate.t_max)) simulate_j["t_max"] = simulate.t_max;
  return {{"model", model},
          {"resolved", {{"phi", params.phi}, {"epsilon", params.epsilon}}},
          {"variants", variants},
          {"domain", {domain.lo, domain.hi}},
          {"grid", grid},
          {"ssa",
           {{"samples", ssa.samples},
            {"max_events", ssa.max_events},
            {"seed", ssa.seed},
            {"well", ssa.well == Well::Left ? "left" : "right"},
            {"overhead", ssa.overhead}}},
          {"numeric", {{"n_max", n_max}}},
          {"output", output},
          {"sweep", {{"name", sweep.name}, {"values", sweep.values}}},
          {"bifurcation",
           {{"beta_lo", bifurcation.beta_lo}, {"beta_hi", bifurcation.beta_hi}, {"beta_step", bifurcation.beta_step}}},
          {"simulate", simulate_j}};
}

std::vector<Variant> parse_variant_list(const std::string& csv) {
  std::vector<Variant> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_variant(item));
  if (out.empty()) fail("empty variant list");
  return out;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    // Accepts plain numbers and ratios such as 1/50.
    auto number = [&](const std::string& text) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text, &used);
      } catch (const std::exception&) {
        fail("not a number: '" + item + "'");
      }
      if (used != text.size()) fail("not a number: '" + item + "'");
      return v;
    };
    const std::size_t slash = item.find('/');
    out.push_back(slash == std::string::npos ? number(item)
                                             : number(item.substr(0, slash)) / number(item.substr(slash + 1)));
  }
  if (out.empty()) fail("empty value list");
  return out;
}

}  // namespace qsa
