#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "optexp/bayes.hpp"
#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/experiments.hpp"
#include "optexp/measures.hpp"
#include "optexp/optimize.hpp"
#include "optexp/quadrature.hpp"

// Scenario-file ingestion: a strict JSON schema mapped onto module types.
// Unknown keys are rejected by name so typos fail loudly instead of being
// silently ignored.
namespace optexp::scenario_file {

using nlohmann::json;

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ScenarioError("scenario: unknown key \"" + it.key() + "\" in " + where);
  }
}

inline const json& require(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ScenarioError(std::string("scenario: missing key \"") + key + "\" in " + where);
  return *it;
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ScenarioError("scenario: " + what + " must be a number");
  return j.get<double>();
}

inline double number_field(const json& obj, const char* key, const char* where) {
  return number(require(obj, key, where), std::string(where) + "." + key);
}

inline std::vector<double> number_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw ScenarioError("scenario: " + what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what + " entry"));
  return out;
}

inline const json& object(const json& j, const std::string& what) {
  if (!j.is_object()) throw ScenarioError("scenario: " + what + " must be an object");
  return j;
}

inline std::string kind_of(const json& obj, const char* where) {
  const json& k = require(obj, "kind", where);
  if (!k.is_string())
    throw ScenarioError(std::string("scenario: ") + where + ".kind must be a string");
  return k.get<std::string>();
}

// Pairs like [[a, b], ...] used for atoms, grid points, and noise tables.
inline std::vector<std::pair<double, double>> pair_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw ScenarioError("scenario: " + what + " must be an array of pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2)
      throw ScenarioError("scenario: each " + what + " entry must be a two-element array");
    out.push_back({number(row[0], what + " entry"), number(row[1], what + " entry")});
  }
  return out;
}

inline measures::MixedDistribution parse_prior(const json& j) {
  object(j, "prior");
  reject_unknown(j, {"atoms", "density"}, "prior");
  std::vector<measures::Atom> atoms;
  if (auto it = j.find("atoms"); it != j.end())
    for (auto& [loc, mass] : pair_array(*it, "prior.atoms")) atoms.push_back({loc, mass});
  std::optional<measures::PriorDensity> density;
  if (auto it = j.find("density"); it != j.end()) {
    const json& d = object(*it, "prior.density");
    reject_unknown(d, {"kind", "params", "support"}, "prior.density");
    std::string kind = kind_of(d, "prior.density");
    const json& params = object(require(d, "params", "prior.density"), "prior.density.params");
    if (kind == "uniform") {
      reject_unknown(params, {"mass"}, "prior.density.params");
      std::vector<double> s = number_array(require(d, "support", "prior.density"),
                                           "prior.density.support");
      if (s.size() != 2) throw ScenarioError("scenario: prior.density.support must be [lo, hi]");
      density = measures::PriorDensity::uniform(s[0], s[1],
                                                number_field(params, "mass", "prior.density.params"));
    } else if (kind == "truncated-gaussian") {
      reject_unknown(params, {"mean", "sigma", "mass"}, "prior.density.params");
      std::vector<double> s = number_array(require(d, "support", "prior.density"),
                                           "prior.density.support");
      if (s.size() != 2) throw ScenarioError("scenario: prior.density.support must be [lo, hi]");
      density = measures::PriorDensity::truncated_gaussian(
          number_field(params, "mean", "prior.density.params"),
          number_field(params, "sigma", "prior.density.params"), s[0], s[1],
          number_field(params, "mass", "prior.density.params"));
    } else if (kind == "grid") {
      reject_unknown(params, {"points"}, "prior.density.params");
      auto pts = pair_array(require(params, "points", "prior.density.params"),
                            "prior.density.params.points");
      std::vector<double> xs, vs;
      for (auto& [x, v] : pts) {
        xs.push_back(x);
        vs.push_back(v);
      }
      density = measures::PriorDensity::grid(std::move(xs), std::move(vs));
    } else {
      throw ScenarioError(
          "scenario: prior.density.kind must be one of uniform, truncated-gaussian, grid");
    }
  }
  return measures::MixedDistribution(std::move(atoms), std::move(density));
}

inline costs::NoiseCostFunction parse_cost(const json& j, std::string* kind_out) {
  object(j, "cost");
  reject_unknown(j, {"kind", "params"}, "cost");
  std::string kind = kind_of(j, "cost");
  const json& params = object(require(j, "params", "cost"), "cost.params");
  *kind_out = kind;
  if (kind == "exp-decay") {
    reject_unknown(params, {"peak", "rate"}, "cost.params");
    return costs::NoiseCostFunction::exp_decay(number_field(params, "peak", "cost.params"),
                                               number_field(params, "rate", "cost.params"));
  }
  if (kind == "tent") {
    reject_unknown(params, {"peak", "halfwidth"}, "cost.params");
    return costs::NoiseCostFunction::tent(number_field(params, "peak", "cost.params"),
                                          number_field(params, "halfwidth", "cost.params"));
  }
  if (kind == "cauchy") {
    reject_unknown(params, {"peak"}, "cost.params");
    return costs::NoiseCostFunction::cauchy(number_field(params, "peak", "cost.params"));
  }
  if (kind == "grid") {
    reject_unknown(params, {"points"}, "cost.params");
    auto pts = pair_array(require(params, "points", "cost.params"), "cost.params.points");
    std::vector<double> xs, vs;
    for (auto& [x, v] : pts) {
      xs.push_back(x);
      vs.push_back(v);
    }
    return costs::NoiseCostFunction::custom(std::move(xs), std::move(vs));
  }
  throw ScenarioError("scenario: cost.kind must be one of exp-decay, tent, cauchy, grid");
}

inline bayes::Utility parse_utility(const json& j, const measures::MixedDistribution& prior,
                                    const std::vector<double>& actions, std::string* kind_out) {
  object(j, "utility");
  reject_unknown(j, {"kind", "params"}, "utility");
  std::string kind = kind_of(j, "utility");
  *kind_out = kind;
  json params = j.value("params", json::object());
  object(params, "utility.params");
  if (kind == "quadratic-loss") {
    reject_unknown(params, {}, "utility.params");
    return bayes::Utility::quadratic();
  }
  if (kind == "trade") {
    reject_unknown(params, {"price"}, "utility.params");
    return bayes::Utility::trade(number_field(params, "price", "utility.params"));
  }
  if (kind == "table") {
    reject_unknown(params, {"values"}, "utility.params");
    if (!prior.is_atomic())
      throw ScenarioError("scenario: table utility requires a purely atomic prior");
    const json& values = require(params, "values", "utility.params");
    if (!values.is_array() || values.size() != prior.atoms().size())
      throw ScenarioError("scenario: utility.params.values needs one row per prior atom");
    auto table = std::make_shared<std::map<double, std::map<double, double>>>();
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::vector<double> row = number_array(values[i], "utility.params.values row");
      if (row.size() != actions.size())
        throw ScenarioError("scenario: utility.params.values needs one column per action");
      for (std::size_t a = 0; a < actions.size(); ++a)
        (*table)[prior.atoms()[i].location][actions[a]] = row[a];
    }
    return bayes::Utility::custom([table](double theta, double a) {
      auto row = table->find(theta);
      if (row == table->end())
        throw ValidationError("table utility: payoff not tabulated for this state");
      auto cell = row->second.find(a);
      if (cell == row->second.end())
        throw ValidationError("table utility: payoff not tabulated for this action");
      return cell->second;
    });
  }
  throw ScenarioError("scenario: utility.kind must be one of quadratic-loss, trade, table");
}

inline experiments::NoiseDistribution parse_noise(const json& j, const std::string& where) {
  object(j, where);
  std::string kind = kind_of(j, where.c_str());
  if (kind == "uniform") {
    reject_unknown(j, {"kind", "width"}, where.c_str());
    return experiments::NoiseDistribution::uniform(number_field(j, "width", where.c_str()));
  }
  if (kind == "triangular") {
    reject_unknown(j, {"kind", "halfwidth"}, where.c_str());
    return experiments::NoiseDistribution::triangular(
        number_field(j, "halfwidth", where.c_str()));
  }
  if (kind == "truncated-gaussian") {
    reject_unknown(j, {"kind", "sigma", "halfwidth", "cells"}, where.c_str());
    int cells = 256;
    if (auto it = j.find("cells"); it != j.end())
      cells = static_cast<int>(number(*it, where + ".cells"));
    return experiments::NoiseDistribution::truncated_gaussian(
        number_field(j, "sigma", where.c_str()), number_field(j, "halfwidth", where.c_str()),
        cells);
  }
  if (kind == "mixture") {
    reject_unknown(j, {"kind", "weights", "widths", "residual"}, where.c_str());
    double residual = 0.0;
    if (auto it = j.find("residual"); it != j.end()) residual = number(*it, where + ".residual");
    return experiments::NoiseDistribution::mixture(
        number_array(require(j, "weights", where.c_str()), where + ".weights"),
        number_array(require(j, "widths", where.c_str()), where + ".widths"), residual);
  }
  throw ScenarioError("scenario: " + where +
                      ".kind must be one of uniform, triangular, truncated-gaussian, mixture");
}

}  // namespace detail

// Parameter blocks for the demo subcommands, with usable defaults when the
// scenario file does not override them.
struct NonexistencePlan {
  double p = 0.5;
  std::vector<double> widths{1.0, 10.0, 100.0, 1000.0};
};

struct ClarkePlan {
  std::vector<double> scales{0.5, 1.0, 2.0};
  std::vector<double> points{-1.0, 0.0, 1.0};
};

struct TradePlan {
  double price = 0.5;
  double quality_low = 0.0;
  double quality_high = 1.0;
  double prob_high = 0.5;
};

struct ScenarioFile {
  measures::MixedDistribution prior;
  std::vector<double> actions;
  bayes::Utility utility;
  std::string utility_kind;
  costs::NoiseCostFunction cost;
  std::string cost_kind;
  double bound;
  optimize::SolverOptions solver;
  measures::Quadrature quadrature;
  std::optional<experiments::Experiment> experiment;
  NonexistencePlan nonexistence;
  ClarkePlan clarke;
  TradePlan trade;
  std::string echo;  // effective configuration, seed included

  bayes::DecisionProblem problem() const { return {prior, actions, utility}; }
};

inline ScenarioFile parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: invalid document: ") + e.what());
  }
  detail::object(j, "scenario");
  detail::reject_unknown(j,
                         {"prior", "actions", "utility", "cost", "bound", "signal", "solver",
                          "quadrature", "experiment", "demo"},
                         "scenario");

  measures::MixedDistribution prior = detail::parse_prior(detail::require(j, "prior", "scenario"));

  std::vector<double> actions =
      detail::number_array(detail::require(j, "actions", "scenario"), "actions");
  if (actions.empty()) throw ScenarioError("scenario: actions must be nonempty");

  std::string utility_kind;
  bayes::Utility utility =
      detail::parse_utility(detail::require(j, "utility", "scenario"), prior, actions,
                            &utility_kind);

  std::string cost_kind;
  costs::NoiseCostFunction cost = detail::parse_cost(detail::require(j, "cost", "scenario"),
                                                     &cost_kind);

  double bound = detail::number(detail::require(j, "bound", "scenario"), "bound");
  if (!(bound > 0.0)) throw ScenarioError("scenario: bound must be positive");

  if (auto it = j.find("signal"); it != j.end()) {
    detail::object(*it, "signal");
    detail::reject_unknown(*it, {"kind"}, "signal");
    if (detail::kind_of(*it, "signal") != "additive")
      throw ScenarioError("scenario: signal.kind must be additive");
  }

  optimize::SolverOptions solver;
  if (auto it = j.find("solver"); it != j.end()) {
    detail::object(*it, "solver");
    detail::reject_unknown(*it, {"tol", "max_iter", "restarts", "seed"}, "solver");
    if (auto f = it->find("tol"); f != it->end()) solver.tol = detail::number(*f, "solver.tol");
    if (auto f = it->find("max_iter"); f != it->end())
      solver.max_iter = static_cast<int>(detail::number(*f, "solver.max_iter"));
    if (auto f = it->find("restarts"); f != it->end())
      solver.restarts = static_cast<int>(detail::number(*f, "solver.restarts"));
    if (auto f = it->find("seed"); f != it->end())
      solver.seed = static_cast<std::uint64_t>(detail::number(*f, "solver.seed"));
  }

  measures::Quadrature quadrature;
  if (auto it = j.find("quadrature"); it != j.end()) {
    detail::object(*it, "quadrature");
    detail::reject_unknown(*it, {"abs_tol", "max_subdivisions"}, "quadrature");
    if (auto f = it->find("abs_tol"); f != it->end())
      quadrature.abs_tol = detail::number(*f, "quadrature.abs_tol");
    if (auto f = it->find("max_subdivisions"); f != it->end())
      quadrature.max_subdivisions = static_cast<int>(detail::number(*f, "quadrature.max_subdivisions"));
  }

  std::optional<experiments::Experiment> experiment;
  if (auto it = j.find("experiment"); it != j.end()) {
    detail::object(*it, "experiment");
    detail::reject_unknown(*it, {"noise"}, "experiment");
    const json& noise = detail::require(*it, "noise", "experiment");
    if (!noise.is_array()) throw ScenarioError("scenario: experiment.noise must be an array");
    std::map<double, experiments::NoiseDistribution> assignment;
    for (const auto& row : noise) {
      if (!row.is_array() || row.size() != 2)
        throw ScenarioError("scenario: each experiment.noise entry must be [state, spec]");
      double state = detail::number(row[0], "experiment.noise state");
      if (assignment.count(state))
        throw ScenarioError("scenario: experiment.noise lists a state twice");
      assignment.emplace(state, detail::parse_noise(row[1], "experiment.noise spec"));
    }
    for (const auto& a : prior.atoms())
      if (!assignment.count(a.location))
        throw ScenarioError("scenario: experiment.noise must cover every prior atom");
    if (assignment.size() != prior.atoms().size())
      throw ScenarioError("scenario: experiment.noise lists a state the prior lacks");
    experiment = experiments::Experiment(std::move(assignment),
                                         experiments::SignalFunction::additive(), bound);
  }

  NonexistencePlan nonexistence;
  ClarkePlan clarke;
  TradePlan trade;
  if (auto it = j.find("demo"); it != j.end()) {
    detail::object(*it, "demo");
    detail::reject_unknown(*it, {"nonexistence", "clarke", "trade"}, "demo");
    if (auto d = it->find("nonexistence"); d != it->end()) {
      detail::object(*d, "demo.nonexistence");
      detail::reject_unknown(*d, {"p", "widths"}, "demo.nonexistence");
      nonexistence.p = detail::number_field(*d, "p", "demo.nonexistence");
      nonexistence.widths =
          detail::number_array(detail::require(*d, "widths", "demo.nonexistence"),
                               "demo.nonexistence.widths");
    }
    if (auto d = it->find("clarke"); d != it->end()) {
      detail::object(*d, "demo.clarke");
      detail::reject_unknown(*d, {"scales", "points"}, "demo.clarke");
      clarke.scales = detail::number_array(detail::require(*d, "scales", "demo.clarke"),
                                           "demo.clarke.scales");
      clarke.points = detail::number_array(detail::require(*d, "points", "demo.clarke"),
                                           "demo.clarke.points");
    }
    if (auto d = it->find("trade"); d != it->end()) {
      detail::object(*d, "demo.trade");
      detail::reject_unknown(*d, {"price", "quality_low", "quality_high", "prob_high"},
                             "demo.trade");
      trade.price = detail::number_field(*d, "price", "demo.trade");
      trade.quality_low = detail::number_field(*d, "quality_low", "demo.trade");
      trade.quality_high = detail::number_field(*d, "quality_high", "demo.trade");
      trade.prob_high = detail::number_field(*d, "prob_high", "demo.trade");
    }
  }

  json effective = j;
  effective["solver"]["seed"] = solver.seed;
  std::string echo = effective.dump(2);

  return ScenarioFile{std::move(prior),
                      std::move(actions),
                      std::move(utility),
                      std::move(utility_kind),
                      std::move(cost),
                      std::move(cost_kind),
                      bound,
                      solver,
                      quadrature,
                      std::move(experiment),
                      std::move(nonexistence),
                      std::move(clarke),
                      std::move(trade),
                      std::move(echo)};
}

inline ScenarioFile parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace optexp::scenario_file
