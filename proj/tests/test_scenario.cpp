#include <cmath>
#include <string>

#include "catch_amalgamated.hpp"
#include "optexp/scenario.hpp"
#include "optexp/scenario_file.hpp"

using namespace optexp;
using namespace optexp::scenario;
using Catch::Matchers::ContainsSubstring;
using costs::NoiseCostFunction;

TEST_CASE("vague-signal sequence drains cost while belief stays pinned") {
  NoiseCostFunction c = NoiseCostFunction::exp_decay(1.0, 1.0);
  std::vector<NonexistenceRow> rows = nonexistence_sequence(0.5, {1.0, 10.0, 100.0}, c);
  REQUIRE(rows.size() == 3);
  for (const NonexistenceRow& r : rows) {
    REQUIRE(r.vague_width == Catch::Approx(1000.0));
    REQUIRE(r.posterior_limit == 1.0);
    double expect = nonexistence_posterior(0.5, r.precise_width, 1000.0);
    REQUIRE(r.posterior_finite == Catch::Approx(expect));
  }
  // Final cost: both averages are essentially 1/width for this cost.
  REQUIRE(rows.back().cost == Catch::Approx(0.0055).margin(1e-4));
  REQUIRE(rows.back().cost < 0.02);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) REQUIRE(rows[i + 1].cost < rows[i].cost);
}

TEST_CASE("equal widths leave the belief at the prior") {
  REQUIRE(nonexistence_posterior(0.3, 2.0, 2.0) == Catch::Approx(0.3));
  REQUIRE(nonexistence_posterior(0.5, 1.0, 1000.0) == Catch::Approx(1000.0 / 1001.0));
}

TEST_CASE("vague-signal inputs are validated") {
  NoiseCostFunction c = NoiseCostFunction::exp_decay(1.0, 1.0);
  REQUIRE_THROWS_AS(nonexistence_sequence(0.0, {1.0}, c), ValidationError);
  REQUIRE_THROWS_AS(nonexistence_sequence(0.5, {}, c), ValidationError);
  REQUIRE_THROWS_AS(nonexistence_sequence(0.5, {1.0, -2.0}, c), ValidationError);
}

TEST_CASE("derivative demo table reproduces the closed form") {
  std::vector<ClarkeDemoRow> rows = clarke_demo_table({0.5, 1.0, 2.0}, {-1.0, 0.0, 1.0});
  REQUIRE(rows.size() == 9);
  for (const ClarkeDemoRow& r : rows) {
    double tol = r.at == 0.0 ? 1e-5 : 1e-6;
    REQUIRE(r.error <= tol);
    if (r.at == 0.0) {
      REQUIRE(r.exact.lower == Catch::Approx(-1.0 / (r.scale * r.scale)));
      REQUIRE(r.exact.upper == Catch::Approx(1.0 / (r.scale * r.scale)));
    } else {
      REQUIRE(r.exact.lower == r.exact.upper);
    }
  }
  REQUIRE_THROWS_AS(clarke_demo_table({-1.0}, {0.0}), ValidationError);
}

TEST_CASE("a price below both qualities makes buying unconditional") {
  NoiseCostFunction c = NoiseCostFunction::exp_decay(0.1, 1.0);
  TradeDemo d = trade_demo(-1.0, 0.0, 1.0, 0.5, c, 2.0);
  REQUIRE(d.result.converged);
  // Buying dominates at every signal, so no pass-to-buy switch exists.
  REQUIRE_FALSE(d.threshold.has_value());
  for (double a : d.result.rule.interval_actions) REQUIRE(a == 1.0);
}

TEST_CASE("a price above both qualities makes passing unconditional") {
  NoiseCostFunction c = NoiseCostFunction::exp_decay(0.1, 1.0);
  TradeDemo d = trade_demo(2.0, 0.0, 1.0, 0.5, c, 2.0);
  REQUIRE(d.result.converged);
  REQUIRE_FALSE(d.threshold.has_value());
  for (double a : d.result.rule.interval_actions) REQUIRE(a == 0.0);
}

TEST_CASE("an interior price yields a pass-to-buy switch between the qualities") {
  NoiseCostFunction c = NoiseCostFunction::exp_decay(0.001, 1.0);
  TradeDemo d = trade_demo(0.5, 0.0, 1.0, 0.5, c, 2.0);
  REQUIRE(d.result.converged);
  REQUIRE(d.threshold.has_value());
  REQUIRE(*d.threshold > 0.0);
  REQUIRE(*d.threshold <= 1.0);
  REQUIRE(d.result.value == Catch::Approx(d.result.benefit - d.result.cost).margin(1e-12));
  for (const auto& [theta, w] : d.result.widths) {
    REQUIRE(w >= 0.0);
    REQUIRE(w <= 2.0);
  }
}

TEST_CASE("purchase demo validates its inputs") {
  NoiseCostFunction c = NoiseCostFunction::exp_decay(1.0, 1.0);
  REQUIRE_THROWS_AS(trade_demo(0.5, 1.0, 0.0, 0.5, c, 1.0), ValidationError);
  REQUIRE_THROWS_AS(trade_demo(0.5, 0.0, 1.0, 1.5, c, 1.0), ValidationError);
}

TEST_CASE("a scenario document parses into problem pieces") {
  scenario_file::ScenarioFile s = scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 0.5], [1.0, 0.5]]},
    "actions": [1.0, 0.0, 0.5],
    "utility": {"kind": "quadratic-loss"},
    "cost": {"kind": "exp-decay", "params": {"peak": 1.0, "rate": 1.0}},
    "bound": 1.0,
    "solver": {"seed": 9, "max_iter": 50}
  })");
  REQUIRE(s.bound == 1.0);
  REQUIRE(s.solver.seed == 9);
  REQUIRE(s.solver.max_iter == 50);
  REQUIRE(s.solver.tol == Catch::Approx(1e-6));  // untouched default
  REQUIRE(s.utility_kind == "quadratic-loss");
  REQUIRE(s.cost_kind == "exp-decay");
  REQUIRE(s.prior.atoms().size() == 2);
  REQUIRE_FALSE(s.experiment.has_value());
  bayes::DecisionProblem p = s.problem();
  REQUIRE(p.actions == std::vector<double>{0.0, 0.5, 1.0});
  // The echo records the effective seed explicitly.
  REQUIRE(s.echo.find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("scenario parsing fails loudly and names the offender") {
  REQUIRE_THROWS_WITH(scenario_file::parse_scenario_text("{nope"),
                      ContainsSubstring("invalid document"));
  REQUIRE_THROWS_WITH(scenario_file::parse_scenario_text(R"({"prioor": {}})"),
                      ContainsSubstring("unknown key \"prioor\""));
  REQUIRE_THROWS_WITH(scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 1.0]]},
    "actions": [0.0],
    "utility": {"kind": "quadratic-loss"},
    "bound": 1.0
  })"),
                      ContainsSubstring("missing key \"cost\""));
  REQUIRE_THROWS_WITH(scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 1.0]]},
    "actions": [0.0],
    "utility": {"kind": "quadratic-loss"},
    "cost": {"kind": "parabola", "params": {}},
    "bound": 1.0
  })"),
                      ContainsSubstring("cost.kind"));
  REQUIRE_THROWS_AS(scenario_file::parse_scenario("/no/such/file.json"), ScenarioError);
}

TEST_CASE("prior masses must account for one") {
  REQUIRE_THROWS_WITH(scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 0.5], [1.0, 0.4]]},
    "actions": [0.0],
    "utility": {"kind": "quadratic-loss"},
    "cost": {"kind": "cauchy", "params": {"peak": 1.0}},
    "bound": 1.0
  })"),
                      ContainsSubstring("sum to 1"));
}

TEST_CASE("experiment sections must cover the prior exactly") {
  std::string head = R"({
    "prior": {"atoms": [[0.0, 0.5], [1.0, 0.5]]},
    "actions": [0.0, 1.0],
    "utility": {"kind": "quadratic-loss"},
    "cost": {"kind": "cauchy", "params": {"peak": 1.0}},
    "bound": 3.0,
    "experiment": {"noise": )";
  REQUIRE_THROWS_WITH(
      scenario_file::parse_scenario_text(
          head + R"([[0.0, {"kind": "uniform", "width": 1.0}]]}})"),
      ContainsSubstring("cover every prior atom"));
  REQUIRE_THROWS_WITH(
      scenario_file::parse_scenario_text(
          head + R"([[0.0, {"kind": "uniform", "width": 1.0}],
                     [0.0, {"kind": "uniform", "width": 2.0}]]}})"),
      ContainsSubstring("twice"));
  scenario_file::ScenarioFile ok = scenario_file::parse_scenario_text(
      head + R"([[0.0, {"kind": "uniform", "width": 1.0}],
                 [1.0, {"kind": "mixture", "weights": [0.5, 0.5], "widths": [0.5, 1.5]}]]}})");
  REQUIRE(ok.experiment.has_value());
  REQUIRE(ok.experiment->noise_for(1.0).support_halfwidth() == Catch::Approx(1.5));
}

TEST_CASE("table payoffs need an atomic prior and full rows") {
  std::string tail = R"(,
    "cost": {"kind": "cauchy", "params": {"peak": 1.0}},
    "bound": 1.0
  })";
  scenario_file::ScenarioFile s = scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 0.6], [1.0, 0.4]]},
    "actions": [0.0, 1.0],
    "utility": {"kind": "table", "params": {"values": [[1.0, -1.0], [-1.0, 1.0]]}})" +
                                                                     tail);
  REQUIRE(s.utility.value(0.0, 0.0) == 1.0);
  REQUIRE(s.utility.value(1.0, 0.0) == -1.0);
  REQUIRE_THROWS_AS(s.utility.value(0.5, 0.0), ValidationError);
  REQUIRE_THROWS_WITH(scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 0.6], [1.0, 0.4]]},
    "actions": [0.0, 1.0],
    "utility": {"kind": "table", "params": {"values": [[1.0, -1.0]]}})" +
                                                         tail),
                      ContainsSubstring("one row per prior atom"));
}

TEST_CASE("demo plans override their defaults") {
  scenario_file::ScenarioFile s = scenario_file::parse_scenario_text(R"({
    "prior": {"atoms": [[0.0, 1.0]]},
    "actions": [0.0],
    "utility": {"kind": "quadratic-loss"},
    "cost": {"kind": "cauchy", "params": {"peak": 1.0}},
    "bound": 1.0,
    "demo": {
      "nonexistence": {"p": 0.25, "widths": [2.0, 20.0]},
      "clarke": {"scales": [1.5], "points": [0.0]},
      "trade": {"price": 0.7, "quality_low": 0.1, "quality_high": 0.9, "prob_high": 0.3}
    }
  })");
  REQUIRE(s.nonexistence.p == 0.25);
  REQUIRE(s.nonexistence.widths == std::vector<double>{2.0, 20.0});
  REQUIRE(s.clarke.scales == std::vector<double>{1.5});
  REQUIRE(s.trade.price == 0.7);
  REQUIRE(s.trade.prob_high == 0.3);
}
