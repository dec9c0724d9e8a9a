#include "catch_amalgamated.hpp"
#include "optexp/axioms.hpp"

using namespace optexp;

TEST_CASE("randomized cost properties hold at tight tolerances") {
  axioms::AxiomSuiteResult r = axioms::run_cost_axiom_suite(7, 60, 30);
  REQUIRE(r.cases == 60);
  REQUIRE(r.garble_cases == 30);
  REQUIRE(r.max_consistency <= 2e-9);
  REQUIRE(r.max_prior_indep <= 2e-9);
  REQUIRE(r.max_linearity <= 2e-9);
  REQUIRE(r.max_continuity <= 2e-9);
  REQUIRE(r.max_deviation() <= 2e-9);
  REQUIRE(r.min_garble_drop > 1e-9);
}

TEST_CASE("the suite is seed-deterministic") {
  axioms::AxiomSuiteResult a = axioms::run_cost_axiom_suite(11, 20, 10);
  axioms::AxiomSuiteResult b = axioms::run_cost_axiom_suite(11, 20, 10);
  REQUIRE(a.max_deviation() == b.max_deviation());
  REQUIRE(a.min_garble_drop == b.min_garble_drop);
}

TEST_CASE("case counts must be nonnegative") {
  REQUIRE_THROWS_AS(axioms::run_cost_axiom_suite(1, -1, 0), ValidationError);
}
