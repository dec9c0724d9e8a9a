#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"
#include "optexp/uniformize.hpp"
#include "support.hpp"

using namespace optexp;
using namespace optexp::uniformize;
using experiments::NoiseDistribution;

TEST_CASE("approximation grids pair dyadic spacing with triadic count") {
  ApproxGrid g(2);
  REQUIRE(g.spacing == Catch::Approx(0.25));
  REQUIRE(g.count == 9);
  REQUIRE_THROWS_AS(ApproxGrid(0), ValidationError);
  REQUIRE_THROWS_AS(ApproxGrid(16), ValidationError);
}

TEST_CASE("triangular target at the coarsest level") {
  UniformMixtureApprox a = mixture_weights(NoiseDistribution::triangular(1.0), 1);
  REQUIRE(a.weights.size() == 3);
  REQUIRE(a.weights[0] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(a.weights[1] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(a.weights[2] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(a.l1_deficit == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("triangular target halves its deficit per level") {
  NoiseDistribution t = NoiseDistribution::triangular(1.0);
  for (int n = 1; n <= 6; ++n) {
    UniformMixtureApprox a = mixture_weights(t, n);
    REQUIRE(a.l1_deficit == Catch::Approx(std::ldexp(1.0, -n)).margin(1e-12));
  }
}

TEST_CASE("a uniform target on the grid is reproduced exactly") {
  ApproxGrid g(2);
  UniformMixtureApprox a = mixture_weights(NoiseDistribution::uniform(3 * g.spacing), g);
  for (int j = 0; j < g.count; ++j)
    REQUIRE(a.weights[j] == Catch::Approx(j == 2 ? 1.0 : 0.0).margin(1e-14));
  REQUIRE(a.l1_deficit == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("the mixture stays below its target everywhere") {
  for (const NoiseDistribution& target :
       {NoiseDistribution::triangular(1.0), NoiseDistribution::truncated_gaussian(0.5, 1.4)}) {
    UniformMixtureApprox a = mixture_weights(target, 3);
    NoiseDistribution mix = a.mixture();
    double span = a.grid.spacing * a.grid.count;
    for (int i = 0; i <= 10000; ++i) {
      double x = span * i / 10000.0;
      REQUIRE(mix.density(x) <= target.density(x) + 1e-12);
    }
    // At the grid points the step density meets the target.
    for (int j = 1; j <= a.grid.count; ++j) {
      double x = a.grid.spacing * j;
      REQUIRE(mix.density(x) == Catch::Approx(target.density(x)).margin(1e-9));
    }
    double total = 0.0;
    for (double w : a.weights) total += w;
    REQUIRE(total <= 1.0 + 1e-12);
  }
}

TEST_CASE("back-substituted weights agree with a dense linear solve") {
  for (const NoiseDistribution& target :
       {NoiseDistribution::triangular(1.0), NoiseDistribution::truncated_gaussian(0.6, 1.2)}) {
    for (int n : {1, 2, 3}) {
      ApproxGrid g(n);
      UniformMixtureApprox a = mixture_weights(target, g);
      std::vector<double> dense = testsupport::dense_mixture_weights(target, g);
      for (int j = 0; j < g.count; ++j)
        REQUIRE(a.weights[j] == Catch::Approx(dense[j]).margin(1e-10));
    }
  }
}

TEST_CASE("a rising target aborts with a negative weight") {
  NoiseDistribution rising = NoiseDistribution::gridded(
      {0.0, 0.4, 0.8}, {0.2, 0.9, 0.0}, experiments::DensityShape::EvenOnly, true);
  REQUIRE_THROWS_AS(mixture_weights(rising, 2), NegativeWeight);
}

TEST_CASE("convergence report tracks the deficit per level") {
  ConvergenceReport rep = approx_converges(NoiseDistribution::triangular(1.0), {1, 2, 3, 4});
  REQUIRE(rep.l1.size() == 4);
  REQUIRE(rep.nonincreasing);
  for (std::size_t i = 0; i + 1 < rep.l1.size(); ++i) REQUIRE(rep.l1[i + 1] < rep.l1[i]);
}

TEST_CASE("best component scans the whole grid under the bound") {
  bayes::DecisionProblem problem(measures::MixedDistribution({{0.0, 1.0}}), {0.0},
                                 bayes::Utility::quadratic());
  bayes::DecisionRule rule = bayes::DecisionRule::constant(0.0);
  costs::NoiseCostFunction c = costs::NoiseCostFunction::tent(1.0, 1.0);
  ApproxGrid g(2);

  // With a constant rule the payoff term is flat, so wider is cheaper and the
  // widest in-bound width wins.
  BestComponent wide = best_uniform_component(0.0, rule, problem, c, g, 10.0);
  REQUIRE(wide.index == 9);
  REQUIRE(wide.width == Catch::Approx(9 * 0.25));

  BestComponent capped = best_uniform_component(0.0, rule, problem, c, g, 1.1);
  REQUIRE(capped.index == 4);
  REQUIRE(capped.width == Catch::Approx(1.0));
}

TEST_CASE("the chosen component beats every discretized mixture level") {
  measures::MixedDistribution prior({{0.0, 0.5}, {1.0, 0.5}});
  bayes::DecisionProblem problem(prior, {0.0, 0.5, 1.0}, bayes::Utility::quadratic());
  costs::NoiseCostFunction c = costs::NoiseCostFunction::tent(0.4, 1.5);
  std::map<double, experiments::NoiseDistribution> assign;
  assign.emplace(0.0, NoiseDistribution::triangular(0.8));
  assign.emplace(1.0, NoiseDistribution::triangular(1.2));
  experiments::Experiment P(assign, experiments::SignalFunction::additive(), 2.0);

  const int n_max = 4;
  DominanceReport rep = dominating_uniform_experiment(P, problem, c, n_max);
  bayes::DecisionRule rule = bayes::decision_rule(P, problem, {}, 8193);
  for (int n = 1; n <= n_max; ++n) {
    double v_qn = 0.0;
    for (const auto& a : prior.atoms()) {
      UniformMixtureApprox approx = mixture_weights(P.noise_for(a.location), n);
      double v = approx.l1_deficit * optimize::w_eval(rule, problem.utility, a.location, c, 0.0);
      for (std::size_t j = 0; j < approx.weights.size(); ++j)
        v += approx.weights[j] *
             optimize::w_eval(rule, problem.utility, a.location, c,
                              approx.grid.spacing * static_cast<double>(j + 1));
      v_qn += a.mass * v;
    }
    REQUIRE(rep.value_fixed_rule >= v_qn - 1e-12);
  }
  REQUIRE(rep.value_reoptimized >= rep.value_fixed_rule - 1e-9);
  REQUIRE(rep.experiment.has_value());
}

TEST_CASE("an on-grid uniform experiment is never strictly dominated by itself") {
  measures::MixedDistribution prior({{0.0, 0.5}, {1.0, 0.5}});
  bayes::DecisionProblem problem(prior, {0.0, 0.5, 1.0}, bayes::Utility::quadratic());
  costs::NoiseCostFunction c = costs::NoiseCostFunction::exp_decay(0.5, 1.0);
  experiments::Experiment P = experiments::make_uniform_experiment(
      {{0.0, 0.75}, {1.0, 0.75}}, experiments::SignalFunction::additive(), 2.0);

  DominanceReport rep = dominating_uniform_experiment(P, problem, c, 3);
  // The grid contains P's own widths, so the fixed-rule value cannot drop;
  // the slack covers the quadrature behind value_original.
  REQUIRE(rep.value_fixed_rule >= rep.value_original - 1e-8);
}
