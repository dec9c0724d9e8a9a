#include <cmath>
#include <map>
#include <vector>

#include "catch_amalgamated.hpp"
#include "optexp/experiments.hpp"
#include "optexp/quadrature.hpp"

using namespace optexp;
using namespace optexp::experiments;

namespace {

// Independent mass check: 2 * integral of the density over the positive axis.
double quadrature_mass(const NoiseDistribution& d) {
  measures::Quadrature q;
  double hw = d.support_halfwidth();
  return 2.0 * measures::integrate_segmented([&](double x) { return d.density(x); }, 0.0, hw,
                                             d.breakpoints(), q);
}

}  // namespace

TEST_CASE("uniform noise closed forms") {
  NoiseDistribution u = NoiseDistribution::uniform(2.0);
  REQUIRE(u.density(0.0) == Catch::Approx(0.25));
  REQUIRE(u.density(2.0) == Catch::Approx(0.25));  // closed support
  REQUIRE(u.density(2.1) == 0.0);
  REQUIRE(u.half_mass(1.0) == Catch::Approx(0.25));
  REQUIRE(u.total_mass() == Catch::Approx(1.0));
  REQUIRE(u.cdf(0.0) == Catch::Approx(0.5));
  REQUIRE(u.support_halfwidth() == Catch::Approx(2.0));
  REQUIRE(u.uniform_width() == Catch::Approx(2.0));
  REQUIRE_THROWS_AS(NoiseDistribution::uniform(0.0), ValidationError);
}

TEST_CASE("mixture of uniforms tracks weights and residual") {
  NoiseDistribution m = NoiseDistribution::mixture({0.25, 0.5}, {1.0, 2.0}, 0.25);
  REQUIRE(m.residual_mass() == Catch::Approx(0.25));
  REQUIRE(m.total_mass() == Catch::Approx(0.75));
  // Density stacks the covering components: 0.25/2 + 0.5/4 inside |x| <= 1.
  REQUIRE(m.density(0.5) == Catch::Approx(0.25));
  REQUIRE(m.density(1.5) == Catch::Approx(0.125));
  REQUIRE(m.half_mass(1.0) == Catch::Approx(0.25 * 0.5 + 0.5 * 0.25));
  REQUIRE(quadrature_mass(m) == Catch::Approx(0.75).margin(1e-9));
  REQUIRE_THROWS_AS(NoiseDistribution::mixture({0.5, 0.6}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("triangular noise is an exact gridded density") {
  NoiseDistribution t = NoiseDistribution::triangular(2.0);
  REQUIRE(t.density(0.0) == Catch::Approx(0.5));
  REQUIRE(t.density(1.0) == Catch::Approx(0.25));
  REQUIRE(t.density(2.0) == 0.0);
  REQUIRE(t.total_mass() == Catch::Approx(1.0));
  REQUIRE(t.half_mass(2.0) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(quadrature_mass(t) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("gridded densities enforce the declared shape") {
  REQUIRE_NOTHROW(NoiseDistribution::gridded({0.0, 1.0}, {1.0, 0.0}));
  // Rising away from zero violates strict unimodality.
  REQUIRE_THROWS_AS(NoiseDistribution::gridded({0.0, 0.5, 1.0}, {0.5, 0.8, 0.0}),
                    UnimodalityViolation);
  // A flat positive stretch is fine only for the weak shape.
  REQUIRE_THROWS_AS(NoiseDistribution::gridded({0.0, 0.5, 1.0}, {0.5, 0.5, 0.0}),
                    UnimodalityViolation);
  REQUIRE_NOTHROW(
      NoiseDistribution::gridded({0.0, 0.5, 1.0}, {0.5, 0.5, 0.0}, DensityShape::WeakUnimodal));
}

TEST_CASE("truncated gaussian noise normalizes to mass one") {
  NoiseDistribution g = NoiseDistribution::truncated_gaussian(0.5, 1.5);
  REQUIRE(g.total_mass() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(quadrature_mass(g) == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(g.density(0.0) > g.density(1.0));
}

TEST_CASE("restricted garble moves mass outward at the density level") {
  NoiseDistribution u = NoiseDistribution::uniform(1.0);
  RestrictedKernelSpec k{0.1, 0.4, 0.8, 0.5};
  REQUIRE(is_restricted_kernel_consistent(k));
  NoiseDistribution g = restricted_garble(u, k);

  // Region (x0, xhat) is thinned by 1 - alpha; [xhat, x1) receives the mass.
  REQUIRE(g.density(0.2) == Catch::Approx(0.25));
  double moved = 0.5 * (u.half_mass(0.4) - u.half_mass(0.1));
  REQUIRE(moved == Catch::Approx(0.075));
  REQUIRE(g.density(0.6) == Catch::Approx(0.5 + moved / 0.4));
  REQUIRE(g.density(0.05) == Catch::Approx(0.5));
  REQUIRE(g.density(0.9) == Catch::Approx(0.5));

  REQUIRE(g.total_mass() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(quadrature_mass(g) == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(g.half_mass(1.0) == Catch::Approx(0.5).margin(1e-12));
  // Mass accounting at the pattern's edges.
  REQUIRE(g.half_mass(0.1) == Catch::Approx(u.half_mass(0.1)));
  REQUIRE(g.half_mass(0.4) == Catch::Approx(u.half_mass(0.4) - moved));
  REQUIRE(g.half_mass(0.8) == Catch::Approx(u.half_mass(0.8)));
}

TEST_CASE("restricted garble needs mass in the donor region") {
  NoiseDistribution narrow = NoiseDistribution::uniform(0.05);
  RestrictedKernelSpec k{0.1, 0.4, 0.8, 0.5};
  REQUIRE_THROWS_AS(restricted_garble(narrow, k), EmptyMassRegion);
  REQUIRE_THROWS_AS(RestrictedKernelSpec(0.4, 0.1, 0.8, 0.5), ValidationError);
  REQUIRE_THROWS_AS(RestrictedKernelSpec(0.1, 0.4, 0.8, 1.5), ValidationError);
}

TEST_CASE("signal functions apply and invert") {
  SignalFunction add = SignalFunction::additive();
  REQUIRE(add.apply(2.0, 0.5) == Catch::Approx(2.5));
  REQUIRE(add.invert(2.0, 2.5) == Catch::Approx(0.5));
  REQUIRE(add.is_additive());

  SignalFunction blind = SignalFunction::state_blind();
  REQUIRE(blind.apply(2.0, 0.5) == Catch::Approx(0.5));
  REQUIRE_FALSE(blind.is_additive());

  SignalFunction scaled = SignalFunction::custom(
      [](double theta, double x) { return theta + 2.0 * x; },
      [](double theta, double s) { return (s - theta) / 2.0; });
  REQUIRE(scaled.invert(1.0, 2.0) == Catch::Approx(0.5));
  // A wrong inverse fails the round-trip probe.
  REQUIRE_THROWS_AS(SignalFunction::custom([](double t, double x) { return t + 2.0 * x; },
                                           [](double t, double s) { return s - t; }),
                    ValidationError);
  // Non-monotone signals are rejected.
  REQUIRE_THROWS_AS(SignalFunction::custom([](double t, double x) { return t + x * x; },
                                           [](double t, double s) { return std::sqrt(s - t); }),
                    ValidationError);
}

TEST_CASE("experiments validate assignment and bound") {
  std::map<double, NoiseDistribution> assign;
  assign.emplace(0.0, NoiseDistribution::uniform(0.5));
  assign.emplace(1.0, NoiseDistribution::uniform(1.0));
  Experiment P(assign, SignalFunction::additive(), 2.0);
  REQUIRE(P.all_uniform());
  REQUIRE(P.noise_for(0.0).uniform_width() == Catch::Approx(0.5));
  REQUIRE_THROWS_AS(P.noise_for(0.5), UnassignedState);

  std::map<double, NoiseDistribution> wide;
  wide.emplace(0.0, NoiseDistribution::uniform(2.5));
  REQUIRE_THROWS_AS(Experiment(wide, SignalFunction::additive(), 2.0), WidthExceedsBound);
}

TEST_CASE("uniform experiments are built from a width map") {
  Experiment P = make_uniform_experiment({{0.0, 0.5}, {1.0, 1.5}}, SignalFunction::additive(), 2.0);
  REQUIRE(P.all_uniform());
  REQUIRE(P.noise_for(1.0).uniform_width() == Catch::Approx(1.5));
}

TEST_CASE("mixing two uniform noises is exact") {
  NoiseDistribution a = NoiseDistribution::uniform(1.0);
  NoiseDistribution b = NoiseDistribution::uniform(2.0);
  NoiseDistribution m = mix_noise(a, b, 0.25);
  REQUIRE(m.total_mass() == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(m.density(0.5) == Catch::Approx(0.25 * 0.5 + 0.75 * 0.25));
  REQUIRE(m.density(1.5) == Catch::Approx(0.75 * 0.25));
  REQUIRE(mix_noise(a, b, 1.0).density(0.5) == Catch::Approx(a.density(0.5)));
}

TEST_CASE("mixing general noises preserves mass through resampling") {
  NoiseDistribution t = NoiseDistribution::triangular(1.5);
  NoiseDistribution u = NoiseDistribution::uniform(1.0);
  NoiseDistribution m = mix_noise(t, u, 0.4);
  REQUIRE(m.total_mass() == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(m.density(0.5) == Catch::Approx(0.4 * t.density(0.5) + 0.6 * 0.5).margin(1e-6));
}

TEST_CASE("mixing experiments requires compatible structure") {
  Experiment P = make_uniform_experiment({{0.0, 0.5}, {1.0, 1.0}}, SignalFunction::additive(), 2.0);
  Experiment Q = make_uniform_experiment({{0.0, 1.0}, {1.0, 0.5}}, SignalFunction::additive(), 2.0);
  Experiment M = mix_experiments(P, Q, 0.5);
  REQUIRE(M.noise_for(0.0).density(0.25) ==
          Catch::Approx(0.5 * 1.0 + 0.5 * 0.5));

  Experiment R = make_uniform_experiment({{0.0, 0.5}}, SignalFunction::additive(), 2.0);
  REQUIRE_THROWS_AS(mix_experiments(P, R, 0.5), IncompatibleExperiments);
  Experiment S = make_uniform_experiment({{0.0, 0.5}, {1.0, 1.0}}, SignalFunction::additive(), 3.0);
  REQUIRE_THROWS_AS(mix_experiments(P, S, 0.5), IncompatibleExperiments);
}

TEST_CASE("averaging a uniform experiment over an atomic prior is exact") {
  Experiment P = make_uniform_experiment({{0.0, 0.5}, {1.0, 1.5}}, SignalFunction::additive(), 2.0);
  measures::MixedDistribution F({{0.0, 0.25}, {1.0, 0.75}});
  NoiseDistribution avg = average_experiment(P, F);
  REQUIRE(avg.mixture_weights().size() == 2);
  REQUIRE(avg.mixture_weights()[0] == Catch::Approx(0.25));
  REQUIRE(avg.mixture_widths()[1] == Catch::Approx(1.5));
  REQUIRE(avg.total_mass() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("garbling an experiment garbles each state's noise") {
  Experiment P = make_uniform_experiment({{0.0, 1.0}, {1.0, 1.0}}, SignalFunction::additive(), 2.0);
  RestrictedKernelSpec k{0.1, 0.4, 0.8, 0.5};
  Experiment G = garble_experiment(P, k);
  REQUIRE(G.noise_for(0.0).density(0.2) == Catch::Approx(0.25));
  REQUIRE(G.noise_for(0.0).total_mass() == Catch::Approx(1.0).margin(1e-12));
}
