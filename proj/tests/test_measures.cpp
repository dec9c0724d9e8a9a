#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"
#include "optexp/measures.hpp"
#include "optexp/quadrature.hpp"

using namespace optexp;
using namespace optexp::measures;

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  auto nodes = gauss_legendre(8);
  // Degree up to 2*8-1 = 15 is exact on [-1, 1].
  for (int deg : {0, 3, 7, 12, 15}) {
    double acc = 0.0;
    for (auto [x, w] : nodes) acc += w * std::pow(x, deg);
    double exact = (deg % 2 == 1) ? 0.0 : 2.0 / (deg + 1);
    REQUIRE(acc == Catch::Approx(exact).margin(1e-13));
  }
}

TEST_CASE("adaptive quadrature handles a kink when it is a split point") {
  Quadrature q;
  double v = integrate_segmented([](double x) { return std::abs(x); }, -1.0, 2.0, {0.0}, q);
  REQUIRE(v == Catch::Approx(2.5).margin(1e-10));
}

TEST_CASE("quadrature failure surfaces as a numerical error") {
  Quadrature q;
  q.max_subdivisions = 2;
  q.abs_tol = 1e-15;
  REQUIRE_THROWS_AS(
      integrate([](double x) { return std::sin(300.0 * x) / (1e-6 + std::abs(x)); }, -3.0, 3.0, q),
      QuadratureNonConvergence);
}

TEST_CASE("uniform prior density") {
  PriorDensity d = PriorDensity::uniform(-1.0, 3.0, 0.5);
  REQUIRE(d.value(0.0) == Catch::Approx(0.125));
  REQUIRE(d.value(4.0) == 0.0);
  REQUIRE(d.mass() == Catch::Approx(0.5));
}

TEST_CASE("truncated gaussian density carries its stated mass") {
  PriorDensity d = PriorDensity::truncated_gaussian(0.3, 0.8, -1.0, 2.0, 0.7);
  Quadrature q;
  double m = integrate([&](double x) { return d.value(x); }, -1.0, 2.0, q);
  REQUIRE(m == Catch::Approx(0.7).margin(1e-9));
  REQUIRE(d.value(-1.5) == 0.0);
}

TEST_CASE("grid prior density interpolates and integrates") {
  PriorDensity d = PriorDensity::grid({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
  REQUIRE(d.mass() == Catch::Approx(1.0));
  REQUIRE(d.value(0.5) == Catch::Approx(0.5));
  REQUIRE(d.value(1.5) == Catch::Approx(0.5));
}

TEST_CASE("mixed distribution validates its mass budget") {
  REQUIRE_THROWS_WITH(MixedDistribution({{0.0, 0.4}, {1.0, 0.5}}),
                      Catch::Matchers::ContainsSubstring("sum to 1"));
  REQUIRE_THROWS_AS(MixedDistribution({{0.0, 0.5}, {0.0, 0.5}}), ValidationError);
  REQUIRE_NOTHROW(MixedDistribution({{0.0, 0.5}, {1.0, 0.5}}));
}

TEST_CASE("mixed distribution combines atoms and density") {
  MixedDistribution F({{0.0, 0.5}}, PriorDensity::uniform(1.0, 2.0, 0.5));
  REQUIRE_FALSE(F.is_atomic());
  REQUIRE(F.atom_mass() == Catch::Approx(0.5));
  REQUIRE(F.density_mass() == Catch::Approx(0.5));
  auto [lo, hi] = F.support_bounds();
  REQUIRE(lo == Catch::Approx(0.0));
  REQUIRE(hi == Catch::Approx(2.0));
}

TEST_CASE("decompose splits atoms from the continuous part") {
  MixedDistribution F({{0.0, 0.25}, {2.0, 0.25}}, PriorDensity::uniform(-1.0, 1.0, 0.5));
  Decomposition d = decompose(F);
  REQUIRE(d.atoms.size() == 2);
  REQUIRE(d.atom_mass == Catch::Approx(0.5));
  REQUIRE(d.continuous.has_value());
  REQUIRE(d.continuous_mass == Catch::Approx(0.5));
}

TEST_CASE("integrate over a mixed distribution matches the split computation") {
  MixedDistribution F({{0.0, 0.5}}, PriorDensity::uniform(0.0, 2.0, 0.5));
  Quadrature q;
  double v = integrate(F, [](double x) { return x * x; }, q);
  // Atom contributes 0; the density contributes 0.25 * (8/3).
  REQUIRE(v == Catch::Approx(0.25 * 8.0 / 3.0).margin(1e-9));
}

TEST_CASE("discretize preserves total mass and the atom part exactly") {
  MixedDistribution F({{-2.0, 0.3}}, PriorDensity::truncated_gaussian(0.0, 1.0, -1.0, 1.0, 0.7));
  MixedDistribution D = discretize(F, 17);
  REQUIRE(D.is_atomic());
  double total = 0.0;
  bool kept_atom = false;
  for (const auto& a : D.atoms()) {
    total += a.mass;
    if (a.location == -2.0 && a.mass == 0.3) kept_atom = true;
  }
  REQUIRE(kept_atom);
  REQUIRE(total == Catch::Approx(1.0).margin(1e-12));

  // The discretized mean should track the continuous mean closely.
  Quadrature q;
  double mean_f = -2.0 * 0.3 + integrate([&](double x) { return x * F.density()->value(x); },
                                         -1.0, 1.0, q);
  double mean_d = 0.0;
  for (const auto& a : D.atoms()) mean_d += a.location * a.mass;
  REQUIRE(mean_d == Catch::Approx(mean_f).margin(1e-6));
}
