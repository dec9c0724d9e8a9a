#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/experiments.hpp"
#include "optexp/measures.hpp"
#include "optexp/rng.hpp"

namespace optexp::axioms {

// Aggregate outcome of the randomized property suite for the cost
// functional.  The four deviation fields measure violations of exact
// identities (0 when the property holds); garble drops measure how much a
// mass-outward garble lowered the cost, which must stay strictly positive.
struct AxiomSuiteResult {
  int cases = 0;
  double max_consistency = 0.0;   // one-state cost vs the raw draw cost
  double max_prior_indep = 0.0;   // state-invariant cost across two priors
  double max_linearity = 0.0;     // cost of a mixture vs mixed costs
  double max_continuity = 0.0;    // excess of a width-nudge cost change over its bound
  int garble_cases = 0;
  double min_garble_drop = std::numeric_limits<double>::infinity();

  double max_deviation() const {
    return std::max({max_consistency, max_prior_indep, max_linearity, max_continuity});
  }
};

namespace detail {

inline costs::NoiseCostFunction random_cost(optexp::detail::Rng& rng, bool strict_everywhere) {
  int kind = static_cast<int>(rng.below(strict_everywhere ? 2 : 3));
  switch (kind) {
    case 0:
      return costs::NoiseCostFunction::exp_decay(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
    case 1:
      return costs::NoiseCostFunction::cauchy(rng.uniform(0.5, 2.0));
    default:
      return costs::NoiseCostFunction::tent(rng.uniform(0.5, 2.0), rng.uniform(1.0, 3.0));
  }
}

inline experiments::NoiseDistribution random_noise(optexp::detail::Rng& rng) {
  switch (static_cast<int>(rng.below(4))) {
    case 0:
      return experiments::NoiseDistribution::uniform(rng.uniform(0.3, 2.0));
    case 1: {
      double w = rng.uniform(0.3, 0.7);
      return experiments::NoiseDistribution::mixture({w, 1.0 - w},
                                                     {rng.uniform(0.2, 1.0), rng.uniform(1.0, 2.0)});
    }
    case 2:
      return experiments::NoiseDistribution::triangular(rng.uniform(0.5, 2.0));
    default:
      return experiments::NoiseDistribution::truncated_gaussian(rng.uniform(0.3, 1.0),
                                                                rng.uniform(1.0, 2.0), 64);
  }
}

inline measures::MixedDistribution random_atomic_prior(optexp::detail::Rng& rng) {
  int n = 2 + static_cast<int>(rng.below(3));
  std::vector<double> locs;
  while (static_cast<int>(locs.size()) < n) {
    double cand = rng.uniform(-2.0, 2.0);
    bool ok = true;
    for (double l : locs)
      if (std::abs(l - cand) < 0.05) ok = false;
    if (ok) locs.push_back(cand);
  }
  std::sort(locs.begin(), locs.end());
  std::vector<double> raw(n);
  double total = 0.0;
  for (auto& r : raw) {
    r = rng.uniform(0.2, 1.0);
    total += r;
  }
  std::vector<measures::Atom> atoms;
  for (int i = 0; i < n; ++i) atoms.push_back({locs[i], raw[i] / total});
  return measures::MixedDistribution(std::move(atoms));
}

inline experiments::Experiment random_experiment(optexp::detail::Rng& rng,
                                                 const measures::MixedDistribution& prior,
                                                 double bound) {
  std::map<double, experiments::NoiseDistribution> assignment;
  for (const auto& a : prior.atoms()) assignment.emplace(a.location, random_noise(rng));
  return experiments::Experiment(std::move(assignment), experiments::SignalFunction::additive(),
                                 bound);
}

}  // namespace detail

// Randomized check of the cost functional's defining properties.  Each
// equality case draws a cost, priors, and experiments and measures the
// violation of: a one-state experiment costing its state's draw cost; a
// state-invariant experiment costing the same under any prior; mixing
// experiments mixing their costs; and a relative width nudge moving the cost
// by no more than twice its relative size times the peak cost.  Each garble
// case applies a mass-outward kernel under a strictly decreasing cost and
// records the (necessarily positive) cost drop.
inline AxiomSuiteResult run_cost_axiom_suite(std::uint64_t seed, int equality_cases = 200,
                                             int garble_cases = 100) {
  if (equality_cases < 0 || garble_cases < 0)
    throw ValidationError("run_cost_axiom_suite: case counts must be >= 0");
  optexp::detail::Rng rng(seed);
  measures::Quadrature tight;
  tight.abs_tol = 1e-11;
  constexpr double kBound = 10.0;
  AxiomSuiteResult out;

  for (int i = 0; i < equality_cases; ++i) {
    costs::NoiseCostFunction c = detail::random_cost(rng, false);
    measures::MixedDistribution F = detail::random_atomic_prior(rng);
    measures::MixedDistribution G = detail::random_atomic_prior(rng);
    experiments::Experiment P = detail::random_experiment(rng, F, kBound);
    experiments::Experiment Q = detail::random_experiment(rng, F, kBound);

    // One-state experiments cost exactly the state's draw cost.
    {
      const auto& a = F.atoms()[rng.below(F.atoms().size())];
      measures::MixedDistribution dirac(std::vector<measures::Atom>{{a.location, 1.0}});
      std::map<double, experiments::NoiseDistribution> one;
      experiments::NoiseDistribution d = P.noise_for(a.location);
      one.emplace(a.location, d);
      experiments::Experiment single(std::move(one), experiments::SignalFunction::additive(),
                                     kBound);
      double lhs = costs::experiment_cost(single, dirac, c, tight);
      double rhs = costs::noise_cost(d, c, tight);
      out.max_consistency = std::max(out.max_consistency, std::abs(lhs - rhs));
    }

    // A state-invariant experiment costs the same under any prior.
    {
      experiments::NoiseDistribution d = detail::random_noise(rng);
      std::map<double, experiments::NoiseDistribution> mf, mg;
      for (const auto& a : F.atoms()) mf.emplace(a.location, d);
      for (const auto& a : G.atoms()) mg.emplace(a.location, d);
      experiments::Experiment pf(std::move(mf), experiments::SignalFunction::additive(), kBound);
      experiments::Experiment pg(std::move(mg), experiments::SignalFunction::additive(), kBound);
      double cf = costs::experiment_cost(pf, F, c, tight);
      double cg = costs::experiment_cost(pg, G, c, tight);
      out.max_prior_indep = std::max(out.max_prior_indep, std::abs(cf - cg));
    }

    // Mixing experiments mixes their costs.
    {
      double alpha = rng.uniform(0.1, 0.9);
      experiments::Experiment M = experiments::mix_experiments(P, Q, alpha);
      double lhs = costs::experiment_cost(M, F, c, tight);
      double rhs = alpha * costs::experiment_cost(P, F, c, tight) +
                   (1.0 - alpha) * costs::experiment_cost(Q, F, c, tight);
      out.max_linearity = std::max(out.max_linearity, std::abs(lhs - rhs));
    }

    // A relative width nudge moves a uniform's cost by at most twice the
    // nudge times the peak cost.
    {
      double w = rng.uniform(0.3, 2.0);
      double rel = 1e-7;
      double c0 = costs::noise_cost(experiments::NoiseDistribution::uniform(w), c, tight);
      double c1 = costs::noise_cost(experiments::NoiseDistribution::uniform(w * (1.0 + rel)), c,
                                    tight);
      double excess = std::abs(c1 - c0) - 2.0 * rel * c.peak();
      out.max_continuity = std::max(out.max_continuity, std::max(0.0, excess));
    }
    ++out.cases;
  }

  for (int i = 0; i < garble_cases; ++i) {
    costs::NoiseCostFunction c = detail::random_cost(rng, true);
    experiments::NoiseDistribution d = detail::random_noise(rng);
    double hw = d.support_halfwidth();
    experiments::RestrictedKernelSpec spec(0.1 * hw, 0.4 * hw, rng.uniform(0.6, 0.9) * hw,
                                           rng.uniform(0.2, 0.8));
    experiments::NoiseDistribution g = experiments::restricted_garble(d, spec);
    double drop = costs::noise_cost(d, c, tight) - costs::noise_cost(g, c, tight);
    out.min_garble_drop = std::min(out.min_garble_drop, drop);
    ++out.garble_cases;
  }
  return out;
}

}  // namespace optexp::axioms
