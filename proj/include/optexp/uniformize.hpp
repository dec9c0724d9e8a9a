#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "optexp/bayes.hpp"
#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/experiments.hpp"
#include "optexp/optimize.hpp"

namespace optexp::uniformize {

// Dyadic approximation grid at refinement level n: spacing 2^-n and widths
// j * spacing for j = 1..3^n, so the covered span 1.5^n grows while the mesh
// shrinks.
struct ApproxGrid {
  int level;
  double spacing;
  int count;

  explicit ApproxGrid(int n) : level(n) {
    if (n < 1 || n > 15) throw ValidationError("ApproxGrid: level must lie in [1, 15]");
    spacing = std::ldexp(1.0, -n);
    count = 1;
    for (int i = 0; i < n; ++i) count *= 3;
  }
};

// A sub-probability mixture of centered uniforms whose step density matches
// the target at the grid points from below; l1_deficit is the unassigned
// mass, which equals the L1 distance to any target the step density
// minorizes.
struct UniformMixtureApprox {
  ApproxGrid grid;
  std::vector<double> weights;  // weights[j-1] belongs to width j * spacing
  experiments::NoiseDistribution target;
  double l1_deficit;

  experiments::NoiseDistribution mixture() const {
    std::vector<double> widths(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j)
      widths[j] = grid.spacing * static_cast<double>(j + 1);
    return experiments::NoiseDistribution::mixture(weights, std::move(widths), l1_deficit);
  }
};

// Weights that make the mixture's step density agree with the target density
// at every grid point.  The triangular system is solved from the widest
// component inward: the running tail is the density wider components already
// contribute at the current grid point, and the new weight tops it up to the
// target value.  A genuinely negative top-up means the target rises across
// the grid and the construction is invalid; negative rounding dust is
// clamped to zero.  The step values are re-checked against the target before
// returning.
inline UniformMixtureApprox mixture_weights(const experiments::NoiseDistribution& target,
                                            const ApproxGrid& grid) {
  if (std::abs(target.total_mass() - 1.0) > 1e-9)
    throw ValidationError("mixture_weights: target must carry total mass 1");
  double delta = grid.spacing;
  int k = grid.count;
  std::vector<double> weights(k, 0.0);
  std::vector<double> step(k, 0.0);  // mixture density on ((j-1)*delta, j*delta]
  double tail = 0.0;
  for (int j = k; j >= 1; --j) {
    double width = delta * j;
    double alpha = 2.0 * width * (target.density(width) - tail);
    if (alpha < -1e-12)
      throw NegativeWeight("mixture_weights: target density rises across the grid");
    alpha = std::max(alpha, 0.0);
    weights[j - 1] = alpha;
    tail += alpha / (2.0 * width);
    step[j - 1] = tail;
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (total > 1.0 + 1e-12)
    throw NumericalError("mixture_weights: component mass exceeds the target's");
  for (int j = 1; j <= k; ++j) {
    double pj = target.density(delta * j);
    if (step[j - 1] > pj + 1e-12)
      throw NumericalError("mixture_weights: step density overshoots the target");
    if (std::abs(step[j - 1] - pj) > 1e-9)
      throw NumericalError("mixture_weights: step density misses the target at a grid point");
  }
  return UniformMixtureApprox{grid, std::move(weights), target, std::max(0.0, 1.0 - total)};
}

inline UniformMixtureApprox mixture_weights(const experiments::NoiseDistribution& target,
                                            int level) {
  return mixture_weights(target, ApproxGrid(level));
}

// L1 distances of the level-n approximations for each requested level.  For
// a minorized target the distance is exactly the unassigned mass.
struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<double> l1;
  bool nonincreasing = true;
};

inline ConvergenceReport approx_converges(const experiments::NoiseDistribution& target,
                                          const std::vector<int>& levels) {
  ConvergenceReport rep;
  for (int n : levels) {
    rep.levels.push_back(n);
    rep.l1.push_back(mixture_weights(target, ApproxGrid(n)).l1_deficit);
  }
  for (std::size_t i = 0; i + 1 < rep.l1.size(); ++i)
    if (rep.l1[i + 1] > rep.l1[i] + 1e-12) rep.nonincreasing = false;
  return rep;
}

// Best single grid width for one state against a fixed rule, searched over
// every index of the grid: index 0 is the perfect-signal branch, index j > 0
// the width j * spacing, skipping widths at or above the bound.  Ascending
// comparison with strict improvement keeps ties at the smaller index.
struct BestComponent {
  int index;     // 0 = perfect branch
  double width;  // index * spacing
  double value;
};

inline BestComponent best_uniform_component(double theta, const bayes::DecisionRule& rule,
                                            const bayes::DecisionProblem& problem,
                                            const costs::NoiseCostFunction& c,
                                            const ApproxGrid& grid, double bound) {
  BestComponent best{0, 0.0, optimize::w_eval(rule, problem.utility, theta, c, 0.0)};
  for (int j = 1; j <= grid.count; ++j) {
    double w = grid.spacing * static_cast<double>(j);
    if (!(w < bound)) break;
    double v = optimize::w_eval(rule, problem.utility, theta, c, w);
    if (v > best.value) best = {j, w, v};
  }
  return best;
}

// Outcome of replacing every state's noise by its best grid width.
// value_original is the experiment's value under pointwise-optimal play;
// value_fixed_rule keeps the original experiment's rule, so the gap between
// the two margins shows how much re-optimizing the rule contributes.
// experiment is present when every chosen width is positive (a width-0 state
// has no density to build).
struct DominanceReport {
  bayes::WidthMap widths;
  double value_original;
  double value_fixed_rule;
  double value_reoptimized;
  std::optional<experiments::Experiment> experiment;
};

// Per-state uniform replacement: each state takes the best (level, index)
// pair over levels 1..n_max, judged against the original experiment's own
// rule.  Ties keep the earlier level and smaller index.
inline DominanceReport dominating_uniform_experiment(const experiments::Experiment& P,
                                                     const bayes::DecisionProblem& problem,
                                                     const costs::NoiseCostFunction& c, int n_max,
                                                     const measures::Quadrature& q = {},
                                                     int rule_grid = 8193, int prior_nodes = 33) {
  if (n_max < 1) throw ValidationError("dominating_uniform_experiment: n_max must be >= 1");
  bayes::DecisionProblem work =
      problem.prior.is_atomic()
          ? problem
          : bayes::DecisionProblem(measures::discretize(problem.prior, prior_nodes),
                                   problem.actions, problem.utility);
  bayes::DecisionRule rule = bayes::decision_rule(P, work, q, rule_grid);

  DominanceReport rep{{}, 0.0, 0.0, 0.0, std::nullopt};
  bool all_positive = true;
  for (const auto& a : work.prior.atoms()) {
    bool have = false;
    BestComponent best{0, 0.0, 0.0};
    for (int n = 1; n <= n_max; ++n) {
      BestComponent cand =
          best_uniform_component(a.location, rule, work, c, ApproxGrid(n), P.bound());
      if (!have || cand.value > best.value) {
        best = cand;
        have = true;
      }
    }
    rep.widths[a.location] = best.width;
    rep.value_fixed_rule += a.mass * best.value;
    if (best.width == 0.0) all_positive = false;
  }
  rep.value_original = bayes::gross_benefit_pointwise(P, work, q) -
                       costs::experiment_cost(P, work.prior, c, q);
  rep.value_reoptimized = bayes::net_benefit_for_widths(rep.widths, work, c);
  if (all_positive)
    rep.experiment = experiments::make_uniform_experiment(rep.widths, P.signal(), P.bound());
  return rep;
}

}  // namespace optexp::uniformize
