#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "optexp/bayes.hpp"
#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/optimize.hpp"

// Worked demonstrations with closed-form references, exposed both to tests
// and to the command-line tool.
namespace optexp::scenario {

// Note printed with the vague-signal table: the cost infimum is approached
// by ever-vaguer draws on the likely state, but the limiting object assigns
// a point mass at zero noise and no admissible experiment attains it.
inline constexpr const char* kNonexistenceNote = "limit demo: not an admissible experiment";

// One step of the vague-signal sequence: the likely state keeps a precise
// draw of width precise_width while the other state's draw widens to
// vague_width.  posterior_finite is the belief in the likely state after a
// signal both supports cover; posterior_limit is its value as the vague
// width grows without bound.
struct NonexistenceRow {
  double precise_width;
  double vague_width;
  double cost;
  double posterior_finite;
  double posterior_limit;
};

// Belief in the precisely-observed state (prior mass p) at a signal covered
// by both supports, when the other state's draw has width vague_width.
inline double nonexistence_posterior(double p, double precise_width, double vague_width) {
  return p * vague_width / (p * vague_width + (1.0 - p) * precise_width);
}

// Sequence of experiments whose cost drains away while the posterior stays
// pinned near certainty: the precise width runs through widths, the vague
// width is held at ten times the largest entry.  Cost falls strictly in the
// precise width because the average cost of a centered uniform falls in its
// width.
inline std::vector<NonexistenceRow> nonexistence_sequence(double p,
                                                          const std::vector<double>& widths,
                                                          const costs::NoiseCostFunction& c) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("nonexistence_sequence: prior mass must lie in (0, 1)");
  if (widths.empty()) throw ValidationError("nonexistence_sequence: widths must be nonempty");
  for (double d : widths)
    if (!(d > 0.0)) throw ValidationError("nonexistence_sequence: widths must be positive");
  double vague = 10.0 * *std::max_element(widths.begin(), widths.end());
  std::vector<NonexistenceRow> rows;
  for (double d : widths) {
    NonexistenceRow r;
    r.precise_width = d;
    r.vague_width = vague;
    r.cost = p * c.partial_integral(d) / d + (1.0 - p) * c.partial_integral(vague) / vague;
    r.posterior_finite = nonexistence_posterior(p, d, vague);
    r.posterior_limit = 1.0;
    rows.push_back(r);
  }
  return rows;
}

// Numeric generalized-derivative estimates for W(d) = 1 / (|d| + a) against
// the closed form: a kink at 0 with range [-1/a^2, 1/a^2], smooth slopes
// -1/(d+a)^2 to the right of it and 1/(a-d)^2 to the left.
struct ClarkeDemoRow {
  double scale;  // the parameter a
  double at;     // evaluation point
  optimize::ClarkeInterval numeric;
  optimize::ClarkeInterval exact;
  double error;  // max endpoint deviation
};

inline optimize::ClarkeInterval clarke_demo_exact(double a, double at) {
  if (at == 0.0) return {-1.0 / (a * a), 1.0 / (a * a)};
  double s = at > 0.0 ? -1.0 / ((at + a) * (at + a)) : 1.0 / ((a - at) * (a - at));
  return {s, s};
}

inline std::vector<ClarkeDemoRow> clarke_demo_table(const std::vector<double>& scales,
                                                    const std::vector<double>& points) {
  std::vector<ClarkeDemoRow> rows;
  for (double a : scales) {
    if (!(a > 0.0)) throw ValidationError("clarke_demo_table: scale must be positive");
    auto W = [a](double d) { return 1.0 / (std::abs(d) + a); };
    for (double at : points) {
      ClarkeDemoRow r;
      r.scale = a;
      r.at = at;
      r.numeric = optimize::clarke_interval_numeric(W, at);
      r.exact = clarke_demo_exact(a, at);
      r.error = std::max(std::abs(r.numeric.lower - r.exact.lower),
                         std::abs(r.numeric.upper - r.exact.upper));
      rows.push_back(r);
    }
  }
  return rows;
}

// Note printed with the purchase demo: the payoff is a stylized placeholder
// (buy pays quality minus price, pass pays zero), not a calibrated model.
inline constexpr const char* kTradeDemoNote =
    "stylized payoff: buying pays quality minus price, passing pays zero";

// A binary purchase decision over two quality states: solve for the optimal
// inspection widths and report the quality threshold where the rule switches
// from passing to buying, when one exists.
struct TradeDemo {
  double price;
  double quality_low;
  double quality_high;
  double prob_high;
  double bound;
  optimize::SolverResult result;
  std::optional<double> threshold;  // signal level where the rule turns to buy
};

inline TradeDemo trade_demo(double price, double quality_low, double quality_high, double prob_high,
                            const costs::NoiseCostFunction& c, double bound,
                            const optimize::SolverOptions& opt = {}) {
  if (!(quality_low < quality_high))
    throw ValidationError("trade_demo: qualities must be distinct and ordered");
  if (!(prob_high > 0.0 && prob_high < 1.0))
    throw ValidationError("trade_demo: prob_high must lie in (0, 1)");
  measures::MixedDistribution prior(
      {{quality_low, 1.0 - prob_high}, {quality_high, prob_high}});
  bayes::DecisionProblem problem(prior, {0.0, 1.0}, bayes::Utility::trade(price));
  TradeDemo demo;
  demo.price = price;
  demo.quality_low = quality_low;
  demo.quality_high = quality_high;
  demo.prob_high = prob_high;
  demo.bound = bound;
  demo.result = optimize::solve(problem, c, bound, opt);
  const bayes::DecisionRule& rule = demo.result.rule;
  for (double b : rule.breakpoints) {
    if (rule.action_left(b) == 0.0 && rule.action_right(b) == 1.0) {
      demo.threshold = b;
      break;
    }
  }
  return demo;
}

}  // namespace optexp::scenario
