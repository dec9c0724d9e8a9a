#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/experiments.hpp"
#include "optexp/measures.hpp"
#include "optexp/quadrature.hpp"

namespace optexp::bayes {

// Payoff u(theta, a) of taking action a in state theta.
class Utility {
 public:
  static Utility quadratic() {
    Utility u;
    u.fn_ = [](double theta, double a) { return -(a - theta) * (a - theta); };
    return u;
  }

  // Buy (a = 1) or pass (a = 0) on an asset worth theta at the given price.
  static Utility trade(double price) {
    Utility u;
    u.fn_ = [price](double theta, double a) { return a * (theta - price); };
    return u;
  }

  static Utility custom(std::function<double(double, double)> fn) {
    if (!fn) throw ValidationError("Utility: custom payoff must be callable");
    Utility u;
    u.fn_ = std::move(fn);
    return u;
  }

  double value(double theta, double a) const { return fn_(theta, a); }

 private:
  Utility() = default;
  std::function<double(double, double)> fn_;
};

// A prior over states, a finite action set, and a payoff.  Actions are kept
// sorted so argmax ties resolve deterministically toward the smaller action.
struct DecisionProblem {
  measures::MixedDistribution prior;
  std::vector<double> actions;
  Utility utility;

  DecisionProblem(measures::MixedDistribution prior_, std::vector<double> actions_,
                  Utility utility_)
      : prior(std::move(prior_)), actions(std::move(actions_)), utility(std::move(utility_)) {
    if (actions.empty()) throw ValidationError("DecisionProblem: action set must be nonempty");
    std::sort(actions.begin(), actions.end());
    if (std::adjacent_find(actions.begin(), actions.end()) != actions.end())
      throw ValidationError("DecisionProblem: actions must be distinct");
  }
};

// Piecewise-constant map from signals to actions.  interval_actions[i] rules
// the open interval between breakpoints i-1 and i (with the outer two
// extending to -inf and +inf); point_actions pins exact signal values where
// the action differs from the interval fallback.  Lookups at a breakpoint
// without a pin take the interval to its right.
struct DecisionRule {
  std::vector<double> breakpoints;
  std::vector<double> interval_actions;
  std::map<double, double> point_actions;

  DecisionRule(std::vector<double> breakpoints_, std::vector<double> interval_actions_,
               std::map<double, double> point_actions_ = {})
      : breakpoints(std::move(breakpoints_)),
        interval_actions(std::move(interval_actions_)),
        point_actions(std::move(point_actions_)) {
    if (interval_actions.size() != breakpoints.size() + 1)
      throw ValidationError("DecisionRule: need exactly one more interval action than breakpoints");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
      if (!(breakpoints[i] < breakpoints[i + 1]))
        throw ValidationError("DecisionRule: breakpoints must be strictly increasing");
  }

  static DecisionRule constant(double action) { return DecisionRule({}, {action}); }

  double action_at(double s) const {
    auto pin = point_actions.find(s);
    if (pin != point_actions.end()) return pin->second;
    return interval_actions[interval_index(s)];
  }

  // One-sided limits; pins are measure-zero and ignored.
  double action_right(double s) const {
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), s);
    if (it != breakpoints.end() && *it == s)
      return interval_actions[static_cast<std::size_t>(it - breakpoints.begin()) + 1];
    return interval_actions[interval_index(s)];
  }

  double action_left(double s) const {
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), s);
    if (it != breakpoints.end() && *it == s)
      return interval_actions[static_cast<std::size_t>(it - breakpoints.begin())];
    return interval_actions[interval_index(s)];
  }

 private:
  std::size_t interval_index(double s) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
    return static_cast<std::size_t>(it - breakpoints.begin());
  }
};

// Belief over states after observing signal s: reweighted prior atoms plus,
// for mixed priors, a reweighted density evaluated on demand.
class PosteriorAtSignal {
 public:
  const std::vector<measures::Atom>& atoms() const { return atoms_; }
  bool has_density() const { return static_cast<bool>(fdens_); }
  std::pair<double, double> density_support() const { return fdens_->support(); }

  double density_value(double theta) const {
    if (!fdens_) return 0.0;
    return fdens_->value(theta) * likelihood_(theta) / denom_;
  }

  double expectation(const std::function<double(double)>& g,
                     const measures::Quadrature& q = {}) const {
    double total = 0.0;
    for (const auto& a : atoms_) total += a.mass * g(a.location);
    if (fdens_) {
      auto [lo, hi] = fdens_->support();
      total += measures::integrate_segmented(
          [&](double theta) { return density_value(theta) * g(theta); }, lo, hi,
          fdens_->segment_points(), q);
    }
    return total;
  }

  double total_mass(const measures::Quadrature& q = {}) const {
    return expectation([](double) { return 1.0; }, q);
  }

  double mean(const measures::Quadrature& q = {}) const {
    return expectation([](double theta) { return theta; }, q);
  }

 private:
  friend PosteriorAtSignal posterior(const experiments::Experiment&,
                                     const measures::MixedDistribution&, double,
                                     const measures::Quadrature&);
  std::vector<measures::Atom> atoms_;
  std::optional<measures::PriorDensity> fdens_;
  std::function<double(double)> likelihood_;
  double denom_ = 1.0;
};

namespace detail {

// Density of the signal at s conditional on the state: the noise density at
// the inverting draw times the inverse map's slope in s.  The slope is exact
// for additive signals and a central difference otherwise.
inline double signal_likelihood(const experiments::Experiment& P, double theta, double s) {
  const auto& sig = P.signal();
  double x = sig.invert(theta, s);
  experiments::NoiseDistribution noise = P.noise_for(theta);
  if (std::abs(x) > noise.support_halfwidth()) return 0.0;
  double jac = 1.0;
  if (!sig.is_additive()) {
    double h = 1e-6 * std::max(1.0, std::abs(s));
    jac = std::abs(sig.invert(theta, s + h) - sig.invert(theta, s - h)) / (2.0 * h);
  }
  return noise.density(x) * jac;
}

}  // namespace detail

// Prior-weighted density of observing signal s.
inline double signal_marginal(const experiments::Experiment& P,
                              const measures::MixedDistribution& F, double s,
                              const measures::Quadrature& q = {}) {
  double m = 0.0;
  for (const auto& a : F.atoms()) m += a.mass * detail::signal_likelihood(P, a.location, s);
  if (F.density()) {
    auto [lo, hi] = F.density()->support();
    m += measures::integrate_segmented(
        [&](double theta) {
          return F.density()->value(theta) * detail::signal_likelihood(P, theta, s);
        },
        lo, hi, F.density()->segment_points(), q);
  }
  return m;
}

// Posterior over states given signal s.  When every atom produces the same
// likelihood and there is no continuous part, the prior is returned verbatim:
// equal likelihoods cancel, so invariance holds exactly rather than to
// rounding.
inline PosteriorAtSignal posterior(const experiments::Experiment& P,
                                   const measures::MixedDistribution& F, double s,
                                   const measures::Quadrature& q = {}) {
  PosteriorAtSignal post;
  std::vector<double> lik(F.atoms().size());
  double atom_total = 0.0;
  bool all_equal = !F.atoms().empty();
  for (std::size_t i = 0; i < F.atoms().size(); ++i) {
    lik[i] = detail::signal_likelihood(P, F.atoms()[i].location, s);
    atom_total += F.atoms()[i].mass * lik[i];
    if (lik[i] != lik[0]) all_equal = false;
  }
  double cont_total = 0.0;
  if (F.density()) {
    auto [lo, hi] = F.density()->support();
    cont_total = measures::integrate_segmented(
        [&](double theta) {
          return F.density()->value(theta) * detail::signal_likelihood(P, theta, s);
        },
        lo, hi, F.density()->segment_points(), q);
  }
  double denom = atom_total + cont_total;
  if (!(denom > 0.0))
    throw ZeroMarginal("posterior: signal has zero marginal density under the prior");
  if (all_equal && !F.density() && lik[0] > 0.0) {
    post.atoms_ = F.atoms();
    return post;
  }
  for (std::size_t i = 0; i < F.atoms().size(); ++i)
    post.atoms_.push_back({F.atoms()[i].location, F.atoms()[i].mass * lik[i] / denom});
  if (F.density()) {
    post.fdens_ = *F.density();
    post.likelihood_ = [P, s](double theta) { return detail::signal_likelihood(P, theta, s); };
    post.denom_ = denom;
  }
  return post;
}

// Action maximizing posterior-expected payoff; ties go to the smaller action.
inline double optimal_decision(const DecisionProblem& problem, const PosteriorAtSignal& post,
                               const measures::Quadrature& q = {}) {
  double best_a = problem.actions.front();
  double best_v = -std::numeric_limits<double>::infinity();
  for (double a : problem.actions) {
    double v = post.expectation([&](double theta) { return problem.utility.value(theta, a); }, q);
    if (v > best_v) {
      best_v = v;
      best_a = a;
    }
  }
  return best_a;
}

// Per-state uniform halfwidth; 0 means the state is observed perfectly.
using WidthMap = std::map<double, double>;

namespace detail {

inline std::vector<measures::Atom> atoms_for_widths(const WidthMap& widths,
                                                    const measures::MixedDistribution& prior) {
  if (!prior.is_atomic())
    throw ValidationError("width-based evaluation requires an atomic prior");
  if (widths.size() != prior.atoms().size())
    throw ValidationError("width map must assign exactly the prior's states");
  for (const auto& a : prior.atoms()) {
    auto it = widths.find(a.location);
    if (it == widths.end())
      throw UnassignedState("width map is missing a prior state");
    if (it->second < 0.0) throw ValidationError("widths must be >= 0");
  }
  return prior.atoms();
}

struct RulePiece {
  double lo, hi;     // open interval (lo, hi)
  double action;     // action on the interval
  double point_action;  // action at the point hi itself (ignored for the last piece)
  bool reachable;
};

inline double argmax_action(const DecisionProblem& problem,
                            const std::vector<std::pair<double, double>>& state_weights) {
  double best_a = problem.actions.front();
  double best_v = -std::numeric_limits<double>::infinity();
  for (double a : problem.actions) {
    double v = 0.0;
    for (const auto& [theta, w] : state_weights) v += w * problem.utility.value(theta, a);
    if (v > best_v) {
      best_v = v;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace detail

// Exact decision rule for an additive-signal experiment whose per-state noise
// is uniform (width > 0) or perfect (width 0), under an atomic prior.
// Support edges are treated as part of the support, a perfect state claims
// its own signal exactly, and unreachable stretches between supports are
// split at their midpoint between the neighboring actions (the midpoint
// itself going left).
inline DecisionRule decision_rule_for_widths(const WidthMap& widths,
                                             const DecisionProblem& problem) {
  auto atoms = detail::atoms_for_widths(widths, problem.prior);

  struct StateInfo {
    double theta, mass, lo, hi;
    bool perfect;
  };
  std::vector<StateInfo> states;
  for (const auto& a : atoms) {
    double w = widths.at(a.location);
    states.push_back({a.location, a.mass, a.location - w, a.location + w, w == 0.0});
  }

  // Candidate partition points: every support edge and every perfect state.
  std::vector<double> cand;
  for (const auto& st : states) {
    cand.push_back(st.lo);
    if (!st.perfect) cand.push_back(st.hi);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto point_action = [&](double s) {
    for (const auto& st : states)
      if (st.perfect && st.theta == s)
        return detail::argmax_action(problem, {{st.theta, 1.0}});
    std::vector<std::pair<double, double>> weights;
    for (const auto& st : states)
      if (!st.perfect && st.lo <= s && s <= st.hi)
        weights.push_back({st.theta, st.mass / (st.hi - st.lo)});
    if (weights.empty()) return std::numeric_limits<double>::quiet_NaN();
    return detail::argmax_action(problem, weights);
  };

  auto interval_action = [&](double a, double b) {
    double mid = 0.5 * (a + b);
    std::vector<std::pair<double, double>> weights;
    for (const auto& st : states)
      if (!st.perfect && st.lo <= mid && mid <= st.hi)
        weights.push_back({st.theta, st.mass / (st.hi - st.lo)});
    if (weights.empty()) return std::numeric_limits<double>::quiet_NaN();
    return detail::argmax_action(problem, weights);
  };

  // Build the alternating piece list over the candidate partition, patching
  // unreachable stretches by the midpoint-split convention.
  std::vector<detail::RulePiece> pieces;
  {
    std::vector<double> pts;  // partition points in order
    std::vector<double> pt_act, iv_act;  // actions at points / on intervals between
    for (double c : cand) pts.push_back(c);
    pt_act.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pt_act[i] = point_action(pts[i]);
    iv_act.resize(pts.size() + 1);
    iv_act.front() = std::numeric_limits<double>::quiet_NaN();  // (-inf, first)
    iv_act.back() = std::numeric_limits<double>::quiet_NaN();   // (last, +inf)
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      iv_act[i + 1] = interval_action(pts[i], pts[i + 1]);

    // Resolve unreachable stretches.  Candidate points are support edges or
    // perfect states, so every point is reachable; only intervals can be
    // gaps.  The outermost stretches extend the nearest point action, and
    // interior gaps split at the midpoint of their span.
    std::size_t n = pts.size();
    iv_act.front() = pt_act.front();
    iv_act.back() = pt_act.back();
    std::vector<std::pair<double, double>> extra;  // gap midpoint, action to its right
    for (std::size_t i = 1; i + 1 < iv_act.size(); ++i) {
      if (!std::isnan(iv_act[i])) continue;
      double mid = 0.5 * (pts[i - 1] + pts[i]);
      iv_act[i] = pt_act[i - 1];  // left half of the gap; corrected past mid below
      extra.push_back({mid, pt_act[i]});
    }

    // Assemble: piece k covers interval (prev, pts[k]) with action iv_act[k]
    // and carries the point action at pts[k]; gap midpoints are spliced in.
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      // Splice any midpoint lying in (prev, pts[i]).
      for (const auto& [mid, right_a] : extra) {
        if (mid > prev && mid < pts[i]) {
          pieces.push_back({prev, mid, iv_act[i], iv_act[i], true});
          prev = mid;
          iv_act[i] = right_a;
        }
      }
      pieces.push_back({prev, pts[i], iv_act[i], pt_act[i], true});
      prev = pts[i];
    }
    pieces.push_back({prev, std::numeric_limits<double>::infinity(), iv_act[n], 0.0, true});
  }

  // Compress: keep a breakpoint only where the interval action changes or the
  // point action disagrees with its right interval.
  std::vector<double> bps, ivs;
  std::map<double, double> pins;
  ivs.push_back(pieces.front().action);
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    double b = pieces[i].hi;
    double pa = pieces[i].point_action;
    double right = pieces[i + 1].action;
    if (pieces[i].action == right && pa == right) continue;
    bps.push_back(b);
    ivs.push_back(right);
    if (pa != right) pins[b] = pa;
  }
  return DecisionRule(std::move(bps), std::move(ivs), std::move(pins));
}

// Expected payoff of following the rule, exact: per-state signal mass is read
// off the noise half-mass function segment by segment.
inline double gross_benefit_for_widths(const WidthMap& widths, const DecisionProblem& problem,
                                       const DecisionRule& rule) {
  auto atoms = detail::atoms_for_widths(widths, problem.prior);
  double total = 0.0;
  for (const auto& a : atoms) {
    double w = widths.at(a.location);
    if (w == 0.0) {
      total += a.mass * problem.utility.value(a.location, rule.action_at(a.location));
      continue;
    }
    double lo = a.location - w, hi = a.location + w;
    // Clip rule pieces against the support; constant density 1/(2w).
    double acc = 0.0;
    double prev = lo;
    for (double b : rule.breakpoints) {
      if (b <= lo) continue;
      if (b >= hi) break;
      acc += (b - prev) * problem.utility.value(a.location, rule.action_at(0.5 * (prev + b)));
      prev = b;
    }
    acc += (hi - prev) * problem.utility.value(a.location, rule.action_at(0.5 * (prev + hi)));
    total += a.mass * acc / (2.0 * w);
  }
  return total;
}

// Expected draw cost: a width-w uniform costs the mean of c over [-w, w] and
// a perfect observation costs the peak c(0).
inline double cost_for_widths(const WidthMap& widths, const measures::MixedDistribution& prior,
                              const costs::NoiseCostFunction& c) {
  auto atoms = detail::atoms_for_widths(widths, prior);
  double total = 0.0;
  for (const auto& a : atoms) {
    double w = widths.at(a.location);
    total += a.mass * (w == 0.0 ? c.peak() : c.partial_integral(w) / w);
  }
  return total;
}

inline double net_benefit_for_widths(const WidthMap& widths, const DecisionProblem& problem,
                                     const costs::NoiseCostFunction& c) {
  DecisionRule rule = decision_rule_for_widths(widths, problem);
  return gross_benefit_for_widths(widths, problem, rule) -
         cost_for_widths(widths, problem.prior, c);
}

// Decision rule for a general experiment.  Uniform noise under an atomic
// prior with additive signal takes the exact path; anything else samples the
// reachable signal range and compresses the sampled actions, splitting
// unreachable runs at their midpoint.
inline DecisionRule decision_rule(const experiments::Experiment& P, const DecisionProblem& problem,
                                  const measures::Quadrature& q = {}, int grid_points = 4097) {
  if (P.signal().is_additive() && problem.prior.is_atomic() && P.all_uniform() &&
      !P.has_default_rule()) {
    WidthMap widths;
    for (const auto& [state, dist] : P.assignment()) widths[state] = dist.uniform_width();
    if (widths.size() == problem.prior.atoms().size()) {
      bool match = true;
      for (const auto& a : problem.prior.atoms())
        if (!widths.count(a.location)) match = false;
      if (match) return decision_rule_for_widths(widths, problem);
    }
  }

  if (grid_points < 3) throw ValidationError("decision_rule: grid needs at least 3 points");
  // Reachable signal range across prior states.
  double s_lo = std::numeric_limits<double>::infinity();
  double s_hi = -std::numeric_limits<double>::infinity();
  auto widen = [&](double theta) {
    experiments::NoiseDistribution d = P.noise_for(theta);
    double w = d.support_halfwidth();
    s_lo = std::min(s_lo, P.signal().apply(theta, -w));
    s_hi = std::max(s_hi, P.signal().apply(theta, w));
  };
  for (const auto& a : problem.prior.atoms()) widen(a.location);
  if (problem.prior.density()) {
    auto [lo, hi] = problem.prior.density()->support();
    for (int i = 0; i <= 32; ++i) widen(lo + (hi - lo) * i / 32.0);
  }
  if (!(s_lo < s_hi)) throw ValidationError("decision_rule: degenerate signal range");

  std::vector<double> svals(grid_points), acts(grid_points);
  std::vector<bool> reach(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    double s = s_lo + (s_hi - s_lo) * i / (grid_points - 1);
    svals[i] = s;
    if (signal_marginal(P, problem.prior, s, q) > 0.0) {
      acts[i] = optimal_decision(problem, posterior(P, problem.prior, s, q), q);
      reach[i] = true;
    } else {
      reach[i] = false;
    }
  }
  // Fill unreachable runs: nearest reachable action, ties split at midpoint.
  for (int i = 0; i < grid_points; ++i) {
    if (reach[i]) continue;
    int l = i - 1;
    int r = i;
    while (r < grid_points && !reach[r]) ++r;
    for (int j = i; j < r; ++j) {
      bool take_left;
      if (l < 0)
        take_left = false;
      else if (r >= grid_points)
        take_left = true;
      else
        take_left = (svals[j] - svals[l] <= svals[r] - svals[j]);
      acts[j] = take_left ? acts[l] : acts[r];
    }
    i = r;
  }
  // Compress runs; the breakpoint lands midway between differing samples.
  std::vector<double> bps, ivs;
  ivs.push_back(acts[0]);
  for (int i = 1; i < grid_points; ++i) {
    if (acts[i] != acts[i - 1]) {
      bps.push_back(0.5 * (svals[i - 1] + svals[i]));
      ivs.push_back(acts[i]);
    }
  }
  return DecisionRule(std::move(bps), std::move(ivs));
}

// Expected payoff of following an explicit rule under the experiment, exact:
// per-state the rule is piecewise constant in the draw, so each segment
// contributes its action's payoff times the segment's noise mass.
inline double gross_benefit(const experiments::Experiment& P, const DecisionProblem& problem,
                            const DecisionRule& rule, int prior_nodes = 33) {
  measures::MixedDistribution F =
      problem.prior.is_atomic() ? problem.prior : measures::discretize(problem.prior, prior_nodes);
  double total = 0.0;
  for (const auto& a : F.atoms()) {
    experiments::NoiseDistribution d = P.noise_for(a.location);
    double L = d.support_halfwidth();
    auto signed_mass = [&](double t) { return t >= 0.0 ? d.half_mass(t) : -d.half_mass(-t); };
    // Cuts in draw space: rule breakpoints pulled back through the signal.
    std::vector<double> cuts;
    cuts.push_back(-L);
    for (double b : rule.breakpoints) {
      double x = P.signal().invert(a.location, b);
      if (x > -L && x < L) cuts.push_back(x);
    }
    cuts.push_back(L);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      double m = signed_mass(cuts[i + 1]) - signed_mass(cuts[i]);
      double s_mid = P.signal().apply(a.location, 0.5 * (cuts[i] + cuts[i + 1]));
      acc += m * problem.utility.value(a.location, rule.action_at(s_mid));
    }
    total += a.mass * acc;
  }
  return total;
}

// Expected payoff under pointwise-optimal behavior: at every draw the action
// is recomputed from the posterior, which is measure-correct for any signal
// map and noise kind.
inline double gross_benefit_pointwise(const experiments::Experiment& P,
                                      const DecisionProblem& problem,
                                      const measures::Quadrature& q = {}, int prior_nodes = 33) {
  measures::MixedDistribution F =
      problem.prior.is_atomic() ? problem.prior : measures::discretize(problem.prior, prior_nodes);
  double total = 0.0;
  for (const auto& a : F.atoms()) {
    experiments::NoiseDistribution d = P.noise_for(a.location);
    double L = d.support_halfwidth();
    std::vector<double> cuts;
    for (double b : d.breakpoints()) {
      if (b < L) {
        cuts.push_back(b);
        cuts.push_back(-b);
      }
    }
    auto f = [&](double x) {
      double px = d.density(x);
      if (px <= 0.0) return 0.0;
      double s = P.signal().apply(a.location, x);
      double act = optimal_decision(problem, posterior(P, F, s, q), q);
      return px * problem.utility.value(a.location, act);
    };
    total += a.mass * measures::integrate_segmented(f, -L, L, cuts, q);
  }
  return total;
}

// Gross benefit, cost, and their difference for one experiment.
struct ValueBreakdown {
  double benefit;
  double cost;
  double value;
};

// Value of the experiment: pointwise-optimal payoff net of the draw cost.
inline ValueBreakdown net_benefit(const experiments::Experiment& P, const DecisionProblem& problem,
                                  const costs::NoiseCostFunction& c,
                                  const measures::Quadrature& q = {}, int prior_nodes = 33) {
  measures::MixedDistribution F =
      problem.prior.is_atomic() ? problem.prior : measures::discretize(problem.prior, prior_nodes);
  DecisionProblem discrete(F, problem.actions, problem.utility);
  double b = gross_benefit_pointwise(P, discrete, q, prior_nodes);
  double cst = costs::experiment_cost(P, F, c, q);
  return {b, cst, b - cst};
}

}  // namespace optexp::bayes
