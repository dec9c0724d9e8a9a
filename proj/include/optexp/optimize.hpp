#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "optexp/bayes.hpp"
#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/rng.hpp"

namespace optexp::optimize {

using bayes::DecisionProblem;
using bayes::DecisionRule;
using bayes::WidthMap;

// Per-draw value of observing state theta through a width-delta uniform under
// a fixed rule: average payoff over the support minus average draw cost.
// delta = 0 is the perfect-observation branch.
inline double w_eval(const DecisionRule& rule, const bayes::Utility& u, double theta,
                     const costs::NoiseCostFunction& c, double delta) {
  if (delta < 0.0) throw ValidationError("w_eval: width must be >= 0");
  if (delta == 0.0) return u.value(theta, rule.action_at(theta)) - c.peak();
  double lo = theta - delta, hi = theta + delta;
  double acc = 0.0, prev = lo;
  for (double b : rule.breakpoints) {
    if (b <= lo) continue;
    if (b >= hi) break;
    acc += (b - prev) * u.value(theta, rule.action_at(0.5 * (prev + b)));
    prev = b;
  }
  acc += (hi - prev) * u.value(theta, rule.action_at(0.5 * (prev + hi)));
  return acc / (2.0 * delta) - c.partial_integral(delta) / delta;
}

// Generalized derivative range [min, max] of the one-sided slopes.
struct ClarkeInterval {
  double lower, upper;
  bool contains_zero(double tol = 0.0) const { return lower <= tol && upper >= -tol; }
};

// Signed one-sided derivatives of the width objective: left is the slope
// approached by shrinking, right by widening.
struct OneSidedSlopes {
  double left, right;
};

// One-sided derivatives of the width objective at delta > 0, exact: widening
// admits signal at the two support edges (one-sided rule limits there), and
// the quotient structure turns those edge payoffs into closed-form slopes.
inline OneSidedSlopes width_slopes(const DecisionRule& rule, const bayes::Utility& u, double theta,
                                   const costs::NoiseCostFunction& c, double delta) {
  if (!(delta > 0.0)) throw ValidationError("width_slopes: width must be positive");
  double W = w_eval(rule, u, theta, c, delta);
  double up_right = u.value(theta, rule.action_right(theta + delta)) +
                    u.value(theta, rule.action_left(theta - delta));
  double up_left = u.value(theta, rule.action_left(theta + delta)) +
                   u.value(theta, rule.action_right(theta - delta));
  double dplus = (0.5 * up_right - c.value(delta) - W) / delta;
  double dminus = (0.5 * up_left - c.value(delta) - W) / delta;
  return {dminus, dplus};
}

inline ClarkeInterval clarke_subdiff(const DecisionRule& rule, const bayes::Utility& u,
                                     double theta, const costs::NoiseCostFunction& c,
                                     double delta) {
  OneSidedSlopes s = width_slopes(rule, u, theta, c, delta);
  return {std::min(s.left, s.right), std::max(s.left, s.right)};
}

// One-sided difference-quotient estimate of the generalized derivative range
// of an arbitrary scalar function at delta.  Steps halve from h0 down to
// 1e-7 with Richardson extrapolation on the tail; quotients that keep
// growing past two orders of magnitude indicate a non-Lipschitz point.
inline ClarkeInterval clarke_interval_numeric(const std::function<double(double)>& W, double delta,
                                              double h0 = 1e-2) {
  if (!(h0 > 1e-7)) throw ValidationError("clarke_interval_numeric: h0 must exceed 1e-7");
  auto one_sided = [&](int sign) {
    double base = W(delta);
    double prev_q = 0.0, prev_rich = 0.0;
    bool have_prev = false;
    double first_mag = 0.0;
    double est = 0.0;
    for (double h = h0; h >= 1e-7; h *= 0.5) {
      double q = sign * (W(delta + sign * h) - base) / h;
      if (!have_prev) {
        first_mag = std::abs(q);
        prev_q = q;
        prev_rich = q;
        have_prev = true;
        est = q;
        continue;
      }
      if (std::abs(q) > 100.0 * (first_mag + 1.0))
        throw NonLipschitzSignal(
            "clarke_interval_numeric: difference quotients diverge; no Lipschitz bound");
      double rich = 2.0 * q - prev_q;  // cancels the O(h) error term
      est = rich;
      if (std::abs(rich - prev_rich) <= 1e-9 * std::max(1.0, std::abs(rich))) return rich;
      prev_q = q;
      prev_rich = rich;
    }
    return est;
  };
  double right = one_sided(+1);
  double left = one_sided(-1);
  return {std::min(left, right), std::max(left, right)};
}

namespace detail {

// Maximize g on [lo, hi] by golden-section, returning the best point found.
inline std::pair<double, double> golden_max(const std::function<double(double)>& g, double lo,
                                            double hi) {
  constexpr double kInv = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInv * (b - a), x2 = a + kInv * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 90 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInv * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInv * (b - a);
      f1 = g(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

// Best uniform width in [0, bound] for one state against a fixed rule.  The
// objective is smooth between rule and cost kinks, so each bracket gets a
// coarse scan plus golden-section refinement; candidates are compared in
// ascending width so ties resolve toward the smaller width.
inline double optimize_width(const DecisionRule& rule, const bayes::Utility& u, double theta,
                             const costs::NoiseCostFunction& c, double bound) {
  if (!(bound > 0.0)) throw ValidationError("optimize_width: bound must be positive");
  std::vector<double> kinks;
  for (double b : rule.breakpoints) {
    double d = std::abs(b - theta);
    if (d > 0.0 && d <= bound) kinks.push_back(d);
  }
  for (double k : c.kinks())
    if (k > 0.0 && k <= bound) kinks.push_back(k);
  kinks.push_back(bound);
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  auto g = [&](double d) { return w_eval(rule, u, theta, c, d); };

  // Candidates: the perfect branch, every kink, and a refined interior
  // maximum per bracket.
  std::vector<std::pair<double, double>> cands;  // (width, value)
  cands.push_back({0.0, g(0.0)});
  double lo = 0.0;
  for (double k : kinks) {
    cands.push_back({k, g(k)});
    double span = k - lo;
    if (span > 1e-12) {
      constexpr int kScan = 33;
      double best_x = lo + span / (kScan + 1), best_v = -std::numeric_limits<double>::infinity();
      for (int i = 1; i <= kScan; ++i) {
        double x = lo + span * i / (kScan + 1);
        double v = g(x);
        if (v > best_v) {
          best_v = v;
          best_x = x;
        }
      }
      double wlo = std::max(lo + 1e-15, best_x - span / (kScan + 1));
      double whi = std::min(k, best_x + span / (kScan + 1));
      auto [rx, rv] = detail::golden_max(g, wlo, whi);
      cands.push_back(rv >= best_v ? std::pair{rx, rv} : std::pair{best_x, best_v});
    }
    lo = k;
  }
  std::sort(cands.begin(), cands.end());
  double best_w = cands.front().first, best_v = cands.front().second;
  for (const auto& [w, v] : cands) {
    if (v > best_v) {
      best_v = v;
      best_w = w;
    }
  }
  return best_w;
}

// First-order condition record for one state's chosen width: Interior widths
// need 0 inside the generalized derivative range, the Boundary case needs no
// gain from shrinking, and Perfect needs no probe width to beat it.  The
// residual is the tolerance the check just barely passes at; satisfied is
// residual <= tol, which for Interior entries is exactly zero-containment in
// the tol-widened derivative range.
struct FocEntry {
  enum class Kind { Interior, Boundary, Perfect };
  double state;
  Kind kind;
  double width;
  ClarkeInterval interval{0.0, 0.0};  // derivative range (Interior and Boundary)
  double residual = 0.0;
  bool satisfied = false;
};

inline std::vector<FocEntry> verify_foc(const WidthMap& widths, const DecisionRule& rule,
                                        const DecisionProblem& problem,
                                        const costs::NoiseCostFunction& c, double bound,
                                        double tol = 1e-5) {
  std::vector<FocEntry> out;
  for (const auto& a : problem.prior.atoms()) {
    double w = widths.at(a.location);
    FocEntry e;
    e.state = a.location;
    e.kind = FocEntry::Kind::Interior;
    e.width = w;
    if (w == 0.0) {
      e.kind = FocEntry::Kind::Perfect;
      double base = w_eval(rule, problem.utility, a.location, c, 0.0);
      double worst = 0.0;
      std::vector<double> probes;
      for (int i = 1; i <= 129; ++i) probes.push_back(bound * i / 129.0);
      for (double b : rule.breakpoints) {
        double d = std::abs(b - a.location);
        if (d > 0.0 && d <= bound) probes.push_back(d);
      }
      for (double p : probes)
        worst = std::max(worst, w_eval(rule, problem.utility, a.location, c, p) - base);
      e.residual = worst;
    } else if (w >= bound) {
      e.kind = FocEntry::Kind::Boundary;
      OneSidedSlopes s = width_slopes(rule, problem.utility, a.location, c, bound);
      e.interval = {std::min(s.left, s.right), std::max(s.left, s.right)};
      e.residual = std::max(0.0, -s.left);  // shrinking must not improve
    } else {
      e.interval = clarke_subdiff(rule, problem.utility, a.location, c, w);
      // Distance from 0 to the derivative range.
      e.residual = std::max({0.0, e.interval.lower, -e.interval.upper});
    }
    e.satisfied = e.residual <= tol;
    out.push_back(e);
  }
  return out;
}

struct SolverOptions {
  double tol = 1e-6;       // convergence threshold on the value change
  double foc_tol = 1e-5;   // residual threshold the caller may hold foc to
  int max_iter = 200;
  int restarts = 8;        // random starts beyond the deterministic one
  std::uint64_t seed = 0;
  int prior_nodes = 33;    // discretization size for continuous priors
};

struct SolverResult {
  WidthMap widths;
  DecisionRule rule = DecisionRule::constant(0.0);
  double benefit = 0.0;
  double cost = 0.0;
  double value = 0.0;
  std::vector<FocEntry> foc;
  int iterations = 0;
  bool converged = false;
  std::vector<double> value_trace;  // value after each full sweep of the best run
};

// Alternating best-response search for the optimal per-state widths: each
// sweep re-optimizes every width against the current rule (a Jacobi update),
// then rebuilds the rule for the new widths.  Both half-steps weakly raise
// the value, so the trace is nondecreasing.  The deterministic half-bound
// start is followed by seeded random restarts; the best run wins, with ties
// going to the earlier run.
inline SolverResult solve(const DecisionProblem& problem, const costs::NoiseCostFunction& c,
                          double bound, const SolverOptions& opt = {}) {
  if (!(bound > 0.0)) throw ValidationError("solve: bound must be positive");
  if (opt.max_iter < 1 || opt.restarts < 0 || !(opt.tol > 0.0))
    throw ValidationError("solve: bad solver options");
  DecisionProblem work =
      problem.prior.is_atomic()
          ? problem
          : DecisionProblem(measures::discretize(problem.prior, opt.prior_nodes), problem.actions,
                            problem.utility);

  auto run_from = [&](WidthMap widths) {
    SolverResult r;
    r.rule = bayes::decision_rule_for_widths(widths, work);
    double prev = -std::numeric_limits<double>::infinity();
    int calm = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
      WidthMap next;
      for (const auto& kv : widths)
        next[kv.first] = optimize_width(r.rule, work.utility, kv.first, c, bound);
      widths = std::move(next);
      r.rule = bayes::decision_rule_for_widths(widths, work);
      double v = bayes::gross_benefit_for_widths(widths, work, r.rule) -
                 bayes::cost_for_widths(widths, work.prior, c);
      r.value_trace.push_back(v);
      r.iterations = it + 1;
      calm = (std::abs(v - prev) < opt.tol) ? calm + 1 : 0;
      prev = v;
      if (calm >= 2) {
        r.converged = true;
        break;
      }
    }
    r.widths = std::move(widths);
    r.value = prev;
    return r;
  };

  std::vector<WidthMap> starts;
  WidthMap half;
  for (const auto& a : work.prior.atoms()) half[a.location] = 0.5 * bound;
  starts.push_back(half);
  detail::Rng rng(opt.seed);
  for (int s = 0; s < opt.restarts; ++s) {
    WidthMap wm;
    for (const auto& a : work.prior.atoms())
      wm[a.location] = bound * (0.02 + 0.96 * rng.next_double());
    starts.push_back(std::move(wm));
  }

  SolverResult best;
  bool have = false;
  for (auto& st : starts) {
    SolverResult r = run_from(std::move(st));
    if (!have || r.value > best.value) {
      best = std::move(r);
      have = true;
    }
  }
  best.benefit = bayes::gross_benefit_for_widths(best.widths, work, best.rule);
  best.cost = bayes::cost_for_widths(best.widths, work.prior, c);
  best.value = best.benefit - best.cost;
  best.foc = verify_foc(best.widths, best.rule, work, c, bound, opt.foc_tol);
  return best;
}

// Convenience overload re-checking a finished result as-is.
inline std::vector<FocEntry> verify_foc(const SolverResult& result, const DecisionProblem& problem,
                                        const costs::NoiseCostFunction& c, double bound,
                                        double tol = 1e-5) {
  return verify_foc(result.widths, result.rule, problem, c, bound, tol);
}

}  // namespace optexp::optimize
