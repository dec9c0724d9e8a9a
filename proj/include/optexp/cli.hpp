#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "optexp/axioms.hpp"
#include "optexp/bayes.hpp"
#include "optexp/costs.hpp"
#include "optexp/errors.hpp"
#include "optexp/optimize.hpp"
#include "optexp/scenario.hpp"
#include "optexp/scenario_file.hpp"
#include "optexp/uniformize.hpp"

// Subcommand dispatch and result-document emission.  Every number printed in
// a table goes through the same 12-significant-digit format, and a run's
// document is a pure function of scenario + seed + flags, so repeated runs
// are byte-identical.
namespace optexp::cli {

struct RunOptions {
  std::string subcommand;
  std::string scenario_path;  // empty = no scenario file given
  std::string out_path;       // empty = stdout only
  bool strict = false;
  int threads = 1;  // accepted and validated; execution is single-threaded
  std::optional<std::uint64_t> seed;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline const char* kind_name(optimize::FocEntry::Kind k) {
  switch (k) {
    case optimize::FocEntry::Kind::Interior: return "interior";
    case optimize::FocEntry::Kind::Boundary: return "boundary";
    default: return "perfect";
  }
}

inline void write_scenario_section(std::ostream& doc, const std::string& echo) {
  doc << "## scenario\n" << (echo.empty() ? "(defaults; no scenario file)" : echo) << "\n\n";
}

inline void write_widths_section(std::ostream& doc, const bayes::WidthMap& widths, double bound) {
  doc << "## widths\nstate  width  regime\n";
  for (const auto& [state, w] : widths) {
    const char* regime = w == 0.0 ? "perfect" : (w >= bound ? "boundary" : "interior");
    doc << fmt(state) << "  " << fmt(w) << "  " << regime << "\n";
  }
  doc << "\n";
}

inline void write_rule_section(std::ostream& doc, const bayes::DecisionRule& rule) {
  doc << "## rule\ninterval_from  interval_to  action\n";
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rule.interval_actions.size(); ++i) {
    double hi = i < rule.breakpoints.size() ? rule.breakpoints[i]
                                            : std::numeric_limits<double>::infinity();
    doc << fmt(lo) << "  " << fmt(hi) << "  " << fmt(rule.interval_actions[i]) << "\n";
    lo = hi;
  }
  if (!rule.point_actions.empty()) {
    doc << "pinned_signal  action\n";
    for (const auto& [s, a] : rule.point_actions) doc << fmt(s) << "  " << fmt(a) << "\n";
  }
  doc << "\n";
}

inline void write_value_section(std::ostream& doc, double benefit, double cost, double value) {
  doc << "## value\nbenefit  " << fmt(benefit) << "\ncost  " << fmt(cost) << "\nvalue  "
      << fmt(value) << "\n\n";
}

inline void write_foc_section(std::ostream& doc, const std::vector<optimize::FocEntry>& foc) {
  doc << "## foc\nstate  width  kind  interval_lo  interval_hi  residual  satisfied\n";
  for (const auto& e : foc) {
    doc << fmt(e.state) << "  " << fmt(e.width) << "  " << kind_name(e.kind) << "  ";
    if (e.kind == optimize::FocEntry::Kind::Perfect)
      doc << "-  -  ";
    else
      doc << fmt(e.interval.lower) << "  " << fmt(e.interval.upper) << "  ";
    doc << fmt(e.residual) << "  " << (e.satisfied ? "yes" : "no") << "\n";
  }
  doc << "\n";
}

// Flat (state, width, objective) samples for external plotting: 65 widths
// per state from 0 to the bound, evaluated against the given rule.
inline std::string samples_csv(const measures::MixedDistribution& prior,
                               const bayes::DecisionRule& rule, const bayes::Utility& u,
                               const costs::NoiseCostFunction& c, double bound) {
  std::ostringstream csv;
  csv << "theta,delta,W\n";
  for (const auto& a : prior.atoms()) {
    for (int i = 0; i <= 64; ++i) {
      double d = bound * i / 64.0;
      csv << fmt(a.location) << "," << fmt(d) << ","
          << fmt(optimize::w_eval(rule, u, a.location, c, d)) << "\n";
    }
  }
  return csv.str();
}

inline void write_samples_section(std::ostream& doc, const std::string& csv) {
  doc << "## samples\n" << csv << "\n";
}

inline void write_outputs(const RunOptions& opt, const std::string& document,
                          const std::string& csv) {
  *opt.out << document;
  if (!opt.out_path.empty()) {
    std::ofstream f(opt.out_path);
    if (!f) throw ValidationError("cannot write output file " + opt.out_path);
    f << document;
    std::string stem = opt.out_path;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json")
      stem = stem.substr(0, stem.size() - 5);
    std::ofstream fc(stem + ".csv");
    if (!fc) throw ValidationError("cannot write output file " + stem + ".csv");
    fc << csv;
  }
}

inline scenario_file::ScenarioFile load_required(const RunOptions& opt) {
  if (opt.scenario_path.empty())
    throw ValidationError("subcommand " + opt.subcommand + " requires a scenario file");
  scenario_file::ScenarioFile s = scenario_file::parse_scenario(opt.scenario_path);
  if (opt.seed) {
    s.solver.seed = *opt.seed;
    nlohmann::json j = nlohmann::json::parse(s.echo);
    j["solver"]["seed"] = s.solver.seed;
    s.echo = j.dump(2);
  }
  return s;
}

inline int finish_with_foc(const RunOptions& opt, const std::vector<optimize::FocEntry>& foc) {
  if (!opt.strict) return 0;
  for (const auto& e : foc)
    if (!e.satisfied) {
      *opt.err << "error: first-order condition unsatisfied at state " << fmt(e.state)
               << " (residual " << fmt(e.residual) << ")\n";
      return 4;
    }
  return 0;
}

inline int run_solve(const RunOptions& opt, bool foc_focus) {
  scenario_file::ScenarioFile s = load_required(opt);
  bayes::DecisionProblem problem = s.problem();
  optimize::SolverResult r = optimize::solve(problem, s.cost, s.bound, s.solver);
  std::vector<optimize::FocEntry> foc =
      foc_focus ? optimize::verify_foc(r, problem, s.cost, s.bound, s.solver.foc_tol) : r.foc;

  std::ostringstream doc;
  doc << "# optexp result: " << opt.subcommand << "\n\n";
  write_scenario_section(doc, s.echo);
  doc << "## solver\nseed  " << s.solver.seed << "\niterations  " << r.iterations
      << "\nconverged  " << (r.converged ? "yes" : "no") << "\n\n";
  write_widths_section(doc, r.widths, s.bound);
  write_rule_section(doc, r.rule);
  write_value_section(doc, r.benefit, r.cost, r.value);
  write_foc_section(doc, foc);
  std::string csv = samples_csv(problem.prior.is_atomic()
                                    ? problem.prior
                                    : measures::discretize(problem.prior, s.solver.prior_nodes),
                                r.rule, problem.utility, s.cost, s.bound);
  write_samples_section(doc, csv);
  write_outputs(opt, doc.str(), csv);
  if (!r.converged) {
    *opt.err << "error: width search did not converge within " << s.solver.max_iter
             << " sweeps\n";
    return 3;
  }
  return finish_with_foc(opt, foc);
}

inline int run_cost(const RunOptions& opt) {
  scenario_file::ScenarioFile s = load_required(opt);
  if (!s.experiment)
    throw ValidationError("cost subcommand requires an experiment section in the scenario");
  bayes::DecisionProblem problem = s.problem();
  const experiments::Experiment& P = *s.experiment;
  bayes::DecisionRule rule = bayes::decision_rule(P, problem, s.quadrature);
  bayes::ValueBreakdown v = bayes::net_benefit(P, problem, s.cost, s.quadrature);

  std::ostringstream doc;
  doc << "# optexp result: cost\n\n";
  write_scenario_section(doc, s.echo);
  doc << "## noise\nstate  support_halfwidth  draw_cost\n";
  for (const auto& a : problem.prior.atoms()) {
    const experiments::NoiseDistribution& n = P.noise_for(a.location);
    doc << fmt(a.location) << "  " << fmt(n.support_halfwidth()) << "  "
        << fmt(costs::noise_cost(n, s.cost, s.quadrature)) << "\n";
  }
  doc << "\n";
  write_rule_section(doc, rule);
  write_value_section(doc, v.benefit, v.cost, v.value);
  std::string csv = samples_csv(problem.prior, rule, problem.utility, s.cost, s.bound);
  write_samples_section(doc, csv);
  write_outputs(opt, doc.str(), csv);
  return 0;
}

inline int run_dominance(const RunOptions& opt) {
  scenario_file::ScenarioFile s = load_required(opt);
  if (!s.experiment)
    throw ValidationError(
        "dominance-check subcommand requires an experiment section in the scenario");
  bayes::DecisionProblem problem = s.problem();
  constexpr int kLevels = 4;
  uniformize::DominanceReport rep =
      uniformize::dominating_uniform_experiment(*s.experiment, problem, s.cost, kLevels,
                                                s.quadrature);

  std::ostringstream doc;
  doc << "# optexp result: dominance-check\n\n";
  write_scenario_section(doc, s.echo);
  doc << "## replacement\nstate  uniform_width\n";
  for (const auto& [state, w] : rep.widths) doc << fmt(state) << "  " << fmt(w) << "\n";
  doc << "\n## dominance\nvalue_original  " << fmt(rep.value_original)
      << "\nvalue_fixed_rule  " << fmt(rep.value_fixed_rule) << "\nvalue_reoptimized  "
      << fmt(rep.value_reoptimized) << "\nmargin_fixed_rule  "
      << fmt(rep.value_fixed_rule - rep.value_original) << "\nmargin_reoptimized  "
      << fmt(rep.value_reoptimized - rep.value_original) << "\nexperiment_built  "
      << (rep.experiment ? "yes" : "no (a perfect width was chosen)") << "\n\n";
  bayes::DecisionRule rule = bayes::decision_rule(*s.experiment, problem, s.quadrature);
  std::string csv = samples_csv(problem.prior, rule, problem.utility, s.cost, s.bound);
  write_samples_section(doc, csv);
  write_outputs(opt, doc.str(), csv);
  return 0;
}

inline int run_nonexistence(const RunOptions& opt) {
  scenario_file::NonexistencePlan plan;
  costs::NoiseCostFunction c = costs::NoiseCostFunction::exp_decay(1.0, 1.0);
  std::string echo;
  if (!opt.scenario_path.empty()) {
    scenario_file::ScenarioFile s = scenario_file::parse_scenario(opt.scenario_path);
    plan = s.nonexistence;
    c = s.cost;
    echo = s.echo;
  }
  std::vector<scenario::NonexistenceRow> rows = scenario::nonexistence_sequence(plan.p, plan.widths, c);

  std::ostringstream doc;
  doc << "# optexp result: example-nonexistence\n\n";
  write_scenario_section(doc, echo);
  doc << "## nonexistence\nnote: " << scenario::kNonexistenceNote << "\n"
      << "precise_width  vague_width  cost  posterior_finite  posterior_limit\n";
  std::ostringstream csv;
  csv << "precise_width,vague_width,cost,posterior_finite,posterior_limit\n";
  for (const auto& r : rows) {
    doc << fmt(r.precise_width) << "  " << fmt(r.vague_width) << "  " << fmt(r.cost) << "  "
        << fmt(r.posterior_finite) << "  " << fmt(r.posterior_limit) << "\n";
    csv << fmt(r.precise_width) << "," << fmt(r.vague_width) << "," << fmt(r.cost) << ","
        << fmt(r.posterior_finite) << "," << fmt(r.posterior_limit) << "\n";
  }
  doc << "\n";
  write_outputs(opt, doc.str(), csv.str());
  return 0;
}

inline int run_clarke(const RunOptions& opt) {
  scenario_file::ClarkePlan plan;
  std::string echo;
  if (!opt.scenario_path.empty()) {
    scenario_file::ScenarioFile s = scenario_file::parse_scenario(opt.scenario_path);
    plan = s.clarke;
    echo = s.echo;
  }
  std::vector<scenario::ClarkeDemoRow> rows = scenario::clarke_demo_table(plan.scales, plan.points);

  std::ostringstream doc;
  doc << "# optexp result: clarke-demo\n\n";
  write_scenario_section(doc, echo);
  doc << "## clarke\nscale  at  numeric_lo  numeric_hi  exact_lo  exact_hi  error\n";
  std::ostringstream csv;
  csv << "scale,at,numeric_lo,numeric_hi,exact_lo,exact_hi,error\n";
  for (const auto& r : rows) {
    doc << fmt(r.scale) << "  " << fmt(r.at) << "  " << fmt(r.numeric.lower) << "  "
        << fmt(r.numeric.upper) << "  " << fmt(r.exact.lower) << "  " << fmt(r.exact.upper)
        << "  " << fmt(r.error) << "\n";
    csv << fmt(r.scale) << "," << fmt(r.at) << "," << fmt(r.numeric.lower) << ","
        << fmt(r.numeric.upper) << "," << fmt(r.exact.lower) << "," << fmt(r.exact.upper) << ","
        << fmt(r.error) << "\n";
  }
  doc << "\n";
  write_outputs(opt, doc.str(), csv.str());
  return 0;
}

inline int run_trade(const RunOptions& opt) {
  scenario_file::TradePlan plan;
  costs::NoiseCostFunction c = costs::NoiseCostFunction::exp_decay(1.0, 1.0);
  double bound = 2.0;
  optimize::SolverOptions solver;
  std::string echo;
  if (!opt.scenario_path.empty()) {
    scenario_file::ScenarioFile s = scenario_file::parse_scenario(opt.scenario_path);
    plan = s.trade;
    c = s.cost;
    bound = s.bound;
    solver = s.solver;
    echo = s.echo;
  }
  if (opt.seed) solver.seed = *opt.seed;
  scenario::TradeDemo demo =
      scenario::trade_demo(plan.price, plan.quality_low, plan.quality_high, plan.prob_high, c,
                           bound, solver);

  std::ostringstream doc;
  doc << "# optexp result: trade-demo\n\n";
  write_scenario_section(doc, echo);
  doc << "## trade\nnote: " << scenario::kTradeDemoNote << "\nprice  " << fmt(demo.price)
      << "\nquality_low  " << fmt(demo.quality_low) << "\nquality_high  "
      << fmt(demo.quality_high) << "\nprob_high  " << fmt(demo.prob_high) << "\nbuy_threshold  "
      << (demo.threshold ? fmt(*demo.threshold) : std::string("(rule never switches)"))
      << "\n\n";
  write_widths_section(doc, demo.result.widths, bound);
  write_rule_section(doc, demo.result.rule);
  write_value_section(doc, demo.result.benefit, demo.result.cost, demo.result.value);
  write_foc_section(doc, demo.result.foc);
  measures::MixedDistribution prior({{plan.quality_low, 1.0 - plan.prob_high},
                                     {plan.quality_high, plan.prob_high}});
  std::string csv =
      samples_csv(prior, demo.result.rule, bayes::Utility::trade(plan.price), c, bound);
  write_samples_section(doc, csv);
  write_outputs(opt, doc.str(), csv);
  return finish_with_foc(opt, demo.result.foc);
}

inline int run_axioms(const RunOptions& opt) {
  std::uint64_t seed = opt.seed.value_or(0);
  axioms::AxiomSuiteResult r = axioms::run_cost_axiom_suite(seed);
  constexpr double kEqualityTol = 2e-9;
  constexpr double kStrictDrop = 1e-9;
  bool ok = r.max_consistency <= kEqualityTol && r.max_prior_indep <= kEqualityTol &&
            r.max_linearity <= kEqualityTol && r.max_continuity <= kEqualityTol &&
            r.min_garble_drop > kStrictDrop;

  std::ostringstream doc;
  doc << "# optexp result: axioms\n\n## axioms\nseed  " << seed << "\n"
      << "suite  cases  statistic  threshold  status\n";
  auto line = [&](const char* name, int cases, double stat, const char* rel, double thr,
                  bool pass) {
    doc << name << "  " << cases << "  " << fmt(stat) << "  " << rel << fmt(thr) << "  "
        << (pass ? "pass" : "FAIL") << "\n";
  };
  line("consistency", r.cases, r.max_consistency, "<=", kEqualityTol,
       r.max_consistency <= kEqualityTol);
  line("prior-independence", r.cases, r.max_prior_indep, "<=", kEqualityTol,
       r.max_prior_indep <= kEqualityTol);
  line("linearity", r.cases, r.max_linearity, "<=", kEqualityTol,
       r.max_linearity <= kEqualityTol);
  line("continuity", r.cases, r.max_continuity, "<=", kEqualityTol,
       r.max_continuity <= kEqualityTol);
  line("garbling-monotonicity", r.garble_cases, r.min_garble_drop, ">", kStrictDrop,
       r.min_garble_drop > kStrictDrop);
  doc << "\n";
  std::ostringstream csv;
  csv << "suite,cases,statistic\nconsistency," << r.cases << "," << fmt(r.max_consistency)
      << "\nprior-independence," << r.cases << "," << fmt(r.max_prior_indep) << "\nlinearity,"
      << r.cases << "," << fmt(r.max_linearity) << "\ncontinuity," << r.cases << ","
      << fmt(r.max_continuity) << "\ngarbling-monotonicity," << r.garble_cases << ","
      << fmt(r.min_garble_drop) << "\n";
  write_outputs(opt, doc.str(), csv.str());
  if (!ok) {
    *opt.err << "error: an axiom property suite exceeded its tolerance\n";
    return 3;
  }
  return 0;
}

}  // namespace detail

inline int run(const RunOptions& opt) {
  try {
    if (opt.threads < 1) throw ValidationError("--threads must be at least 1");
    const std::string& cmd = opt.subcommand;
    if (cmd == "solve") return detail::run_solve(opt, false);
    if (cmd == "foc-check") return detail::run_solve(opt, true);
    if (cmd == "cost") return detail::run_cost(opt);
    if (cmd == "dominance-check") return detail::run_dominance(opt);
    if (cmd == "example-nonexistence") return detail::run_nonexistence(opt);
    if (cmd == "clarke-demo") return detail::run_clarke(opt);
    if (cmd == "trade-demo") return detail::run_trade(opt);
    if (cmd == "axioms") return detail::run_axioms(opt);
    throw ValidationError("unknown subcommand: " + cmd);
  } catch (const ValidationError& e) {
    *opt.err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    *opt.err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    *opt.err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace optexp::cli
