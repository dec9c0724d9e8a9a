#include <cstdint>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "optexp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"inspection-width optimizer for costly noisy experiments"};
  app.require_subcommand(1);

  std::string scenario_path, out_path;
  bool strict = false;
  int threads = 1;
  std::uint64_t seed_val = 0;
  bool seed_given = false;

  struct Entry {
    const char* name;
    const char* desc;
    bool takes_scenario;
  };
  constexpr Entry kSubcommands[] = {
      {"solve", "optimize per-state widths for a scenario", true},
      {"cost", "price the scenario's experiment section", true},
      {"dominance-check", "compare an experiment against its uniform replacement", true},
      {"foc-check", "solve, then re-verify first-order conditions", true},
      {"example-nonexistence", "cost-to-zero limit sequence with pinned posterior", false},
      {"clarke-demo", "numeric generalized derivatives vs the closed form", false},
      {"trade-demo", "two-state purchase decision with optimized inspection", false},
      {"axioms", "run the seeded cost-axiom property suites", false},
  };
  for (const Entry& e : kSubcommands) {
    CLI::App* sub = app.add_subcommand(e.name, e.desc);
    if (e.takes_scenario)
      sub->add_option("scenario", scenario_path, "scenario file (JSON)");
    else
      sub->add_option("scenario", scenario_path, "optional scenario file (JSON)");
    sub->add_option("--out", out_path, "write the result document here plus a sibling .csv");
    sub->add_flag("--strict", strict, "exit 4 when a first-order condition fails");
    sub->add_option("--threads", threads, "worker threads (reserved; runs single-threaded)");
    sub->add_option("--seed", seed_val, "override the scenario's solver seed")
        ->each([&seed_given](const std::string&) { seed_given = true; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  optexp::cli::RunOptions opt;
  opt.subcommand = app.get_subcommands().front()->get_name();
  opt.scenario_path = scenario_path;
  opt.out_path = out_path;
  opt.strict = strict;
  opt.threads = threads;
  if (seed_given) opt.seed = seed_val;
  return optexp::cli::run(opt);
}
