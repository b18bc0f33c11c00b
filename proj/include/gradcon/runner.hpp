#pragma once

#include "gradcon/scenario.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gradcon {

enum ExitCode : int { kExitPass = 0, kExitCheckFail = 1, kExitSolverFail = 2, kExitInputError = 3 };

struct RunOptions {
  std::string out_dir;      // empty: out/<scenario name>
  double tol_scale = 1.0;   // multiplies tol_c, tol_p and tol_H
  double grid_h = 0;        // > 0 overrides the scenario grid
  std::string schedule;     // "3,2/0.0625": eps in cells, then the final delta
  bool dry_run = false;
};

struct RunOutcome {
  int exit_code = kExitPass;
  std::vector<std::pair<std::string, Report>> reports;
  std::string message;
};

// Applies --grid and --schedule overrides; throws ScenarioError on bad input.
void apply_overrides(Scenario& sc, const RunOptions& opt);

// Full pipeline: echo, assumption and datum checks, obstacles, solve, checks.
// Everything is written below the output directory.
RunOutcome run_scenario(Scenario sc, const RunOptions& opt, std::ostream& log);

// Recomputes the checks of an archived run from its scenario echo and u
// field and compares them with the stored reports.
RunOutcome check_archive(const std::string& dir, const RunOptions& opt, std::ostream& log);

}  // namespace gradcon
