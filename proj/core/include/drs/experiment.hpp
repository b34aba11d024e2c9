#pragma once

#include <string>
#include <vector>

#include "drs/scenario.hpp"
#include "drs/sim.hpp"
#include "drs/trace.hpp"

namespace drs {

struct ExperimentResult {
  RunResult run;
  RunReport report;
};

// Builds the simulation from the scenario, runs it, and summarizes the trace.
ExperimentResult run_scenario(const Scenario& scenario);

// Same, then writes trace.csv, events.csv, report.json and scenario.json
// into out_dir (created if needed).
ExperimentResult run_scenario(const Scenario& scenario,
                              const std::string& out_dir);

struct SweepRow {
  double value = 0.0;
  RunReport report;
};

// Runs the base scenario once per value of the overridden key. Each run's
// outputs land in out_dir/<key>=<value>/ and a summary.csv collects the
// headline numbers across the sweep.
std::vector<SweepRow> sweep(const Scenario& base, const std::string& key,
                            const std::vector<double>& values,
                            const std::string& out_dir);

// Tabulates the capture point and orbital energy over a grid of vertical
// support accelerations and relative CoM speeds. Columns:
//   zdd_ws, xdot_sc, x_cap, exists, E_x
void capture_sweep_csv(const std::string& path, double z0,
                       const std::vector<double>& xdot_grid,
                       const std::vector<double>& zdd_grid);

}  // namespace drs
