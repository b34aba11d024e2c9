#include "drs/experiment.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "drs/lipm.hpp"

namespace drs {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ExperimentResult run_scenario(const Scenario& scenario) {
  Simulation sim = scenario.build();
  ExperimentResult result;
  result.run = sim.run();
  result.report =
      make_report(result.run.trace, outcome_name(result.run.outcome),
                  scenario.gains.mu, scenario.sim.cone_tolerance,
                  scenario.windows);
  return result;
}

ExperimentResult run_scenario(const Scenario& scenario,
                              const std::string& out_dir) {
  ExperimentResult result = run_scenario(scenario);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_trace_csv((dir / "trace.csv").string(), result.run.trace);
  write_events_csv((dir / "events.csv").string(), result.run.events);
  write_report_json((dir / "report.json").string(), result.report);
  save_scenario((dir / "scenario.json").string(), scenario);
  return result;
}

std::vector<SweepRow> sweep(const Scenario& base, const std::string& key,
                            const std::vector<double>& values,
                            const std::string& out_dir) {
  if (values.empty()) throw std::invalid_argument("sweep needs values");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    Scenario s = base;
    apply_override(s, key, format_double(value));
    const std::string run_dir =
        (fs::path(out_dir) / (key + "=" + format_double(value))).string();
    ExperimentResult res = run_scenario(s, run_dir);
    rows.push_back({value, res.report});
  }
  std::ofstream out(fs::path(out_dir) / "summary.csv", std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write sweep summary");
  out << "value,outcome,t_end,peak_lateral_deviation,min_margin_friction,"
         "min_margin_normal,min_margin_torque,max_abs_torque,fallback_total,"
         "median_solve_ms\n";
  for (const SweepRow& row : rows) {
    out << format_double(row.value) << ',' << row.report.outcome << ','
        << format_double(row.report.t_end) << ','
        << format_double(row.report.peak_lateral_deviation) << ','
        << format_double(row.report.min_margin_friction) << ','
        << format_double(row.report.min_margin_normal) << ','
        << format_double(row.report.min_margin_torque) << ','
        << format_double(row.report.max_abs_torque) << ','
        << row.report.fallback_total << ','
        << format_double(row.report.median_solve_ms) << '\n';
  }
  return rows;
}

void capture_sweep_csv(const std::string& path, double z0,
                       const std::vector<double>& xdot_grid,
                       const std::vector<double>& zdd_grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "zdd_ws,xdot_sc,x_cap,exists,E_x\n";
  for (double zdd : zdd_grid) {
    for (double xdot : xdot_grid) {
      LipmState state;
      state.z0 = z0;
      state.r_sc = Vec3(0.0, 0.0, z0);
      state.rd_sc = Vec3(xdot, 0.0, 0.0);
      state.support_acc = Vec3(0.0, 0.0, zdd);
      const CaptureResult cap = capture_point(state);
      const Vec2 energy = orbital_energy(state);
      out << format_double(zdd) << ',' << format_double(xdot) << ','
          << format_double(cap.x_cap) << ',' << (cap.exists ? 1 : 0) << ','
          << format_double(energy.x()) << '\n';
    }
  }
}

}  // namespace drs
