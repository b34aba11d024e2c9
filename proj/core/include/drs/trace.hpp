#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "drs/types.hpp"

namespace drs {

// One sample at the control rate. Columns are written in declaration order;
// the block layout is documented in docs/formats.md.
struct TraceRow {
  double t = 0.0;
  VecQ q = VecQ::Zero();
  VecQ qd = VecQ::Zero();
  Vec12 u = Vec12::Zero();
  Vec9 ff = Vec9::Zero();      // commanded stance forces, surface axes
  Vec9 lambda = Vec9::Zero();  // constraint forces from the plant, world axes
  Vec9 y = Vec9::Zero();       // output tracking error
  double surface_pitch = 0.0;  // rotation angle about the pitch axis, rad
  double phi = 0.0;            // swing foot clearance above the plane
  int event = 0;               // bit 0: touchdown, bit 1: liftoff since last row
  int qp_status = 0;
  double solve_ms = 0.0;
  // Extra diagnostics appended after the standard block.
  Vec9 v = Vec9::Zero();
  double margin_friction = 0.0;
  double margin_normal = 0.0;
  double margin_torque = 0.0;
  int fallbacks = 0;  // cumulative fallback levels used so far
  double pin_err = 0.0;
  double accel_ratio = 0.0;
  int swing = 0;  // foot id currently in swing
  double target_x = 0.0;  // commanded footstep location
  double target_y = 0.0;
  double cap_x = 0.0;  // capture point offset from the CoM projection
  double cap_y = 0.0;
  int cap_exists = 0;
};

enum class EventKind {
  kTouchdown,
  kLiftoff,
  kControllerFailure,
  kFallback,
};

const char* event_kind_name(EventKind kind);

struct EventRecord {
  double t = 0.0;
  EventKind kind = EventKind::kTouchdown;
  FootId foot = FootId::FL;
  double phi = 0.0;
};

std::string trace_header();
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::string& path);

void write_events_csv(const std::string& path,
                      const std::vector<EventRecord>& events);
std::vector<EventRecord> read_events_csv(const std::string& path);

// Time windows used for the lateral-deviation statistics.
struct ReportWindows {
  double baseline_start = 0.5;
  double baseline_end = 2.0;
  double recovery_start = 7.0;
  double recovery_end = 10.0;
};

// Summary statistics of a run, derived purely from the trace rows so a
// report can be regenerated bit-for-bit from a saved trace.
struct RunReport {
  std::string outcome;
  double t_end = 0.0;
  int rows = 0;
  Vec9 max_abs_y = Vec9::Zero();
  Vec9 rms_y = Vec9::Zero();
  double max_abs_torque = 0.0;
  double min_margin_friction = 0.0;
  double min_margin_normal = 0.0;
  double min_margin_torque = 0.0;
  double baseline_lateral = 0.0;  // mean base lateral position, baseline window
  double peak_lateral_deviation = 0.0;
  double baseline_rms = 0.0;
  double recovery_rms = 0.0;
  int fallback_total = 0;
  double median_solve_ms = 0.0;
  double total_solve_ms = 0.0;
  double max_accel_ratio = 0.0;
  double max_pin_err = 0.0;
  // RMS mismatch between plant contact forces and the commanded forces,
  // relative to the plant force RMS.
  double force_agreement_rms = 0.0;
  std::array<int, kNumLegs> cone_violations{};
};

RunReport make_report(const std::vector<TraceRow>& rows,
                      const std::string& outcome, double mu,
                      double cone_tolerance,
                      const ReportWindows& windows = ReportWindows{});

void write_report_json(const std::string& path, const RunReport& report);
RunReport read_report_json(const std::string& path);

}  // namespace drs
