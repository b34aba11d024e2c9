#pragma once

#include <string>
#include <vector>

#include "drs/controller.hpp"
#include "drs/planner.hpp"
#include "drs/robot.hpp"
#include "drs/sim.hpp"
#include "drs/surface.hpp"
#include "drs/trace.hpp"

namespace drs {

// Surface section of a config file. Angles live here in degrees, matching
// how such parameters are usually quoted, and are converted to radians only
// when the motion model is built; storing the original numbers keeps the
// serialization round trip lossless.
struct SurfaceSpec {
  std::string profile = "static";  // static | rock_and_translate |
                                   // vertical_sinusoid | tabulated
  double pitch_amplitude_deg = 0.0;
  double pitch_frequency = 0.0;  // Hz
  double phase_deg = 0.0;
  Vec3 pivot = Vec3::Zero();
  Vec2 belt_velocity = Vec2::Zero();  // m/s in deck coordinates
  double z_amplitude = 0.0;           // m
  double z_frequency = 0.0;           // Hz
  std::string table_csv;  // pose samples, used by the tabulated profile

  SurfaceMotion build() const;
  void validate() const;
};

struct Scenario {
  std::string name = "unnamed";
  std::string controller_mode = "full_qp";  // or io_only
  RobotParams robot;
  GaitParams gait;
  PlannerConfig planner;
  ControllerGains gains;
  SurfaceSpec surface;
  SimConfig sim;
  std::vector<Perturbation> perturbations;
  ReportWindows windows;

  ControlMode mode() const;
  SurfaceMotion build_surface() const { return surface.build(); }
  Simulation build() const;
  void validate() const;
};

std::string scenario_to_json_text(const Scenario& s);
// origin names the source in error diagnostics (file path or "<string>").
Scenario scenario_from_json_text(const std::string& text,
                                 const std::string& origin = "<string>");

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& s);

// Sets one field addressed by a dotted path ("gait.cycle_time",
// "perturbations.0.amplitude"). Throws std::invalid_argument with the list
// of valid keys when the path does not resolve.
void apply_override(Scenario& s, const std::string& key,
                    const std::string& value);

const std::vector<std::string>& bundled_scenario_names();
Scenario bundled_scenario(const std::string& name);

}  // namespace drs
