#include "drs/scenario.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace drs {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::string msg = "unknown key '" + it.key() + "'; valid keys are:";
      for (const char* k : allowed) {
        msg += ' ';
        msg += k;
      }
      fail(where, msg);
    }
  }
}

double get_num(const json& j, const char* key, double fallback,
               const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, int fallback,
            const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string get_str(const json& j, const char* key, std::string fallback,
                    const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

void read_fixed(const json& v, double* data, int n, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    fail(where, "expected an array of " + std::to_string(n) + " numbers");
  }
  for (int i = 0; i < n; ++i) {
    if (!v[static_cast<size_t>(i)].is_number()) fail(where, "expected numbers");
    data[i] = v[static_cast<size_t>(i)].get<double>();
  }
}

template <typename Vec>
void get_vec(const json& j, const char* key, Vec& out,
             const std::string& where) {
  if (!j.contains(key)) return;
  read_fixed(j.at(key), out.data(), static_cast<int>(out.size()),
             where + "." + key);
}

template <typename Vec>
json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json robot_json(const RobotParams& r) {
  json j;
  j["total_mass"] = r.total_mass;
  j["leg_mass"] = r.leg_mass;
  j["body_dims"] = vec_json(r.body_dims);
  j["torso_thickness"] = r.torso_thickness;
  json hips = json::array();
  for (const Vec3& h : r.hip_offsets) hips.push_back(vec_json(h));
  j["hip_offsets"] = hips;
  j["upper_leg_length"] = r.upper_leg_length;
  j["lower_leg_length"] = r.lower_leg_length;
  j["knee_bend"] = std::vector<double>(r.knee_bend.begin(), r.knee_bend.end());
  j["torque_limits"] = vec_json(r.torque_limits);
  j["gravity"] = r.gravity;
  j["link_inertia"] = r.link_inertia == LinkInertiaModel::kUniformRod
                          ? "uniform_rod"
                          : "point_mass_mid_link";
  return j;
}

RobotParams robot_from_json(const json& j, const std::string& where) {
  check_keys(j, where,
             {"total_mass", "leg_mass", "body_dims", "torso_thickness",
              "hip_offsets", "upper_leg_length", "lower_leg_length",
              "knee_bend", "torque_limits", "gravity", "link_inertia"});
  RobotParams r;
  r.total_mass = get_num(j, "total_mass", r.total_mass, where);
  r.leg_mass = get_num(j, "leg_mass", r.leg_mass, where);
  get_vec(j, "body_dims", r.body_dims, where);
  r.torso_thickness = get_num(j, "torso_thickness", r.torso_thickness, where);
  if (j.contains("hip_offsets")) {
    const json& hips = j.at("hip_offsets");
    if (!hips.is_array() || hips.size() != kNumLegs)
      fail(where + ".hip_offsets", "expected 4 arrays of 3 numbers");
    for (size_t i = 0; i < kNumLegs; ++i) {
      read_fixed(hips[i], r.hip_offsets[i].data(), 3,
                 where + ".hip_offsets[" + std::to_string(i) + "]");
    }
  }
  r.upper_leg_length = get_num(j, "upper_leg_length", r.upper_leg_length, where);
  r.lower_leg_length = get_num(j, "lower_leg_length", r.lower_leg_length, where);
  if (j.contains("knee_bend")) {
    read_fixed(j.at("knee_bend"), r.knee_bend.data(), kNumLegs,
               where + ".knee_bend");
  }
  get_vec(j, "torque_limits", r.torque_limits, where);
  r.gravity = get_num(j, "gravity", r.gravity, where);
  const std::string inertia =
      get_str(j, "link_inertia", "uniform_rod", where);
  if (inertia == "uniform_rod") {
    r.link_inertia = LinkInertiaModel::kUniformRod;
  } else if (inertia == "point_mass_mid_link") {
    r.link_inertia = LinkInertiaModel::kPointMassAtMidLink;
  } else {
    fail(where + ".link_inertia",
         "expected 'uniform_rod' or 'point_mass_mid_link'");
  }
  return r;
}

json gait_json(const GaitParams& g) {
  json j;
  j["cycle_time"] = g.cycle_time;
  j["swing_height"] = g.swing_height;
  j["v_d"] = vec_json(g.v_d);
  j["k_step"] = g.k_step;
  j["base_height"] = g.base_height;
  return j;
}

GaitParams gait_from_json(const json& j, const std::string& where) {
  check_keys(j, where,
             {"cycle_time", "swing_height", "v_d", "k_step", "base_height"});
  GaitParams g;
  g.cycle_time = get_num(j, "cycle_time", g.cycle_time, where);
  g.swing_height = get_num(j, "swing_height", g.swing_height, where);
  get_vec(j, "v_d", g.v_d, where);
  g.k_step = get_num(j, "k_step", g.k_step, where);
  g.base_height = get_num(j, "base_height", g.base_height, where);
  return g;
}

json planner_json(const PlannerConfig& p) {
  json j;
  j["sway_amplitude"] = p.sway_amplitude;
  j["blend_pos"] = p.blend_pos;
  j["blend_vel"] = p.blend_vel;
  j["aim_below"] = p.aim_below;
  j["probe_speed"] = p.probe_speed;
  j["probe_ramp"] = p.probe_ramp;
  j["commit_fraction"] = p.commit_fraction;
  j["min_g_eff"] = p.min_g_eff;
  return j;
}

PlannerConfig planner_from_json(const json& j, const std::string& where) {
  check_keys(j, where,
             {"sway_amplitude", "blend_pos", "blend_vel", "aim_below",
              "probe_speed", "probe_ramp", "commit_fraction", "min_g_eff"});
  PlannerConfig p;
  p.sway_amplitude = get_num(j, "sway_amplitude", p.sway_amplitude, where);
  p.blend_pos = get_num(j, "blend_pos", p.blend_pos, where);
  p.blend_vel = get_num(j, "blend_vel", p.blend_vel, where);
  p.aim_below = get_num(j, "aim_below", p.aim_below, where);
  p.probe_speed = get_num(j, "probe_speed", p.probe_speed, where);
  p.probe_ramp = get_num(j, "probe_ramp", p.probe_ramp, where);
  p.commit_fraction = get_num(j, "commit_fraction", p.commit_fraction, where);
  p.min_g_eff = get_num(j, "min_g_eff", p.min_g_eff, where);
  return p;
}

json gains_json(const ControllerGains& g) {
  json j;
  j["kp_diag"] = vec_json(g.kp_diag);
  j["kd_diag"] = vec_json(g.kd_diag);
  j["q_torque"] = g.q_torque;
  j["q_force"] = g.q_force;
  j["w_torque"] = g.w_torque;
  j["w_force"] = g.w_force;
  j["mu"] = g.mu;
  j["f_z_min"] = g.f_z_min;
  return j;
}

ControllerGains gains_from_json(const json& j, const std::string& where) {
  check_keys(j, where,
             {"kp_diag", "kd_diag", "q_torque", "q_force", "w_torque",
              "w_force", "mu", "f_z_min"});
  ControllerGains g;
  get_vec(j, "kp_diag", g.kp_diag, where);
  get_vec(j, "kd_diag", g.kd_diag, where);
  g.q_torque = get_num(j, "q_torque", g.q_torque, where);
  g.q_force = get_num(j, "q_force", g.q_force, where);
  g.w_torque = get_num(j, "w_torque", g.w_torque, where);
  g.w_force = get_num(j, "w_force", g.w_force, where);
  g.mu = get_num(j, "mu", g.mu, where);
  g.f_z_min = get_num(j, "f_z_min", g.f_z_min, where);
  return g;
}

json surface_json(const SurfaceSpec& s) {
  json j;
  j["profile"] = s.profile;
  j["pitch_amplitude_deg"] = s.pitch_amplitude_deg;
  j["pitch_frequency"] = s.pitch_frequency;
  j["phase_deg"] = s.phase_deg;
  j["pivot"] = vec_json(s.pivot);
  j["belt_velocity"] = vec_json(s.belt_velocity);
  j["z_amplitude"] = s.z_amplitude;
  j["z_frequency"] = s.z_frequency;
  j["table_csv"] = s.table_csv;
  return j;
}

SurfaceSpec surface_from_json(const json& j, const std::string& where) {
  check_keys(j, where,
             {"profile", "pitch_amplitude_deg", "pitch_frequency", "phase_deg",
              "pivot", "belt_velocity", "z_amplitude", "z_frequency",
              "table_csv"});
  SurfaceSpec s;
  s.profile = get_str(j, "profile", s.profile, where);
  s.pitch_amplitude_deg =
      get_num(j, "pitch_amplitude_deg", s.pitch_amplitude_deg, where);
  s.pitch_frequency = get_num(j, "pitch_frequency", s.pitch_frequency, where);
  s.phase_deg = get_num(j, "phase_deg", s.phase_deg, where);
  get_vec(j, "pivot", s.pivot, where);
  get_vec(j, "belt_velocity", s.belt_velocity, where);
  s.z_amplitude = get_num(j, "z_amplitude", s.z_amplitude, where);
  s.z_frequency = get_num(j, "z_frequency", s.z_frequency, where);
  s.table_csv = get_str(j, "table_csv", s.table_csv, where);
  return s;
}

json sim_json(const SimConfig& c) {
  json j;
  j["dt"] = c.dt;
  j["control_divisor"] = c.control_divisor;
  j["duration"] = c.duration;
  j["pin_alpha"] = c.pin_alpha;
  j["pin_beta"] = c.pin_beta;
  j["arm_clearance"] = c.arm_clearance;
  j["arm_fraction"] = c.arm_fraction;
  j["bisection_iters"] = c.bisection_iters;
  j["event_tolerance"] = c.event_tolerance;
  j["failure_ticks"] = c.failure_ticks;
  j["lambda_floor"] = c.lambda_floor;
  j["cone_tolerance"] = c.cone_tolerance;
  j["seed"] = c.seed;
  return j;
}

SimConfig sim_from_json(const json& j, const std::string& where) {
  check_keys(j, where,
             {"dt", "control_divisor", "duration", "pin_alpha", "pin_beta",
              "arm_clearance", "arm_fraction", "bisection_iters",
              "event_tolerance", "failure_ticks", "lambda_floor",
              "cone_tolerance", "seed"});
  SimConfig c;
  c.dt = get_num(j, "dt", c.dt, where);
  c.control_divisor = get_int(j, "control_divisor", c.control_divisor, where);
  c.duration = get_num(j, "duration", c.duration, where);
  c.pin_alpha = get_num(j, "pin_alpha", c.pin_alpha, where);
  c.pin_beta = get_num(j, "pin_beta", c.pin_beta, where);
  c.arm_clearance = get_num(j, "arm_clearance", c.arm_clearance, where);
  c.arm_fraction = get_num(j, "arm_fraction", c.arm_fraction, where);
  c.bisection_iters = get_int(j, "bisection_iters", c.bisection_iters, where);
  c.event_tolerance = get_num(j, "event_tolerance", c.event_tolerance, where);
  c.failure_ticks = get_int(j, "failure_ticks", c.failure_ticks, where);
  c.lambda_floor = get_num(j, "lambda_floor", c.lambda_floor, where);
  c.cone_tolerance = get_num(j, "cone_tolerance", c.cone_tolerance, where);
  c.seed = get_int(j, "seed", c.seed, where);
  return c;
}

json perturbation_json(const Perturbation& p) {
  json j;
  j["amplitude"] = p.amplitude;
  j["frequency"] = p.frequency;
  j["axis"] = vec_json(p.axis);
  j["t_start"] = p.t_start;
  j["t_end"] = p.t_end;
  return j;
}

Perturbation perturbation_from_json(const json& j, const std::string& where) {
  check_keys(j, where, {"amplitude", "frequency", "axis", "t_start", "t_end"});
  Perturbation p;
  p.amplitude = get_num(j, "amplitude", p.amplitude, where);
  p.frequency = get_num(j, "frequency", p.frequency, where);
  get_vec(j, "axis", p.axis, where);
  p.t_start = get_num(j, "t_start", p.t_start, where);
  p.t_end = get_num(j, "t_end", p.t_end, where);
  return p;
}

json windows_json(const ReportWindows& w) {
  json j;
  j["baseline_start"] = w.baseline_start;
  j["baseline_end"] = w.baseline_end;
  j["recovery_start"] = w.recovery_start;
  j["recovery_end"] = w.recovery_end;
  return j;
}

ReportWindows windows_from_json(const json& j, const std::string& where) {
  check_keys(j, where, {"baseline_start", "baseline_end", "recovery_start",
                        "recovery_end"});
  ReportWindows w;
  w.baseline_start = get_num(j, "baseline_start", w.baseline_start, where);
  w.baseline_end = get_num(j, "baseline_end", w.baseline_end, where);
  w.recovery_start = get_num(j, "recovery_start", w.recovery_start, where);
  w.recovery_end = get_num(j, "recovery_end", w.recovery_end, where);
  return w;
}

json scenario_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["controller_mode"] = s.controller_mode;
  j["robot"] = robot_json(s.robot);
  j["gait"] = gait_json(s.gait);
  j["planner"] = planner_json(s.planner);
  j["gains"] = gains_json(s.gains);
  j["surface"] = surface_json(s.surface);
  j["sim"] = sim_json(s.sim);
  json perts = json::array();
  for (const Perturbation& p : s.perturbations)
    perts.push_back(perturbation_json(p));
  j["perturbations"] = perts;
  j["windows"] = windows_json(s.windows);
  return j;
}

Scenario scenario_from_json(const json& j, const std::string& origin) {
  check_keys(j, origin,
             {"name", "controller_mode", "robot", "gait", "planner", "gains",
              "surface", "sim", "perturbations", "windows"});
  Scenario s;
  s.name = get_str(j, "name", s.name, origin);
  s.controller_mode = get_str(j, "controller_mode", s.controller_mode, origin);
  if (j.contains("robot")) s.robot = robot_from_json(j.at("robot"), origin + ".robot");
  if (j.contains("gait")) s.gait = gait_from_json(j.at("gait"), origin + ".gait");
  if (j.contains("planner"))
    s.planner = planner_from_json(j.at("planner"), origin + ".planner");
  if (j.contains("gains"))
    s.gains = gains_from_json(j.at("gains"), origin + ".gains");
  if (j.contains("surface"))
    s.surface = surface_from_json(j.at("surface"), origin + ".surface");
  if (j.contains("sim")) s.sim = sim_from_json(j.at("sim"), origin + ".sim");
  if (j.contains("perturbations")) {
    const json& perts = j.at("perturbations");
    if (!perts.is_array()) fail(origin + ".perturbations", "expected an array");
    for (size_t i = 0; i < perts.size(); ++i) {
      s.perturbations.push_back(perturbation_from_json(
          perts[i], origin + ".perturbations[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("windows"))
    s.windows = windows_from_json(j.at("windows"), origin + ".windows");
  return s;
}

// Parses an override value against the type of the field it replaces.
json parse_override_value(const json& current, const std::string& value,
                          const std::string& key) {
  if (current.is_string()) return value;
  if (current.is_boolean()) {
    if (value == "true") return true;
    if (value == "false") return false;
    fail(key, "expected true or false");
  }
  if (current.is_number()) {
    size_t used = 0;
    double num = 0.0;
    try {
      num = std::stod(value, &used);
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + value + "'");
    }
    if (used != value.size()) fail(key, "expected a number, got '" + value + "'");
    if (current.is_number_integer() &&
        num == std::nearbyint(num)) {
      return static_cast<long long>(num);
    }
    return num;
  }
  fail(key, "cannot assign to a non-scalar field; address its elements");
}

}  // namespace

void SurfaceSpec::validate() const {
  if (profile != "static" && profile != "rock_and_translate" &&
      profile != "vertical_sinusoid" && profile != "tabulated") {
    fail("surface.profile",
         "expected static, rock_and_translate, vertical_sinusoid or tabulated");
  }
  if (profile == "tabulated" && table_csv.empty())
    fail("surface.table_csv", "tabulated profile needs a pose file");
  if (pitch_frequency < 0.0 || z_frequency < 0.0)
    fail("surface", "frequencies must be nonnegative");
}

SurfaceMotion SurfaceSpec::build() const {
  validate();
  SurfaceMotion m;
  if (profile == "static") {
    m.profile = SurfaceProfile::kStatic;
  } else if (profile == "rock_and_translate") {
    m.profile = SurfaceProfile::kRockAndTranslate;
  } else if (profile == "vertical_sinusoid") {
    m.profile = SurfaceProfile::kVerticalSinusoid;
  } else {
    m.profile = SurfaceProfile::kCustomTabulated;
    m.table = std::make_shared<TabulatedMotion>(
        TabulatedMotion::from_csv(table_csv));
  }
  m.pitch_amplitude = pitch_amplitude_deg * kDegToRad;
  m.pitch_frequency = pitch_frequency;
  m.phase = phase_deg * kDegToRad;
  m.pivot = pivot;
  m.belt_velocity = Vec3(belt_velocity.x(), belt_velocity.y(), 0.0);
  m.z_amplitude = z_amplitude;
  m.z_frequency = z_frequency;
  return m;
}

ControlMode Scenario::mode() const {
  if (controller_mode == "full_qp") return ControlMode::kFullQp;
  if (controller_mode == "io_only") return ControlMode::kIoOnly;
  fail("controller_mode", "expected full_qp or io_only");
}

void Scenario::validate() const {
  robot.validate();
  gait.validate();
  planner.validate();
  gains.validate();
  surface.validate();
  sim.validate();
  (void)mode();
  for (size_t i = 0; i < perturbations.size(); ++i) {
    const Perturbation& p = perturbations[i];
    const std::string where = "perturbations[" + std::to_string(i) + "]";
    if (!(p.t_start < p.t_end)) fail(where, "t_start must precede t_end");
    if (p.amplitude < 0.0) fail(where, "amplitude must be nonnegative");
    if (p.axis.norm() <= 0.0) fail(where, "axis must be nonzero");
  }
  if (!(windows.baseline_start < windows.baseline_end) ||
      !(windows.recovery_start < windows.recovery_end)) {
    fail("windows", "each window must have start < end");
  }
}

Simulation Scenario::build() const {
  validate();
  Simulation run(robot, gait, planner, gains, build_surface(), sim, mode());
  for (const Perturbation& p : perturbations) run.add_perturbation(p);
  return run;
}

std::string scenario_to_json_text(const Scenario& s) {
  return scenario_json(s).dump(2) + "\n";
}

Scenario scenario_from_json_text(const std::string& text,
                                 const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1;
    const size_t limit = std::min(e.byte, text.size());
    for (size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " +
                                e.what());
  }
  return scenario_from_json(j, origin);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str(), path);
}

void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  out << scenario_to_json_text(s);
}

void apply_override(Scenario& s, const std::string& key,
                    const std::string& value) {
  json root = scenario_json(s);
  json* node = &root;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    const bool last = dot == std::string::npos;
    json* child = nullptr;
    if (node->is_array()) {
      size_t idx = 0;
      try {
        size_t used = 0;
        idx = std::stoul(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        fail(key, "'" + part + "' is not an array index (array of size " +
                      std::to_string(node->size()) + ")");
      }
      if (idx >= node->size()) {
        fail(key, "index " + part + " out of range (array of size " +
                      std::to_string(node->size()) + ")");
      }
      child = &(*node)[idx];
    } else if (node->is_object()) {
      if (!node->contains(part)) {
        std::string msg = "unknown key '" + part + "'; valid keys are:";
        for (auto it = node->begin(); it != node->end(); ++it) {
          msg += ' ';
          msg += it.key();
        }
        fail(key, msg);
      }
      child = &(*node)[part];
    } else {
      fail(key, "'" + part + "' addresses into a scalar field");
    }
    if (last) {
      *child = parse_override_value(*child, value, key);
      break;
    }
    node = child;
    start = dot + 1;
  }
  s = scenario_from_json(root, "<override>");
}

const std::vector<std::string>& bundled_scenario_names() {
  static const std::vector<std::string> names = {
      "case1_unperturbed", "case2_lateral_perturbation", "case3_io_only"};
  return names;
}

Scenario bundled_scenario(const std::string& name) {
  // Shared setup: rocking, belt-driven treadmill surface with the nominal
  // walk-in-place crawl gait on top of it.
  Scenario s;
  s.name = name;
  s.surface.profile = "rock_and_translate";
  s.surface.pitch_amplitude_deg = 5.0;
  s.surface.pitch_frequency = 0.5;
  // Start at peak deflection so the tilt (and its angular acceleration)
  // passes through zero when the support diagonal is tightest, mid-cycle.
  s.surface.phase_deg = -90.0;
  s.surface.belt_velocity = Vec2(-0.08, 0.0);

  if (name == "case1_unperturbed") return s;
  if (name == "case2_lateral_perturbation") {
    Perturbation p;
    p.amplitude = 30.0;
    p.frequency = 1.0;
    p.axis = Vec3::UnitY();
    p.t_start = 2.0;
    p.t_end = 4.0;
    s.perturbations.push_back(p);
    return s;
  }
  if (name == "case3_io_only") {
    s.controller_mode = "io_only";
    return s;
  }
  std::string msg = "unknown scenario '" + name + "'; bundled scenarios are:";
  for (const std::string& n : bundled_scenario_names()) {
    msg += ' ';
    msg += n;
  }
  throw std::invalid_argument(msg);
}

}  // namespace drs
