#include "drs/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "drs/geometry.hpp"

namespace drs {

namespace {

void append_double(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

double parse_double(const std::string& tok, const std::string& path, int line) {
  double value = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw std::runtime_error(path + ":" + std::to_string(line) +
                             ": bad number '" + tok + "'");
  }
  return value;
}

int parse_int(const std::string& tok, const std::string& path, int line) {
  int value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw std::runtime_error(path + ":" + std::to_string(line) +
                             ": bad integer '" + tok + "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void append_block(std::string& header, const char* name, int count) {
  for (int i = 0; i < count; ++i) {
    header += ',';
    header += name;
    header += '[';
    header += std::to_string(i);
    header += ']';
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

const char* event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::kTouchdown:
      return "touchdown";
    case EventKind::kLiftoff:
      return "liftoff";
    case EventKind::kControllerFailure:
      return "controller_failure";
    case EventKind::kFallback:
      return "fallback_triggered";
  }
  return "unknown";
}

std::string trace_header() {
  std::string h = "t";
  append_block(h, "q", kNumQ);
  append_block(h, "qd", kNumQ);
  append_block(h, "u", kNumJoints);
  append_block(h, "Ff", kNumContactRows);
  append_block(h, "lambda", kNumContactRows);
  append_block(h, "y", kNumContactRows);
  h += ",surface_pitch,phi,event,qp_status,solve_ms";
  append_block(h, "v", kNumContactRows);
  h += ",margin_friction,margin_normal,margin_torque,fallbacks,pin_err,"
       "accel_ratio,swing,target_x,target_y,cap_x,cap_y,cap_exists";
  return h;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << trace_header() << '\n';
  std::string line;
  for (const TraceRow& r : rows) {
    line.clear();
    append_double(line, r.t);
    auto push_vec = [&line](const auto& v) {
      for (int i = 0; i < v.size(); ++i) {
        line += ',';
        append_double(line, v(i));
      }
    };
    push_vec(r.q);
    push_vec(r.qd);
    push_vec(r.u);
    push_vec(r.ff);
    push_vec(r.lambda);
    push_vec(r.y);
    line += ',';
    append_double(line, r.surface_pitch);
    line += ',';
    append_double(line, r.phi);
    line += ',' + std::to_string(r.event);
    line += ',' + std::to_string(r.qp_status);
    line += ',';
    append_double(line, r.solve_ms);
    push_vec(r.v);
    line += ',';
    append_double(line, r.margin_friction);
    line += ',';
    append_double(line, r.margin_normal);
    line += ',';
    append_double(line, r.margin_torque);
    line += ',' + std::to_string(r.fallbacks);
    line += ',';
    append_double(line, r.pin_err);
    line += ',';
    append_double(line, r.accel_ratio);
    line += ',' + std::to_string(r.swing);
    line += ',';
    append_double(line, r.target_x);
    line += ',';
    append_double(line, r.target_y);
    line += ',';
    append_double(line, r.cap_x);
    line += ',';
    append_double(line, r.cap_y);
    line += ',' + std::to_string(r.cap_exists);
    out << line << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line == trace_header() + "\r") line.pop_back();
  if (line != trace_header())
    throw std::runtime_error(path + ": unexpected header");

  std::vector<TraceRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> tok = split_csv(line);
    const size_t expected = 1 + kNumQ * 2 + kNumJoints + kNumContactRows * 4 +
                            5 + 3 + 1 + 3 + 5;
    if (tok.size() != expected) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(expected) +
                               " fields, got " + std::to_string(tok.size()));
    }
    TraceRow r;
    size_t k = 0;
    auto next = [&]() -> const std::string& { return tok[k++]; };
    auto next_d = [&]() { return parse_double(next(), path, line_no); };
    auto next_i = [&]() { return parse_int(next(), path, line_no); };
    r.t = next_d();
    for (int i = 0; i < kNumQ; ++i) r.q(i) = next_d();
    for (int i = 0; i < kNumQ; ++i) r.qd(i) = next_d();
    for (int i = 0; i < kNumJoints; ++i) r.u(i) = next_d();
    for (int i = 0; i < kNumContactRows; ++i) r.ff(i) = next_d();
    for (int i = 0; i < kNumContactRows; ++i) r.lambda(i) = next_d();
    for (int i = 0; i < kNumContactRows; ++i) r.y(i) = next_d();
    r.surface_pitch = next_d();
    r.phi = next_d();
    r.event = next_i();
    r.qp_status = next_i();
    r.solve_ms = next_d();
    for (int i = 0; i < kNumContactRows; ++i) r.v(i) = next_d();
    r.margin_friction = next_d();
    r.margin_normal = next_d();
    r.margin_torque = next_d();
    r.fallbacks = next_i();
    r.pin_err = next_d();
    r.accel_ratio = next_d();
    r.swing = next_i();
    r.target_x = next_d();
    r.target_y = next_d();
    r.cap_x = next_d();
    r.cap_y = next_d();
    r.cap_exists = next_i();
    rows.push_back(r);
  }
  return rows;
}

void write_events_csv(const std::string& path,
                      const std::vector<EventRecord>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,kind,foot,phi\n";
  std::string line;
  for (const EventRecord& e : events) {
    line.clear();
    append_double(line, e.t);
    line += ',';
    line += event_kind_name(e.kind);
    line += ',';
    line += foot_name(e.foot);
    line += ',';
    append_double(line, e.phi);
    out << line << '\n';
  }
}

std::vector<EventRecord> read_events_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::vector<EventRecord> events;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> tok = split_csv(line);
    if (tok.size() != 4) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 4 fields");
    }
    EventRecord e;
    e.t = parse_double(tok[0], path, line_no);
    bool kind_found = false;
    for (EventKind k : {EventKind::kTouchdown, EventKind::kLiftoff,
                        EventKind::kControllerFailure, EventKind::kFallback}) {
      if (tok[1] == event_kind_name(k)) {
        e.kind = k;
        kind_found = true;
        break;
      }
    }
    if (!kind_found) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown event kind '" + tok[1] + "'");
    }
    bool found = false;
    for (FootId f : kAllFeet) {
      if (tok[2] == foot_name(f)) {
        e.foot = f;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown foot '" + tok[2] + "'");
    }
    e.phi = parse_double(tok[3], path, line_no);
    events.push_back(e);
  }
  return events;
}

RunReport make_report(const std::vector<TraceRow>& rows,
                      const std::string& outcome, double mu,
                      double cone_tolerance, const ReportWindows& windows) {
  RunReport rep;
  rep.outcome = outcome;
  rep.rows = static_cast<int>(rows.size());
  if (rows.empty()) return rep;
  rep.t_end = rows.back().t;

  Vec9 sum_sq = Vec9::Zero();
  std::vector<double> solve_times;
  solve_times.reserve(rows.size());
  rep.min_margin_friction = rows.front().margin_friction;
  rep.min_margin_normal = rows.front().margin_normal;
  rep.min_margin_torque = rows.front().margin_torque;

  double baseline_sum = 0.0;
  int baseline_count = 0;
  double force_err_sq = 0.0;
  double force_sq = 0.0;
  for (const TraceRow& r : rows) {
    for (int i = 0; i < kNumContactRows; ++i) {
      rep.max_abs_y(i) = std::max(rep.max_abs_y(i), std::abs(r.y(i)));
      sum_sq(i) += r.y(i) * r.y(i);
    }
    rep.max_abs_torque = std::max(rep.max_abs_torque, r.u.cwiseAbs().maxCoeff());
    rep.min_margin_friction = std::min(rep.min_margin_friction, r.margin_friction);
    rep.min_margin_normal = std::min(rep.min_margin_normal, r.margin_normal);
    rep.min_margin_torque = std::min(rep.min_margin_torque, r.margin_torque);
    rep.max_accel_ratio = std::max(rep.max_accel_ratio, r.accel_ratio);
    rep.max_pin_err = std::max(rep.max_pin_err, r.pin_err);
    solve_times.push_back(r.solve_ms);
    rep.total_solve_ms += r.solve_ms;
    if (r.t >= windows.baseline_start && r.t <= windows.baseline_end) {
      baseline_sum += r.q(1);
      ++baseline_count;
    }

    const Mat3 rs = rot_y(r.surface_pitch);
    int slot = 0;
    for (FootId f : kAllFeet) {
      if (static_cast<int>(f) == r.swing) continue;
      const Vec3 lam = r.lambda.segment<3>(3 * slot);
      const Vec3 lam_s = rs.transpose() * lam;
      const double tangent = std::hypot(lam_s.x(), lam_s.y());
      if (tangent > mu * lam_s.z() + cone_tolerance) {
        ++rep.cone_violations[static_cast<size_t>(f)];
      }
      const Vec3 cmd_world = rs * r.ff.segment<3>(3 * slot);
      force_err_sq += (lam - cmd_world).squaredNorm();
      force_sq += lam.squaredNorm();
      ++slot;
    }
  }
  rep.force_agreement_rms =
      force_sq > 0.0 ? std::sqrt(force_err_sq / force_sq) : 0.0;
  rep.rms_y = (sum_sq / static_cast<double>(rows.size())).cwiseSqrt();
  rep.fallback_total = rows.back().fallbacks;
  rep.median_solve_ms = median(std::move(solve_times));
  rep.baseline_lateral = baseline_count > 0
                             ? baseline_sum / baseline_count
                             : rows.front().q(1);

  double base_sq = 0.0;
  int base_n = 0;
  double rec_sq = 0.0;
  int rec_n = 0;
  for (const TraceRow& r : rows) {
    const double dev = r.q(1) - rep.baseline_lateral;
    if (r.t >= windows.baseline_start) {
      rep.peak_lateral_deviation =
          std::max(rep.peak_lateral_deviation, std::abs(dev));
    }
    if (r.t >= windows.baseline_start && r.t <= windows.baseline_end) {
      base_sq += dev * dev;
      ++base_n;
    }
    if (r.t >= windows.recovery_start && r.t <= windows.recovery_end) {
      rec_sq += dev * dev;
      ++rec_n;
    }
  }
  rep.baseline_rms = base_n > 0 ? std::sqrt(base_sq / base_n) : 0.0;
  rep.recovery_rms = rec_n > 0 ? std::sqrt(rec_sq / rec_n) : 0.0;
  return rep;
}

namespace {

nlohmann::json vec_to_json(const Vec9& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vec9 vec_from_json(const nlohmann::json& arr) {
  if (!arr.is_array() || arr.size() != kNumContactRows)
    throw std::runtime_error("expected an array of 9 numbers");
  Vec9 v;
  for (int i = 0; i < kNumContactRows; ++i) v(i) = arr[i].get<double>();
  return v;
}

}  // namespace

void write_report_json(const std::string& path, const RunReport& rep) {
  nlohmann::json j;
  j["outcome"] = rep.outcome;
  j["t_end"] = rep.t_end;
  j["rows"] = rep.rows;
  j["max_abs_y"] = vec_to_json(rep.max_abs_y);
  j["rms_y"] = vec_to_json(rep.rms_y);
  j["max_abs_torque"] = rep.max_abs_torque;
  j["min_margin_friction"] = rep.min_margin_friction;
  j["min_margin_normal"] = rep.min_margin_normal;
  j["min_margin_torque"] = rep.min_margin_torque;
  j["baseline_lateral"] = rep.baseline_lateral;
  j["peak_lateral_deviation"] = rep.peak_lateral_deviation;
  j["baseline_rms"] = rep.baseline_rms;
  j["recovery_rms"] = rep.recovery_rms;
  j["fallback_total"] = rep.fallback_total;
  j["median_solve_ms"] = rep.median_solve_ms;
  j["total_solve_ms"] = rep.total_solve_ms;
  j["max_accel_ratio"] = rep.max_accel_ratio;
  j["max_pin_err"] = rep.max_pin_err;
  j["force_agreement_rms"] = rep.force_agreement_rms;
  j["cone_violations"] = rep.cone_violations;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

RunReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  RunReport rep;
  rep.outcome = j.at("outcome").get<std::string>();
  rep.t_end = j.at("t_end").get<double>();
  rep.rows = j.at("rows").get<int>();
  rep.max_abs_y = vec_from_json(j.at("max_abs_y"));
  rep.rms_y = vec_from_json(j.at("rms_y"));
  rep.max_abs_torque = j.at("max_abs_torque").get<double>();
  rep.min_margin_friction = j.at("min_margin_friction").get<double>();
  rep.min_margin_normal = j.at("min_margin_normal").get<double>();
  rep.min_margin_torque = j.at("min_margin_torque").get<double>();
  rep.baseline_lateral = j.at("baseline_lateral").get<double>();
  rep.peak_lateral_deviation = j.at("peak_lateral_deviation").get<double>();
  rep.baseline_rms = j.at("baseline_rms").get<double>();
  rep.recovery_rms = j.at("recovery_rms").get<double>();
  rep.fallback_total = j.at("fallback_total").get<int>();
  rep.median_solve_ms = j.at("median_solve_ms").get<double>();
  rep.total_solve_ms = j.at("total_solve_ms").get<double>();
  rep.max_accel_ratio = j.at("max_accel_ratio").get<double>();
  rep.max_pin_err = j.at("max_pin_err").get<double>();
  rep.force_agreement_rms = j.at("force_agreement_rms").get<double>();
  const auto& cv = j.at("cone_violations");
  for (size_t i = 0; i < rep.cone_violations.size(); ++i)
    rep.cone_violations[i] = cv.at(i).get<int>();
  return rep;
}

}  // namespace drs
