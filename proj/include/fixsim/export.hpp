#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fixsim/engine.hpp"
#include "fixsim/errors.hpp"
#include "fixsim/procedure.hpp"
#include "fixsim/scenario.hpp"
#include "fixsim/trace.hpp"

namespace fixsim {

namespace detail {

inline void append_fixed(std::string& out, double v, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  out.append(buf, res.ptr);
}

inline void append_general(std::string& out, double v, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  out.append(buf, res.ptr);
}

}  // namespace detail

/// `t,<channel>` header then one `t,value` line per sample; LF endings,
/// no locale involvement.
inline std::string trace_csv(const Trace& trace) {
  std::string out = "t," + std::string(to_string(trace.channel)) + "\n";
  out.reserve(out.size() + trace.samples.size() * 24);
  for (const auto& s : trace.samples) {
    detail::append_fixed(out, s.t, 6);
    out.push_back(',');
    detail::append_general(out, s.value, 10);
    out.push_back('\n');
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) fail(ErrorCode::io_failure, "write to " + path.string() + " failed");
}

/// Writes one `<id>.csv` per registered trace into `dir`.
inline void export_traces(const TraceSet& traces, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorCode::io_failure, "cannot create directory " + dir.string());
  for (const auto& id : traces.ids()) write_file(dir / (id + ".csv"), trace_csv(traces.get(id)));
}

using ojson = nlohmann::ordered_json;

inline ojson step_json(const StepOutcome& s) {
  ojson j;
  j["step"] = std::string(to_string(s.step));
  j["arm"] = std::string(to_string(s.arm));
  j["point"] = s.point;
  j["start"] = s.start;
  j["duration"] = s.duration;
  j["status"] = s.ok ? "success" : "failure";
  if (s.error) {
    j["error"] = std::string(to_string(*s.error));
    j["message"] = s.message;
  }
  if (!s.substeps.empty()) j["substeps"] = s.substeps;
  ojson m = ojson::object();
  for (const auto& [k, v] : s.metrics) m[k] = v;
  j["metrics"] = std::move(m);
  return j;
}

inline ojson report_json(const FixationReport& r, const Scenario& scenario, std::uint64_t seed) {
  ojson j;
  j["scenario_hash"] = scenario_hash(scenario);
  j["seed"] = seed;
  j["success"] = r.success;
  j["total_duration"] = r.total_duration;
  j["step_duration_sum"] = r.step_sum();
  if (const auto* f = r.failure()) {
    j["failure"] = {{"step", std::string(to_string(f->step))},
                    {"point", f->point},
                    {"error", std::string(to_string(*f->error))},
                    {"message", f->message}};
  }
  ojson steps = ojson::array();
  for (const auto& s : r.steps) steps.push_back(step_json(s));
  j["steps"] = std::move(steps);
  ojson plan = ojson::array();
  for (const auto& a : r.plan.assignments)
    plan.push_back({{"point", a.point}, {"arm", std::string(to_string(a.arm))}, {"parallel", a.parallel}});
  j["plan"] = std::move(plan);
  j["part_state"] = to_string(r.part_state);
  j["fixed_points"] = r.fixed_points;
  ojson anchors = ojson::array();
  for (const auto& a : r.anchors)
    anchors.push_back({{"id", a.id}, {"hole", a.hole}, {"state", to_string(a.state)}, {"depth", a.depth}, {"torque", a.torque}});
  j["anchors"] = std::move(anchors);
  j["traces"] = r.trace_ids;
  return j;
}

inline ojson manifest_json(const FixationReport& r, const Scenario& scenario, std::uint64_t seed) {
  ojson j;
  j["scenario_hash"] = scenario_hash(scenario);
  j["seed"] = seed;
  j["dt"] = scenario.procedure.dt;
  ojson steps = ojson::array();
  for (const auto& s : r.steps)
    steps.push_back({{"step", std::string(to_string(s.step))},
                     {"arm", std::string(to_string(s.arm))},
                     {"point", s.point},
                     {"duration", s.duration},
                     {"status", s.ok ? "success" : "failure"}});
  j["steps"] = std::move(steps);
  j["total_duration"] = r.total_duration;
  j["traces"] = r.trace_ids;
  return j;
}

inline void export_run(const RunResult& result, const std::filesystem::path& dir) {
  export_traces(result.traces(), dir);
  write_file(dir / "manifest.json",
             manifest_json(result.report, result.world.scenario, result.world.seed).dump(2) + "\n");
}

inline std::string format_duration(double seconds) {
  const auto total = static_cast<long>(std::lround(seconds));
  std::ostringstream out;
  out << total / 60 << " min " << total % 60 << " s";
  return out.str();
}

inline std::string report_text(const FixationReport& r) {
  std::ostringstream out;
  out << (r.success ? "SUCCESS" : "FAILURE") << "  total " << format_duration(r.total_duration) << " ("
      << detail::format_double(std::round(r.total_duration * 100.0) / 100.0) << " s)\n";
  for (const auto& s : r.steps) {
    std::string line;
    line += "  [" + std::string(to_string(s.arm)) + " p" + std::to_string(s.point) + "] ";
    line += std::string(to_string(s.step));
    line.resize(std::max<std::size_t>(line.size(), 36), ' ');
    out << line;
    std::string dur;
    detail::append_fixed(dur, s.duration, 2);
    out << dur << " s  " << (s.ok ? "ok" : "FAILED");
    for (const auto& [k, v] : s.metrics) {
      std::string val;
      detail::append_general(val, v, 6);
      out << "  " << k << "=" << val;
    }
    out << '\n';
    if (!s.ok) out << "    " << s.message << '\n';
  }
  out << "  part: " << to_string(r.part_state) << ", fixed points " << r.fixed_points << '\n';
  return out.str();
}

}  // namespace fixsim
