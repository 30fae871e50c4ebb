// fixsim command-line front end.
//
//   fixsim run         --scenario FILE --seed N [--trace-out DIR] [--report text|json]
//   fixsim drill-test  [--variant NAME|all]
//   fixsim hammer-test [--hole-depth M] [--detection-offset M]
//   fixsim nut-test    [--no-anchor]
//   fixsim frame-test
//
// Exit codes: 0 success, 1 a step failed, 2 invalid input or I/O failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixsim/engine.hpp"
#include "fixsim/export.hpp"
#include "fixsim/scenario.hpp"

namespace {

using namespace fixsim;

constexpr int kExitOk = 0;
constexpr int kExitStepFailed = 1;
constexpr int kExitInvalid = 2;

struct Options {
  std::string scenario_path;
  std::uint64_t seed{1};
  std::string trace_out;
  std::string report{"text"};
  bool print_config{false};
  std::string variant;
  std::optional<double> hole_depth;
  double detection_offset{0.0};
  bool no_anchor{false};
};

Scenario load_scenario(const Options& opt) {
  if (opt.scenario_path.empty()) return Scenario{};
  std::ifstream in(opt.scenario_path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot read scenario " + opt.scenario_path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

struct Labelled {
  std::string label;
  RunResult result;
};

void emit(const Options& opt, const std::vector<Labelled>& runs) {
  const bool json = opt.report == "json" || opt.report == "machine-readable";
  if (json) {
    if (runs.size() == 1 && runs[0].label.empty()) {
      const auto& r = runs[0].result;
      std::cout << report_json(r.report, r.world.scenario, r.world.seed).dump(2) << '\n';
    } else {
      ojson all = ojson::object();
      for (const auto& [label, r] : runs) all[label] = report_json(r.report, r.world.scenario, r.world.seed);
      std::cout << all.dump(2) << '\n';
    }
  } else {
    for (const auto& [label, r] : runs) {
      if (!label.empty()) std::cout << "== " << label << '\n';
      std::cout << report_text(r.report);
    }
  }
  if (!opt.trace_out.empty()) {
    const std::filesystem::path root(opt.trace_out);
    for (const auto& [label, r] : runs) export_run(r, label.empty() ? root : root / label);
  }
}

int exit_code(const std::vector<Labelled>& runs) {
  for (const auto& l : runs)
    if (l.result.report.failure()) return kExitStepFailed;
  return kExitOk;
}

std::vector<Labelled> dispatch(const std::string& command, const Options& opt, Scenario scenario) {
  std::vector<Labelled> runs;
  if (command == "run") {
    runs.push_back({"", run(scenario, opt.seed)});
  } else if (command == "drill-test") {
    if (opt.variant == "all") {
      for (auto v : {DrillVariant::offset_uncompensated, DrillVariant::regular_spring,
                     DrillVariant::constant_load_spring}) {
        Scenario s = scenario;
        s.tools.drill.variant = v;
        runs.push_back({std::string(to_string(v)), drill_test(s, opt.seed)});
      }
    } else {
      if (!opt.variant.empty()) {
        const auto v = parse_drill_variant(opt.variant);
        if (!v) throw ScenarioError("tools.variant", 0, "unknown drill variant '" + opt.variant + "'");
        scenario.tools.drill.variant = *v;
      }
      runs.push_back({"", drill_test(scenario, opt.seed)});
    }
  } else if (command == "hammer-test") {
    runs.push_back({"", hammer_test(scenario, opt.seed, opt.detection_offset, {}, opt.hole_depth)});
  } else if (command == "nut-test") {
    runs.push_back({"", nut_test(scenario, opt.seed, !opt.no_anchor)});
  } else if (command == "frame-test") {
    runs.push_back({"", frame_test(scenario, opt.seed)});
  }
  return runs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-arm structural part fixation simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario_path, "Scenario file (sectioned key = value)");
    sub->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
    sub->add_option("--trace-out", opt.trace_out, "Directory for per-channel CSV traces and manifest.json");
    sub->add_option("--report", opt.report, "Report format")
        ->check(CLI::IsMember({"text", "json", "machine-readable"}))
        ->capture_default_str();
    sub->add_flag("--print-config", opt.print_config, "Print the effective scenario with documented defaults and exit");
  };

  auto* run_cmd = app.add_subcommand("run", "Full fixation procedure");
  auto* drill_cmd = app.add_subcommand("drill-test", "Hole drilling at the wall centre");
  auto* hammer_cmd = app.add_subcommand("hammer-test", "Anchor insertion and hammering into a drilled hole");
  auto* nut_cmd = app.add_subcommand("nut-test", "Nut fastening on a seated anchor");
  auto* frame_cmd = app.add_subcommand("frame-test", "Wall orientation estimation");
  for (auto* sub : {run_cmd, drill_cmd, hammer_cmd, nut_cmd, frame_cmd}) add_common(sub);
  drill_cmd->add_option("--variant", opt.variant,
                        "aligned_axis | offset_uncompensated | regular_spring | constant_load_spring | all");
  hammer_cmd->add_option("--hole-depth", opt.hole_depth, "Depth of the pre-drilled hole (m)");
  hammer_cmd->add_option("--detection-offset", opt.detection_offset, "Error of the hole detection along wall x (m)");
  nut_cmd->add_flag("--no-anchor", opt.no_anchor, "Leave the hole empty");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const Scenario scenario = load_scenario(opt);
    if (opt.print_config) {
      std::cout << render_scenario(scenario);
      return kExitOk;
    }
    const auto runs = dispatch(command, opt, scenario);
    emit(opt, runs);
    return exit_code(runs);
  } catch (const Error& e) {
    std::cerr << "fixsim: " << e.what() << '\n';
    return kExitInvalid;
  }
}
