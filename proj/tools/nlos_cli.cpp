// Command line front end: simulate scenarios, run the pipeline over stored or
// freshly generated frames, score results, render frames, and sweep seeds.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlos/nlos.hpp"

namespace {

using nlos::io::json;

bool log_enabled() {
  const char* v = std::getenv("NLOS_LOG");
  return v != nullptr && *v != '\0';
}

void logln(const std::string& msg) {
  if (log_enabled()) std::cerr << "[nlos] " << msg << '\n';
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

json parse_override_value(const std::string& raw) {
  json v = json::parse(raw, nullptr, false);
  if (v.is_discarded()) return json(raw);  // unquoted strings
  return v;
}

/// Applies one "dotted.path=value" override to a JSON document.
void apply_override(json& doc, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw nlos::ConfigError("override must be key=value: " + kv);
  std::string path = kv.substr(0, eq);
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (key.empty()) throw nlos::ConfigError("bad override key: " + kv);
    if (dot == std::string::npos) {
      (*node)[key] = parse_override_value(kv.substr(eq + 1));
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

nlos::sim::NoiseSpec noise_preset(const std::string& name) {
  if (name == "none") return {};
  if (name == "standard") {
    nlos::sim::NoiseSpec n;
    n.range_sigma = 0.05;
    n.angle_sigma_deg = 0.5;
    n.depth_sigma_rel = 0.03;
    n.static_clutter_rate = 2.0;
    n.dynamic_clutter_rate = 2.0;
    return n;
  }
  throw nlos::ConfigError("unknown noise preset '" + name + "' (none, standard)");
}

struct ScenarioArgs {
  std::string source;  // builtin name or JSON path
  std::string preset = "none";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& args, bool required) {
  auto* opt = cmd->add_option("--scenario", args.source,
                              "builtin name (SA, SB, SC) or scenario JSON path");
  if (required) opt->required();
  cmd->add_option("--noise-preset", args.preset, "noise preset: none or standard");
  cmd->add_option("--seed", args.seed, "override the scenario seed");
  cmd->add_option("--set", args.overrides,
                  "scenario override as dotted.key=value, repeatable");
}

bool is_builtin(const std::string& name) { return name == "SA" || name == "SB" || name == "SC"; }

nlos::sim::Scenario resolve_scenario(const ScenarioArgs& args) {
  json doc;
  if (is_builtin(args.source)) {
    doc = nlos::io::scenario_to_json(
        nlos::sim::builtin_scenario(args.source, {}, noise_preset(args.preset)));
  } else {
    doc = nlos::io::scenario_to_json(nlos::io::load_scenario(args.source));
    if (args.preset != "none") {
      const nlos::sim::NoiseSpec n = noise_preset(args.preset);
      doc["noise"] = {{"range_sigma", n.range_sigma},
                      {"angle_sigma_deg", n.angle_sigma_deg},
                      {"depth_sigma_rel", n.depth_sigma_rel},
                      {"static_clutter_rate", n.static_clutter_rate},
                      {"dynamic_clutter_rate", n.dynamic_clutter_rate},
                      {"dropout_prob", n.dropout_prob}};
    }
  }
  for (const auto& kv : args.overrides) apply_override(doc, kv);
  nlos::sim::Scenario s = nlos::io::scenario_from_json(doc);
  if (args.seed) s.seed = *args.seed;
  return s;
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "pipeline config JSON path");
  cmd->add_option("--param", args.overrides, "pipeline override as key=value, repeatable");
}

nlos::PipelineConfig resolve_config(const ConfigArgs& args) {
  json doc = json::object();
  if (!args.path.empty()) {
    auto in = std::ifstream(args.path);
    if (!in) throw nlos::IoError("cannot open for reading: " + args.path);
    std::ostringstream buf;
    buf << in.rdbuf();
    doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) throw nlos::IoError("malformed JSON in " + args.path);
  }
  for (const auto& kv : args.overrides) apply_override(doc, kv);
  return nlos::io::pipeline_config_from_json(doc);
}

std::vector<nlos::FrameResult> process_frames(const nlos::sim::Scenario& s,
                                              std::span<const nlos::sim::SimFrame> frames,
                                              const nlos::PipelineConfig& cfg) {
  nlos::Pipeline pipe(s.camera.intrinsics, s.camera.extrinsics(), s.ego_origin, cfg);
  std::vector<nlos::FrameResult> results;
  results.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    results.push_back(pipe.process(frames[i].radar, frames[i].depth, frames[i].mask));
    if (log_enabled())
      logln("frame " + std::to_string(i) + ": targets=" +
            std::to_string(results.back().targets.size()) +
            (results.back().layout_fixed ? " fixed" : ""));
  }
  return results;
}

int cmd_simulate(const ScenarioArgs& sargs, const std::string& out_dir) {
  Stopwatch clock;
  const nlos::sim::Scenario s = resolve_scenario(sargs);
  const auto frames = nlos::sim::simulate_all(s);
  nlos::io::write_run(s, frames, out_dir);
  std::size_t points = 0;
  for (const auto& f : frames) points += f.radar.points.size();
  std::cout << "simulated " << s.id << ": " << frames.size() << " frames, " << points
            << " radar points -> " << out_dir << " (" << clock.ms() << " ms)\n";
  return 0;
}

int cmd_run(const std::string& in_dir, const ScenarioArgs& sargs, const ConfigArgs& cargs,
            const std::string& out_path) {
  Stopwatch clock;
  const nlos::PipelineConfig cfg = resolve_config(cargs);
  nlos::sim::Scenario s;
  std::vector<nlos::FrameResult> results;
  if (!in_dir.empty()) {
    nlos::io::StoredRun run = nlos::io::read_run(in_dir);
    s = run.scenario;
    results = process_frames(s, run.frames, cfg);
  } else {
    s = resolve_scenario(sargs);
    nlos::Pipeline pipe(s.camera.intrinsics, s.camera.extrinsics(), s.ego_origin, cfg);
    for (int i = 0; i < s.frame_count(); ++i) {
      const auto frame = nlos::sim::generate_frame(s, i);
      results.push_back(pipe.process(frame.radar, frame.depth, frame.mask));
    }
  }
  nlos::io::write_results(results, s.id, out_path);
  int fixed_at = -1;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].layout_fixed) {
      fixed_at = static_cast<int>(i);
      break;
    }
  std::cout << "processed " << results.size() << " frames of " << s.id << " -> " << out_path
            << " (layout fixed at frame " << fixed_at << ", " << clock.ms() << " ms)\n";
  return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& results_path,
             const std::string& report_path, const std::string& csv_path) {
  Stopwatch clock;
  const nlos::io::StoredRun run = nlos::io::read_run(run_dir);
  const auto results = nlos::io::read_results(results_path);
  std::vector<nlos::sim::FrameTruth> truths;
  truths.reserve(run.frames.size());
  for (const auto& f : run.frames) truths.push_back(f.truth);
  const nlos::eval::RunEval ev = nlos::eval::evaluate_run(run.scenario, truths, results);
  if (!report_path.empty()) nlos::io::write_report(run.scenario.id, ev, report_path);
  if (!csv_path.empty()) nlos::io::write_matches_csv(ev, csv_path);
  std::cout << "evaluated " << run.scenario.id << ": accuracy=" << ev.accuracy
            << " mean_error=" << ev.mean_error << " layout_correct=" << std::boolalpha
            << ev.layout_correct << " (" << clock.ms() << " ms)\n";
  return 0;
}

int cmd_report(const std::string& run_dir, const std::string& results_path, int frame,
               const std::string& out_path) {
  const nlos::io::StoredRun run = nlos::io::read_run(run_dir);
  std::vector<nlos::FrameResult> results;
  if (!results_path.empty()) results = nlos::io::read_results(results_path);
  if (frame < 0 || frame >= static_cast<int>(run.frames.size()))
    throw nlos::ConfigError("frame " + std::to_string(frame) + " out of range (run has " +
                            std::to_string(run.frames.size()) + " frames)");
  const nlos::FrameResult* result = nullptr;
  if (!results.empty()) {
    if (results.size() != run.frames.size())
      throw nlos::ConfigError("result stream does not match the run length");
    result = &results[frame];
  }
  nlos::plot::write_scene_svg(run.scenario, &run.frames[frame], result, out_path);
  std::cout << "rendered frame " << frame << " of " << run.scenario.id << " -> " << out_path
            << '\n';
  return 0;
}

int cmd_sweep(const ScenarioArgs& sargs, const ConfigArgs& cargs, int seeds,
              const std::string& out_path) {
  Stopwatch clock;
  const nlos::PipelineConfig cfg = resolve_config(cargs);
  json per_seed = json::array();
  double acc_sum = 0, err_sum = 0, acc_min = 1.0;
  int layouts_ok = 0, windows = 0;
  for (int k = 0; k < seeds; ++k) {
    ScenarioArgs seeded = sargs;
    seeded.seed = (sargs.seed ? *sargs.seed : 1) + static_cast<std::uint64_t>(k);
    const nlos::sim::Scenario s = resolve_scenario(seeded);
    const nlos::eval::SimRun run = nlos::eval::run_simulated(s, cfg);
    const nlos::eval::RunEval ev = nlos::eval::evaluate_run(s, run.truths, run.results);
    acc_sum += ev.accuracy;
    err_sum += ev.mean_error;
    acc_min = std::min(acc_min, ev.accuracy);
    layouts_ok += ev.layout_correct ? 1 : 0;
    windows += ev.any_window ? 1 : 0;
    per_seed.push_back({{"seed", *seeded.seed},
                        {"accuracy", ev.accuracy},
                        {"mean_error", ev.mean_error},
                        {"layout_correct", ev.layout_correct}});
    logln("seed " + std::to_string(*seeded.seed) + ": accuracy=" + std::to_string(ev.accuracy));
  }
  const double n = std::max(1, seeds);
  std::cout << "sweep " << sargs.source << " seeds=" << seeds << ": accuracy mean=" << acc_sum / n
            << " min=" << acc_min << " mean_error=" << err_sum / n << " layout " << layouts_ok
            << "/" << seeds << " windows " << windows << "/" << seeds << " (" << clock.ms()
            << " ms)\n";
  if (!out_path.empty()) {
    json doc{{"schema", "nlos-sweep/1"},
             {"scenario", sargs.source},
             {"seeds", seeds},
             {"accuracy_mean", acc_sum / n},
             {"accuracy_min", acc_min},
             {"mean_error", err_sum / n},
             {"layouts_correct", layouts_ok},
             {"runs", per_seed}};
    std::ofstream out(out_path);
    if (!out) throw nlos::IoError("cannot open for writing: " + out_path);
    out << doc.dump(2) << '\n';
    if (!out) throw nlos::IoError("write failed: " + out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camera-assisted radar localization around occluding parked vehicles"};
  app.require_subcommand(1);

  ScenarioArgs sim_sargs;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a scenario and store it as a run");
  add_scenario_options(sim_cmd, sim_sargs, true);
  sim_cmd->add_option("--out", sim_out, "output run directory")->required();

  std::string run_in, run_out;
  ScenarioArgs run_sargs;
  ConfigArgs run_cargs;
  auto* run_cmd = app.add_subcommand("run", "process frames through the pipeline");
  run_cmd->add_option("--in", run_in, "stored run directory (from simulate)");
  add_scenario_options(run_cmd, run_sargs, false);
  add_config_options(run_cmd, run_cargs);
  run_cmd->add_option("--out", run_out, "output results JSONL")->required();

  std::string eval_run, eval_results, eval_report, eval_csv;
  auto* eval_cmd = app.add_subcommand("eval", "score results against stored ground truth");
  eval_cmd->add_option("--run", eval_run, "stored run directory")->required();
  eval_cmd->add_option("--results", eval_results, "results JSONL from run")->required();
  eval_cmd->add_option("--report", eval_report, "write a JSON report here");
  eval_cmd->add_option("--csv", eval_csv, "write per-frame matches CSV here");

  std::string rep_run, rep_results, rep_out;
  int rep_frame = 0;
  auto* rep_cmd = app.add_subcommand("report", "render one frame as SVG");
  rep_cmd->add_option("--run", rep_run, "stored run directory")->required();
  rep_cmd->add_option("--results", rep_results, "results JSONL (optional overlay)");
  rep_cmd->add_option("--frame", rep_frame, "frame index")->required();
  rep_cmd->add_option("--out", rep_out, "output SVG path")->required();

  ScenarioArgs sweep_sargs;
  ConfigArgs sweep_cargs;
  int sweep_seeds = 10;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "run many seeds in process and aggregate");
  add_scenario_options(sweep_cmd, sweep_sargs, true);
  add_config_options(sweep_cmd, sweep_cargs);
  sweep_cmd->add_option("--seeds", sweep_seeds, "number of consecutive seeds");
  sweep_cmd->add_option("--out", sweep_out, "write aggregate JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim_sargs, sim_out);
    if (run_cmd->parsed()) {
      if (run_in.empty() == run_sargs.source.empty())
        throw nlos::ConfigError("run needs exactly one of --in or --scenario");
      return cmd_run(run_in, run_sargs, run_cargs, run_out);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_run, eval_results, eval_report, eval_csv);
    if (rep_cmd->parsed()) return cmd_report(rep_run, rep_results, rep_frame, rep_out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_sargs, sweep_cargs, sweep_seeds, sweep_out);
  } catch (const nlos::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
