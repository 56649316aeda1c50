// Experiment driver for the switching grasp controller.
//
//   vsgrasp experiment1 --scenario S --out DIR   single servoing trial,
//       logs tracked-feature paths and the pixel-error trace
//   vsgrasp experiment2 --scenario S --out DIR   Monte Carlo grasp campaign,
//       writes summary.json and per-trial logs
//   vsgrasp plot --log CSV --out DIR             re-render SVG plots from logs

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vsgrasp/logio.hpp"
#include "vsgrasp/random.hpp"
#include "vsgrasp/scenario.hpp"
#include "vsgrasp/sim.hpp"
#include "vsgrasp/svgplot.hpp"

namespace fs = std::filesystem;
using namespace vsgrasp;

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  return seeds;
}

/// First n seeds: the given list, then deterministic extensions of its head.
std::vector<std::uint64_t> expand_seeds(std::vector<std::uint64_t> seeds, size_t n) {
  const std::uint64_t base = seeds.empty() ? 1 : seeds.front();
  for (size_t i = seeds.size(); i < n; ++i) {
    seeds.push_back(mix_seed(base, 1000 + i));
  }
  seeds.resize(n);
  return seeds;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_experiment1(const std::string& scenario_path, const std::string& out_dir,
                    const std::string& seed_text, bool svg) {
  Scenario scn = load_scenario(scenario_path);
  scn.trial.record_tracks = true;
  const std::vector<std::uint64_t> seeds = parse_seed_list(seed_text);
  const std::uint64_t seed = seeds.empty() ? 1 : seeds.front();

  const TrialResult r = run_trial(scn, seed);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_controller_log(out / "error_log.csv", r.log);
  write_tracks_csv(out / "feature_tracks.csv", r.tracks);
  std::map<int, Pixel> goals;
  for (const auto& [id, px] : r.goal.goal_pixels) goals[id] = px;
  write_goals_csv(out / "predicted_goals.csv", goals);
  if (svg) {
    write_text(out / "error.svg", svg_error_plot(r.log, "mean feature error (px)"));
    write_text(out / "feature_paths.svg",
               svg_path_plot(r.tracks, goals, scn.camera.width, scn.camera.height,
                             "feature paths to predicted goals"));
  }
  std::cout << "trial seed=" << seed << " steps=" << r.steps << " cause=" << r.cause
            << " final_err_px=" << r.final_err_px << " captures=" << r.capture_count << "\n";
  if (r.cause == "MatchFailure") {
    std::cerr << "trial aborted: persistent match failure\n";
    return 1;
  }
  return 0;
}

int cmd_experiment2(const std::string& scenario_path, const std::string& out_dir, int trials,
                    const std::string& seed_text, bool svg) {
  const Scenario scn = load_scenario(scenario_path);
  const std::vector<std::uint64_t> seeds =
      expand_seeds(parse_seed_list(seed_text), static_cast<size_t>(trials));

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  const fs::path trial_dir = out / "trials";
  fs::create_directories(trial_dir);

  const TrialSink sink = [&](size_t i, const TrialResult& r) {
    std::ostringstream name;
    name << "trial_" << i << ".csv";
    write_controller_log(trial_dir / name.str(), r.log);
    if (svg && i == 0) {
      write_text(out / "trial_0_error.svg", svg_error_plot(r.log, "mean feature error (px)"));
    }
  };
  const CampaignSummary summary = run_campaign(scn, seeds, sink);
  write_summary_json(out / "summary.json", summary, fs::path(scenario_path).filename().string());

  std::cout << "campaign trials=" << summary.n_trials << " successes=" << summary.successes
            << " rate=" << summary.success_rate << "\n";
  for (const auto& [cause, count] : summary.causes) {
    std::cout << "  " << cause << ": " << count << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& log_path, const std::string& tracks_path,
             const std::string& goals_path, const std::string& out_dir, int image_w,
             int image_h) {
  const std::vector<LogRecord> log = read_controller_log(log_path);
  if (log.empty()) {
    std::cerr << "log " << log_path << " has no records\n";
    return 1;
  }
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_text(out / "error.svg", svg_error_plot(log, "mean feature error (px)"));
  if (!tracks_path.empty()) {
    const auto tracks = read_tracks_csv(tracks_path);
    std::map<int, Pixel> goals;
    if (!goals_path.empty()) goals = read_goals_csv(goals_path);
    write_text(out / "feature_paths.svg",
               svg_path_plot(tracks, goals, image_w, image_h,
                             "feature paths to predicted goals"));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"switching PBVS/IBVS grasp controller experiments"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::string seed_text;
  int trials = 20;
  bool svg = false;

  CLI::App* exp1 = app.add_subcommand("experiment1", "single trial, feature tracks and error log");
  exp1->add_option("--scenario", scenario_path, "scenario file")->required();
  exp1->add_option("--out", out_dir, "output directory");
  exp1->add_option("--seeds", seed_text, "comma-separated seeds (first is used)");
  exp1->add_flag("--svg", svg, "also write SVG plots");

  CLI::App* exp2 = app.add_subcommand("experiment2", "Monte Carlo grasp campaign");
  exp2->add_option("--scenario", scenario_path, "scenario file")->required();
  exp2->add_option("--out", out_dir, "output directory");
  exp2->add_option("--trials", trials, "number of trials");
  exp2->add_option("--seeds", seed_text, "comma-separated seeds, extended deterministically");
  exp2->add_flag("--svg", svg, "also write SVG plots");

  std::string log_path;
  std::string tracks_path;
  std::string goals_path;
  int image_w = 640;
  int image_h = 480;
  CLI::App* plot = app.add_subcommand("plot", "render SVG plots from saved logs");
  plot->add_option("--log", log_path, "controller log CSV")->required();
  plot->add_option("--tracks", tracks_path, "feature tracks CSV");
  plot->add_option("--goals", goals_path, "predicted goals CSV");
  plot->add_option("--out", out_dir, "output directory");
  plot->add_option("--image-w", image_w, "image width for the paths plot");
  plot->add_option("--image-h", image_h, "image height for the paths plot");

  CLI11_PARSE(app, argc, argv);

  try {
    if (exp1->parsed()) return cmd_experiment1(scenario_path, out_dir, seed_text, svg);
    if (exp2->parsed()) return cmd_experiment2(scenario_path, out_dir, trials, seed_text, svg);
    if (plot->parsed()) return cmd_plot(log_path, tracks_path, goals_path, out_dir, image_w, image_h);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
