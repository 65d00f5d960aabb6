// fcobench: simulate FCO detections, analyze temporal potential, build BEV datasets,
// train the 2D CNN enhancer and evaluate enhancers.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fco/bev.hpp"
#include "fco/config.hpp"
#include "fco/detection.hpp"
#include "fco/enhancement.hpp"
#include "fco/metrics.hpp"
#include "fco/scenario.hpp"
#include "fco/temporal.hpp"
#include "fco/text.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

constexpr double kDeskRunSeconds = 600.0;
constexpr std::size_t kDeskRunsPerSplit = 2;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (auto field : fco::text::split(text, ',')) {
    try {
      out.push_back(fco::text::parse_double(field));
    } catch (const std::invalid_argument&) {
      throw fco::ConfigError(std::string("cannot parse ") + what + " list '" + text + "'");
    }
  }
  if (out.empty()) throw fco::ConfigError(std::string("empty ") + what + " list");
  return out;
}

std::vector<double> parse_penetrations(const std::string& text) {
  auto out = parse_list(text, "penetration");
  for (double p : out) {
    if (!(p >= 0.0 && p <= 1.0)) throw fco::ConfigError("penetrations must lie in [0, 1]");
  }
  return out;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

fs::path trajectory_path(const fs::path& dir, std::size_t k) {
  return dir / ("run_" + std::to_string(k) + ".trajectory.csv");
}
fs::path detections_path(const fs::path& dir, std::size_t k) {
  return dir / ("run_" + std::to_string(k) + ".detections.csv");
}
fs::path run_config_path(const fs::path& dir, std::size_t k) {
  return dir / ("run_" + std::to_string(k) + ".config.txt");
}

std::uint64_t fco_seed_for(const fco::ScenarioConfig& config) { return fco::derive_seed(config.seed, 7); }

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fco::IoError("cannot write " + path.string());
  out << content;
  if (!out) throw fco::IoError("write failed for " + path.string());
}

// ---- run-sim ---------------------------------------------------------------

struct RunSimOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> penetration;
  std::size_t count = 1;
  std::string profile;
};

int run_sim(const RunSimOptions& opt) {
  fco::BenchConfig cfg = fco::load_config(opt.config);
  std::size_t count = opt.count;
  if (opt.profile == "desk") {
    cfg.scenario.t_end = cfg.scenario.t_start + kDeskRunSeconds;
    count = std::max<std::size_t>(count, 3 * kDeskRunsPerSplit);
  }
  if (opt.seed) cfg.scenario.seed = *opt.seed;
  if (opt.penetration) cfg.scenario.penetration_rate = *opt.penetration;
  cfg.scenario.validate();
  cfg.sensors.validate();

  const fs::path out(opt.out);
  fs::create_directories(out);
  for (std::size_t k = 0; k < count; ++k) {
    fco::BenchConfig run_cfg = cfg;
    run_cfg.scenario.seed = cfg.scenario.seed + k;
    fco::Run run = fco::build_and_run(run_cfg.scenario);
    run = fco::assign_fcos(std::move(run), run_cfg.scenario.penetration_rate, fco_seed_for(run_cfg.scenario));
    const auto detections = fco::detect_run(run, run_cfg.sensors);

    fco::export_run(run, trajectory_path(out, k));
    fco::export_detections(detections, detections_path(out, k));
    write_text(run_config_path(out, k), fco::to_config_text(run_cfg));

    fco::IdSet vehicles;
    double sum_vt = 0.0;
    for (const auto& frame : run.frames) {
      for (const auto& v : frame.vehicles) vehicles.insert(v.id);
      sum_vt += static_cast<double>(fco::radius_filter(frame, run.config.center, run.config.radius).size());
    }
    const auto dist = fco::detectability_distribution(run, detections, run.config.center, run.config.radius);
    std::cout << "run " << k << " seed " << run_cfg.scenario.seed << ": vehicles " << vehicles.size()
              << ", mean |V_t| " << fixed(sum_vt / static_cast<double>(run.frames.size()), 2)
              << ", mean detectability " << fixed(dist.mean) << '\n';
  }
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeOptions {
  std::string traj;
  std::string config;
  std::string penetrations;
  std::string windows;
  std::string out;
  std::optional<std::uint64_t> seed;
};

// Config next to the trajectory (written by run-sim) unless one is given explicitly.
std::optional<fco::BenchConfig> config_for_trajectory(const AnalyzeOptions& opt) {
  if (!opt.config.empty()) return fco::load_config(opt.config);
  fs::path guess = opt.traj;
  const std::string name = guess.filename().string();
  const std::string suffix = ".trajectory.csv";
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    guess.replace_filename(name.substr(0, name.size() - suffix.size()) + ".config.txt");
    if (fs::exists(guess)) return fco::load_config(guess);
  }
  return std::nullopt;
}

// Without a config the time grid is inferred from the file and defaults fill the rest.
fco::Run load_trajectory(const AnalyzeOptions& opt, fco::BenchConfig& cfg) {
  if (auto found = config_for_trajectory(opt)) {
    cfg = *found;
    return fco::import_run(opt.traj, cfg.scenario);
  }
  fco::Run run = fco::import_run(opt.traj);
  cfg.scenario.t_start = run.config.t_start;
  cfg.scenario.t_end = run.config.t_end;
  cfg.scenario.dt = run.config.dt;
  run.config = cfg.scenario;
  return run;
}

int analyze_detectability(const AnalyzeOptions& opt) {
  const auto penetrations = parse_penetrations(opt.penetrations);
  fco::BenchConfig cfg;
  const fco::Run run = load_trajectory(opt, cfg);
  const std::uint64_t seed = opt.seed.value_or(fco_seed_for(cfg.scenario));
  const auto series = fco::detect_penetrations(run, penetrations, cfg.sensors, seed);
  std::vector<fco::DetectabilityDistribution> dists;
  for (const auto& s : series) {
    dists.push_back(fco::detectability_distribution(run, s, run.config.center, run.config.radius));
  }
  fco::write_distribution_csv(penetrations, dists, opt.out);
  std::cout << "penetration  mean |V_d,t|/|V_t|  timesteps\n";
  for (std::size_t i = 0; i < penetrations.size(); ++i) {
    std::cout << fixed(penetrations[i], 2) << "         " << fixed(dists[i].mean) << "              "
              << dists[i].ratios.size() << '\n';
  }
  return kExitOk;
}

int analyze_potential(const AnalyzeOptions& opt) {
  const auto penetrations = parse_penetrations(opt.penetrations);
  const auto windows = parse_list(opt.windows, "window");
  fco::BenchConfig cfg;
  const fco::Run run = load_trajectory(opt, cfg);
  const std::uint64_t seed = opt.seed.value_or(fco_seed_for(cfg.scenario));
  const auto series = fco::detect_penetrations(run, penetrations, cfg.sensors, seed);
  const auto grid = fco::potential_grid(run, series, penetrations, windows);
  fco::write_potential_csv(grid, opt.out);
  std::cout << "mean potential (|V_s,t| - |V_d,t|) / |V_t|; rows penetration, columns s\n      ";
  for (double s : windows) std::cout << "  s=" << fco::text::format_double(s);
  std::cout << '\n';
  for (std::size_t i = 0; i < penetrations.size(); ++i) {
    std::cout << fixed(penetrations[i], 2) << "  ";
    for (std::size_t j = 0; j < windows.size(); ++j) {
      std::cout << "  " << fixed(grid.mean_potential(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    std::cout << '\n';
  }
  return kExitOk;
}

// ---- make-dataset ----------------------------------------------------------

struct DatasetOptions {
  std::string runs;
  double s = 5.0;
  int grid = 512;
  std::string out;
  std::string split;
  std::string profile;
};

fco::SplitCounts parse_split(const std::string& text) {
  const auto values = parse_list(text, "split");
  if (values.size() != 3) throw fco::ConfigError("split must be train,val,test");
  fco::SplitCounts split;
  for (double v : values) {
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw fco::ConfigError("split counts must be non-negative integers");
    }
  }
  split.train = static_cast<std::size_t>(values[0]);
  split.val = static_cast<std::size_t>(values[1]);
  split.test = static_cast<std::size_t>(values[2]);
  return split;
}

int make_dataset(const DatasetOptions& opt) {
  int grid_px = opt.grid;
  fco::SplitCounts split;
  if (opt.profile == "desk") {
    grid_px = 64;
    split = {kDeskRunsPerSplit, kDeskRunsPerSplit, kDeskRunsPerSplit};
  }
  if (!opt.split.empty()) split = parse_split(opt.split);
  if (grid_px != 512 && grid_px != 64) throw fco::ConfigError("--grid must be 512 or 64");

  const fs::path dir(opt.runs);
  if (!fs::is_directory(dir)) throw fco::IoError("runs directory not found: " + dir.string());
  std::vector<fco::Run> runs;
  std::vector<fco::DetectionSeries> records;
  for (std::size_t k = 0; fs::exists(trajectory_path(dir, k)); ++k) {
    const auto cfg = fco::load_config(run_config_path(dir, k));
    runs.push_back(fco::import_run(trajectory_path(dir, k), cfg.scenario));
    records.push_back(fco::import_detections(detections_path(dir, k), cfg.scenario));
  }
  if (runs.empty()) throw fco::IoError("no run_<k>.trajectory.csv files in " + dir.string());
  const fco::GridSpec spec{grid_px, runs.front().config.center, runs.front().config.radius};
  fco::build_dataset(runs, records, opt.s, spec, opt.out, split);
  for (const char* name : {"train", "val", "test"}) {
    std::cout << name << ": " << fco::DatasetSplit::open(opt.out, name).size() << " samples\n";
  }
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainOptions {
  std::string data;
  std::string out;
  std::string split = "train";
  std::string loss_out;
  fco::TrainConfig config;
  int kernel = 5;
  std::size_t max_samples = 0;
};

int train(const TrainOptions& opt) {
  const auto split = fco::DatasetSplit::open(opt.data, opt.split);
  std::size_t count = split.size();
  if (opt.max_samples > 0) count = std::min(count, opt.max_samples);
  if (count == 0) throw fco::ConfigError("training split is empty");

  // Small data sets are cached; large ones stream from disk per batch.
  std::vector<fco::SequenceSample> cache;
  const auto px = static_cast<std::size_t>(split.info().spec.size_px);
  const std::size_t frames = fco::window_steps(split.info().s, split.info().dt);
  const bool cached = count * px * px * (frames + 1) <= (std::size_t{1} << 30);
  if (cached) {
    for (std::size_t i = 0; i < count; ++i) cache.push_back(split.load(i));
  }
  const std::function<fco::SequenceSample(std::size_t)> load = [&](std::size_t i) {
    return cached ? cache[i] : split.load(i);
  };

  const double rate = fco::positive_pixel_rate(count, load);
  auto init = fco::init_params(static_cast<int>(frames), opt.kernel, rate, opt.config.seed);
  const auto result = fco::train(count, load, opt.config, std::move(init));
  fco::write_params(result.params, opt.out);
  if (!opt.loss_out.empty()) fco::write_loss_history(result.epoch_loss, opt.loss_out);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::cout << "epoch " << e + 1 << " mean loss " << fixed(result.epoch_loss[e], 6) << '\n';
  }
  std::cout << "steps " << result.steps << ", params written to " << opt.out << '\n';
  return kExitOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateOptions {
  std::string data;
  std::string enhancer;
  std::string params;
  std::string out;
  std::string split = "test";
  double tau = fco::kDefaultTau;
  double theta = fco::kDefaultTheta;
};

fco::EnhancerKind enhancer_kind(const std::string& name) {
  if (name == "identity") return fco::EnhancerKind::Identity;
  if (name == "persistence") return fco::EnhancerKind::Persistence;
  if (name == "cv") return fco::EnhancerKind::ConstVelocity;
  if (name == "oracle") return fco::EnhancerKind::Oracle;
  if (name == "model") return fco::EnhancerKind::Model;
  throw fco::ConfigError("unknown enhancer '" + name + "'");
}

std::string mean_cell(const fco::MeanMetric& m) { return m.defined ? fixed(m.mean) : std::string("  n/a"); }

int evaluate(const EvaluateOptions& opt) {
  const auto kind = enhancer_kind(opt.enhancer);
  std::optional<fco::ModelParams> params;
  if (kind == fco::EnhancerKind::Model) {
    if (opt.params.empty()) throw fco::ConfigError("--enhancer model requires --params");
    params = fco::read_params(opt.params);
  }
  const auto enhancer = fco::make_enhancer(kind, params ? &*params : nullptr);
  const auto split = fco::DatasetSplit::open(opt.data, opt.split);
  const auto report = fco::evaluate_dataset(*enhancer, split, opt.tau, opt.theta);
  fco::write_metrics_csv(report.samples, opt.out);
  std::cout << "enhancer " << enhancer->name() << " on " << opt.split << " (" << report.samples.size()
            << " samples)\n"
            << "IoU    RVM    LVM    HPM\n"
            << mean_cell(report.iou) << "  " << mean_cell(report.rvm) << "  " << mean_cell(report.lvm) << "  "
            << mean_cell(report.hpm) << '\n'
            << "undefined: RVM/LVM " << report.rvm.undefined << ", HPM " << report.hpm.undefined << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floating car observer benchmark: simulation, temporal analysis, BEV datasets and enhancers"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.\n"
             "FCO_BENCH_THREADS caps the worker thread count.");

  RunSimOptions sim;
  auto* cmd_sim = app.add_subcommand("run-sim", "Simulate runs and write trajectories plus detections");
  cmd_sim->add_option("--config", sim.config, "Scenario/sensor config file (key = value)")->required();
  cmd_sim->add_option("--out", sim.out, "Output directory for run_<k>.{trajectory,detections}.csv")->required();
  cmd_sim->add_option("--seed", sim.seed, "Override the base seed; run k uses seed + k");
  cmd_sim->add_option("--penetration", sim.penetration, "Override the FCO penetration rate");
  cmd_sim->add_option("--count", sim.count, "Number of runs with consecutive seeds")->check(CLI::PositiveNumber);
  cmd_sim->add_option("--profile", sim.profile, "'desk': 600 s runs, at least 6 runs")->check(CLI::IsMember({"desk"}));

  AnalyzeOptions det;
  auto* cmd_det = app.add_subcommand("analyze-detectability", "Distribution of |V_d,t|/|V_t| per penetration");
  cmd_det->add_option("--traj", det.traj, "Trajectory CSV")->required();
  cmd_det->add_option("--config", det.config, "Config file (default: run_<k>.config.txt next to --traj)");
  cmd_det->add_option("--penetrations", det.penetrations, "Comma list, e.g. 0.1,0.5,1")->required();
  cmd_det->add_option("--seed", det.seed, "Base FCO seed; penetration i uses seed + i");
  cmd_det->add_option("--out", det.out, "CSV penetration,t,n_vt,n_vdt,ratio")->required();

  AnalyzeOptions pot;
  auto* cmd_pot = app.add_subcommand("analyze-potential", "Temporal enhancement potential grid");
  cmd_pot->add_option("--traj", pot.traj, "Trajectory CSV")->required();
  cmd_pot->add_option("--config", pot.config, "Config file (default: run_<k>.config.txt next to --traj)");
  cmd_pot->add_option("--penetrations", pot.penetrations, "Comma list, e.g. 0.1,0.5,1")->required();
  cmd_pot->add_option("--windows", pot.windows, "Comma list of window lengths s in seconds")->required();
  cmd_pot->add_option("--seed", pot.seed, "Base FCO seed; penetration i uses seed + i");
  cmd_pot->add_option("--out", pot.out, "CSV penetration,s,mean_potential,mean_absolute")->required();

  DatasetOptions ds;
  auto* cmd_ds = app.add_subcommand("make-dataset", "Build train/val/test BEV sequence samples from runs");
  cmd_ds->add_option("--runs", ds.runs, "Directory written by run-sim")->required();
  cmd_ds->add_option("--s", ds.s, "Window length in seconds")->required();
  cmd_ds->add_option("--grid", ds.grid, "Grid size in pixels: 512 or 64")->check(CLI::IsMember({512, 64}));
  cmd_ds->add_option("--split", ds.split, "Runs per split as train,val,test (default 8,1,1)");
  cmd_ds->add_option("--profile", ds.profile, "'desk': 64x64 grid, 2 runs per split")->check(CLI::IsMember({"desk"}));
  cmd_ds->add_option("--out", ds.out, "Dataset directory")->required();

  TrainOptions tr;
  auto* cmd_tr = app.add_subcommand("train", "Train the 2D CNN enhancer with weighted BCE");
  cmd_tr->add_option("--data", tr.data, "Dataset directory")->required();
  cmd_tr->add_option("--out", tr.out, "Params file to write")->required();
  cmd_tr->add_option("--split", tr.split, "Split to train on");
  cmd_tr->add_option("--epochs", tr.config.epochs, "Epochs (default 25)");
  cmd_tr->add_option("--lr", tr.config.learning_rate, "Learning rate (default 10)");
  cmd_tr->add_option("--batch", tr.config.batch_size, "Mini-batch size (default 8)");
  cmd_tr->add_option("--w-bce", tr.config.w_bce, "Positive-class weight (default 2)");
  cmd_tr->add_option("--seed", tr.config.seed, "Seed for init and shuffling");
  cmd_tr->add_option("--kernel", tr.kernel, "Odd kernel width K (default 5)");
  cmd_tr->add_option("--max-samples", tr.max_samples, "Use only the first N samples (0: all)");
  cmd_tr->add_option("--max-steps", tr.config.max_steps, "Stop after N gradient steps (0: no limit)");
  cmd_tr->add_option("--loss-out", tr.loss_out, "CSV epoch,mean_loss");

  EvaluateOptions ev;
  auto* cmd_ev = app.add_subcommand("evaluate", "Evaluate an enhancer on a dataset split");
  cmd_ev->add_option("--data", ev.data, "Dataset directory")->required();
  cmd_ev->add_option("--enhancer", ev.enhancer, "identity | persistence | cv | oracle | model")->required();
  cmd_ev->add_option("--params", ev.params, "Params file (required for model)");
  cmd_ev->add_option("--split", ev.split, "Split to evaluate (default test)");
  cmd_ev->add_option("--tau", ev.tau, "Binarization threshold (default 0.5)");
  cmd_ev->add_option("--theta", ev.theta, "Vehicle coverage threshold (default 0.5)");
  cmd_ev->add_option("--out", ev.out, "Per-sample metrics CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_sim) return run_sim(sim);
    if (*cmd_det) return analyze_detectability(det);
    if (*cmd_pot) return analyze_potential(pot);
    if (*cmd_ds) return make_dataset(ds);
    if (*cmd_tr) return train(tr);
    if (*cmd_ev) return evaluate(ev);
  } catch (const fco::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fco::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fco::WindowError& e) {
    std::cerr << "window error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fco::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fco::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
