// iaqmob: file-based pipeline from simulated or recorded RSSI/IAQ streams to
// trajectories, mobility statistics and air-quality correlation.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "iaqmob/iaqmob.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iaqmob;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// ---- staging -------------------------------------------------------------------

/// Collects outputs in a sibling directory and moves them into place only
/// when the whole command succeeded.
class Stage {
 public:
  explicit Stage(fs::path out) : out_(std::move(out)) {
    if (out_.empty()) throw Error("--out must not be empty");
    const auto parent = out_.has_parent_path() ? out_.parent_path() : fs::path(".");
    fs::create_directories(parent);
    staging_ = parent / ("." + out_.filename().string() + ".staging-" + std::to_string(::getpid()));
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  Stage(const Stage&) = delete;
  Stage& operator=(const Stage&) = delete;
  ~Stage() {
    std::error_code ec;
    if (!committed_) fs::remove_all(staging_, ec);
  }

  void write(const std::string& name, std::string_view content) {
    text::write_file((staging_ / name).string(), content);
    names_.push_back(name);
  }
  const std::vector<std::string>& names() const { return names_; }
  const fs::path& out() const { return out_; }

  void commit() {
    if (fs::exists(out_) && !fs::is_directory(out_)) {
      throw Error("output path exists and is not a directory: " + out_.string());
    }
    if (!fs::exists(out_)) {
      fs::rename(staging_, out_);
    } else {
      for (const auto& n : names_) fs::rename(staging_ / n, out_ / n);
      fs::remove_all(staging_);
    }
    committed_ = true;
  }

 private:
  fs::path out_;
  fs::path staging_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

template <class T>
std::vector<T> load_checked(LoadResult<T> r, const std::string& what) {
  if (r.skipped > 0) {
    std::cerr << "warning: skipped " << r.skipped << " malformed " << what << " line(s); first: "
              << r.first_error << "\n";
  }
  return std::move(r.records);
}

std::vector<Trajectory> filter_tags(std::vector<Trajectory> trajs, const std::string& prefix) {
  if (prefix.empty()) return trajs;
  std::vector<Trajectory> out;
  for (auto& t : trajs) {
    if (t.tag_id.rfind(prefix, 0) == 0) out.push_back(std::move(t));
  }
  return out;
}

// ---- subcommands ------------------------------------------------------------------
// Each command reads its fully resolved configuration from JSON so the same
// code path serves both fresh runs and manifest replays.

void run_simulate(const json& cfg, Stage& stage) {
  const auto sim = sim_config_from_json(cfg.at("sim"));
  const auto ds = simulate(sim);
  stage.write("deployment.json", to_json(ds.deployment).dump(2) + "\n");
  std::ostringstream rssi;
  write_rssi(rssi, ds.rssi);
  stage.write("rssi.jsonl", rssi.str());
  stage.write("iaq.csv", iaq_csv(ds.iaq));
  stage.write("truth.csv", truth_csv(ds.truth));
  std::cout << "simulated " << ds.rssi.size() << " RSSI observations, " << ds.iaq.size()
            << " IAQ readings, " << ds.truth.size() << " ground-truth intervals\n";
}

struct Labeled {
  Deployment deployment;
  std::vector<RssiObservation> rssi;
  std::vector<GroundTruthInterval> truth;
};

Labeled load_labeled(const json& cfg) {
  const bool strict = cfg.at("strict").get<bool>();
  Labeled l;
  l.deployment = load_deployment(cfg.at("deployment").get<std::string>());
  l.rssi = load_checked(load_rssi(cfg.at("rssi").get<std::string>(), strict), "RSSI");
  l.truth = load_truth(cfg.at("truth").get<std::string>());
  return l;
}

TrainConfig train_config(const json& cfg, ModelKind kind) {
  TrainConfig t;
  t.kind = kind;
  t.k = cfg.at("k").get<int>();
  t.svm.seed = cfg.at("seed").get<std::uint64_t>();
  return t;
}

ScenarioConfig scenario_config(const json& cfg) {
  ScenarioConfig s;
  s.scenario = parse_scenario(cfg.at("scenario").get<std::string>());
  s.train_fraction = cfg.at("train_fraction").get<double>();
  return s;
}

std::string eval_text(const ZoneModel& m, const EvalReport& r) {
  std::string s;
  s += "model " + to_string(m.kind) + "\n";
  s += "window_s " + text::format_double(m.windowing.delta_t_s) + "\n";
  s += "scenario " + m.info.scenario + "\n";
  s += "train_samples " + std::to_string(m.info.train_samples) + "\n";
  s += "test_samples " + std::to_string(m.info.test_samples) + "\n";
  s += "correct " + std::to_string(r.correct) + "\n";
  s += "accuracy " + text::fixed(r.accuracy, 4) + "\n";
  return s;
}

void run_train(const json& cfg, Stage& stage) {
  const auto in = load_labeled(cfg);
  WindowingConfig w;
  w.delta_t_s = cfg.at("window_s").get<double>();
  w.validate();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto gateways = in.deployment.gateway_order();
  auto seg = segment(in.rssi, w, gateways);
  auto labeled = labeled_only(label_samples(std::move(seg.samples), in.truth));
  const auto scfg = scenario_config(cfg);
  auto parts = select_scenario(labeled, scfg, seed);
  for (const auto& warn : parts.warnings) std::cerr << "warning: " << warn << "\n";
  auto model = train(parts.train, train_config(cfg, parse_model_kind(cfg.at("model").get<std::string>())),
                     w, gateways);
  model.info.test_samples = parts.test.size();
  model.info.split_seed = seed;
  model.info.scenario = to_string(scfg.scenario);
  const auto report = evaluate(model, parts.test);

  stage.write("model.json", model_to_json(model).dump(2) + "\n");
  stage.write("eval.txt", eval_text(model, report));
  stage.write("confusion.csv", confusion_csv(report));
  stage.write("features.csv", features_csv(labeled, gateways));
  std::cout << to_string(model.kind) << " accuracy " << text::fixed(report.accuracy, 4) << " on "
            << report.total << " test windows\n";
}

void run_sweep(const json& cfg, Stage& stage) {
  const auto in = load_labeled(cfg);
  SweepConfig sc;
  sc.windows_s = cfg.at("windows").get<std::vector<double>>();
  sc.kinds.clear();
  for (const auto& m : cfg.at("models").get<std::vector<std::string>>()) sc.kinds.push_back(parse_model_kind(m));
  sc.scenario = scenario_config(cfg);
  sc.seed = cfg.at("seed").get<std::uint64_t>();
  sc.train = train_config(cfg, ModelKind::knn);
  for (double w : sc.windows_s) {
    WindowingConfig wc;
    wc.delta_t_s = w;
    wc.validate();
  }
  const auto r = sweep(in.rssi, in.truth, in.deployment, sc);

  std::string table = "window_s  model    accuracy\n";
  for (const auto& c : r.cells) {
    std::string line = text::format_double(c.window_s);
    line.resize(10, ' ');
    line += to_string(c.kind);
    line.resize(19, ' ');
    line += text::fixed(c.accuracy, 4);
    table += line + "\n";
  }
  const auto& best = r.cells[r.best];
  table += "best " + to_string(best.kind) + " " + text::format_double(best.window_s) + " s accuracy " +
           text::fixed(best.accuracy, 4) + "\n";
  stage.write("sweep.csv", sweep_csv(r));
  stage.write("sweep.txt", table);
  stage.write("best_model.json", model_to_json(r.best_model).dump(2) + "\n");
  std::cout << table;
}

void run_infer(const json& cfg, Stage& stage) {
  const auto model = load_model(cfg.at("model_file").get<std::string>());
  const auto deployment = load_deployment(cfg.at("deployment").get<std::string>());
  const auto rssi = load_checked(load_rssi(cfg.at("rssi").get<std::string>(), cfg.at("strict").get<bool>()), "RSSI");
  InferOptions opt;
  opt.smoothing_window = cfg.at("smoothing").get<int>();
  if (opt.smoothing_window < 1 || opt.smoothing_window % 2 == 0) {
    throw Error("--smoothing must be an odd width >= 1");
  }
  const auto r = infer(model, rssi, deployment, opt);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::size_t steps = 0;
  for (const auto& t : r.trajectories) steps += t.steps.size();
  stage.write("trajectories.csv", trajectories_csv(r.trajectories));
  std::string summary = "tags " + std::to_string(r.trajectories.size()) + "\nsteps " + std::to_string(steps) +
                        "\ndropped_windows " + std::to_string(r.dropped_windows) +
                        "\nignored_observations " + std::to_string(r.ignored_observations) + "\n";
  for (const auto& w : r.warnings) summary += "warning " + w + "\n";
  stage.write("infer.txt", summary);
  std::cout << "inferred " << steps << " steps for " << r.trajectories.size() << " tags\n";
}

HourlyOptions hourly_options(const json& cfg) {
  HourlyOptions h;
  h.tz_offset_ms = static_cast<Millis>(std::llround(cfg.at("tz_offset_h").get<double>() * kMillisPerHour));
  h.gap_tolerance = cfg.at("gap_tolerance").get<int>();
  h.min_visit_len = cfg.at("min_visit_len").get<int>();
  return h;
}

void run_stats(const json& cfg, Stage& stage) {
  const auto trajs = filter_tags(load_trajectories(cfg.at("trajectories").get<std::string>()),
                                 cfg.at("tag_prefix").get<std::string>());
  const auto h = hourly_options(cfg);
  const auto zones = zones_in(trajs);
  const auto occ = occupancy(trajs);
  const auto vis = visits(trajs, h.gap_tolerance, h.min_visit_len);
  std::string hourly = "bucket_start_ms,zone,entries,presence\n";
  for (auto z : zones) {
    for (const auto& b : hourly_visit_counts(trajs, z, h)) {
      hourly += std::to_string(b.start) + "," + std::to_string(z.index) + "," + std::to_string(b.entries) +
                "," + std::to_string(b.presence) + "\n";
    }
  }
  stage.write("occupancy.csv", occupancy_csv(occ, zones));
  stage.write("visits.csv", visits_csv(vis, zones));
  stage.write("hourly.csv", hourly);
  if (cfg.at("svg").get<bool>()) {
    std::vector<svg::Bar> occ_bars, visit_bars;
    for (auto z : zones) {
      occ_bars.push_back({std::to_string(z.index), occ.rate(z)});
      const auto it = vis.counts.find(z);
      visit_bars.push_back({std::to_string(z.index), it == vis.counts.end() ? 0.0 : static_cast<double>(it->second)});
    }
    stage.write("occupancy.svg", svg::bar_chart("Occupancy rate by zone", "rate", occ_bars));
    stage.write("visits.svg", svg::bar_chart("Visits by zone", "visits", visit_bars));
  }
  std::cout << "stats for " << occ.per_tag.size() << " tags over " << zones.size() << " zones, "
            << vis.visits.size() << " visits\n";
}

void run_correlate(const json& cfg, Stage& stage) {
  const auto trajs = filter_tags(load_trajectories(cfg.at("trajectories").get<std::string>()),
                                 cfg.at("tag_prefix").get<std::string>());
  const auto deployment = load_deployment(cfg.at("deployment").get<std::string>());
  const auto iaq = load_checked(load_iaq(cfg.at("iaq").get<std::string>(), cfg.at("strict").get<bool>()), "IAQ");
  const auto h = hourly_options(cfg);

  CorrelationConfig cc;
  cc.max_lag = cfg.at("max_lag").get<int>();
  cc.busy.start_hour = cfg.at("busy_start").get<int>();
  cc.busy.end_hour = cfg.at("busy_end").get<int>();
  cc.busy.tz_offset_ms = h.tz_offset_ms;
  cc.permutations = cfg.at("permutations").get<int>();
  cc.seed = cfg.at("seed").get<std::uint64_t>();
  cc.spearman = cfg.at("spearman").get<bool>();
  if (cc.max_lag < 0) throw Error("--max-lag must be >= 0");
  if (cc.permutations < 1) throw Error("--permutations must be >= 1");

  std::vector<ZoneId> zones;
  for (int z : cfg.at("zones").get<std::vector<int>>()) {
    deployment.zone(ZoneId{z});
    zones.push_back(ZoneId{z});
  }
  if (zones.empty()) {
    std::set<ZoneId> with_sensor;
    for (const auto& s : deployment.iaq_sensors) {
      if (auto z = zone_of_sensor(deployment, s)) with_sensor.insert(*z);
    }
    zones.assign(with_sensor.begin(), with_sensor.end());
  }
  if (zones.empty()) throw Error("no zone has an IAQ sensor; pass --zone explicitly");

  AlignOptions ao{h.bucket_ms, h.tz_offset_ms};
  CorrelationReport report;
  std::vector<AlignedSeries> aligned;
  for (auto z : zones) {
    const auto hv = hourly_visit_counts(trajs, z, h);
    aligned.push_back(align(iaq, hv, deployment, z, ao));
    correlate_zone(aligned.back(), cc, report);
  }
  stage.write("correlation.csv", correlation_csv(report));
  stage.write("correlation.txt", correlation_text(report));
  stage.write("aligned.csv", aligned_csv(aligned));
  if (cfg.at("svg").get<bool>()) {
    for (const auto& a : aligned) {
      if (a.buckets.empty()) continue;
      std::vector<std::string> labels;
      for (const auto& b : a.buckets) {
        const Millis local = b.start + h.tz_offset_ms;
        labels.push_back(std::to_string((local - floor_div(local, kMillisPerDay) * kMillisPerDay) / kMillisPerHour) + "h");
      }
      svg::Series v{"visits", a.visit_counts()};
      svg::Series c{"CO2 ppm", a.values(Pollutant::co2)};
      stage.write("zone_" + std::to_string(a.zone.index) + ".svg",
                  svg::dual_line_chart("Zone " + std::to_string(a.zone.index) + ": visits vs CO2", labels, v, c));
    }
  }
  std::cout << correlation_text(report);
}

// ---- dispatch ------------------------------------------------------------------------

using Runner = void (*)(const json&, Stage&);

Runner runner_for(const std::string& sub) {
  if (sub == "simulate") return run_simulate;
  if (sub == "train") return run_train;
  if (sub == "sweep") return run_sweep;
  if (sub == "infer") return run_infer;
  if (sub == "stats") return run_stats;
  if (sub == "correlate") return run_correlate;
  throw Error("unknown subcommand in manifest: " + sub);
}

const std::vector<std::string> kInputKeys = {"rssi", "truth", "deployment", "model_file", "trajectories", "iaq", "config"};

void execute(const std::string& sub, const json& cfg, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Stage stage(out);
  runner_for(sub)(cfg, stage);
  json inputs = json::object();
  for (const auto& k : kInputKeys) {
    if (cfg.contains(k) && cfg.at(k).is_string()) inputs[k] = cfg.at(k);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json seed = nullptr;
  if (cfg.contains("seed")) seed = cfg.at("seed");
  if (cfg.contains("sim")) seed = cfg.at("sim").at("seed");
  json manifest = {{"tool", "iaqmob"},
                   {"version", kVersion},
                   {"subcommand", sub},
                   {"config", cfg},
                   {"inputs", inputs},
                   {"outputs", stage.names()},
                   {"seed", seed},
                   {"wall_time_s", wall}};
  stage.write("manifest.json", manifest.dump(2) + "\n");
  stage.commit();
  std::cout << "wrote " << stage.names().size() << " files to " << stage.out().string() << "\n";
}

struct Common {
  std::uint64_t seed = 42;
  bool strict = false;
  double window_s = 20.0;
  std::string model = "knn";
  std::string scenario = "mixed";
  std::string out;
};

int run(int argc, char** argv) {
  CLI::App app{"Indoor mobility and air-quality pipeline"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"knn", "logreg", "linsvm"};
  const std::vector<std::string> scenarios = {"carried", "stationary", "mixed"};

  Common c;
  std::string config_path, rssi, truth, deployment, model_path, trajectories, iaq, manifest_path, tag_prefix;
  std::optional<std::uint64_t> seed_override;
  int k = 5, smoothing = 1, gap_tolerance = 1, min_visit_len = 1, max_lag = 3, permutations = 10000;
  int busy_start = 8, busy_end = 18;
  double train_fraction = 0.8, tz_offset_h = 0.0;
  std::vector<double> windows = {10.0, 20.0, 30.0};
  std::vector<std::string> models = kinds;
  std::vector<int> zones;
  bool want_svg = false, spearman = false;

  auto add_out = [&](CLI::App* s) { s->add_option("--out", c.out, "Output directory")->required(); };
  auto add_labeled_inputs = [&](CLI::App* s) {
    s->add_option("--rssi", rssi, "RSSI JSON-lines file")->required();
    s->add_option("--truth", truth, "Ground-truth intervals CSV")->required();
    s->add_option("--deployment", deployment, "Deployment JSON")->required();
    s->add_option("--scenario", c.scenario, "carried | stationary | mixed")
        ->check(CLI::IsMember(scenarios))->capture_default_str();
    s->add_option("--seed", c.seed, "Split and training seed")->capture_default_str();
    s->add_option("--k", k, "Neighbours for knn")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--train-fraction", train_fraction, "Carried-tag training share")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_flag("--strict", c.strict, "Abort on the first malformed input line");
    add_out(s);
  };
  auto add_mobility = [&](CLI::App* s) {
    s->add_option("--trajectories", trajectories, "Trajectories CSV")->required();
    s->add_option("--tag-prefix", tag_prefix, "Only use tags whose id starts with this prefix");
    s->add_option("--gap-tolerance", gap_tolerance, "Missing windows tolerated inside a visit")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--min-visit-len", min_visit_len, "Shortest visit in steps")
        ->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--tz-offset-h", tz_offset_h, "Local time offset from UTC in hours")->capture_default_str();
    s->add_flag("--svg", want_svg, "Also write SVG charts");
    add_out(s);
  };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--config", config_path, "Simulation config JSON (defaults when omitted)");
  sim->add_option("--seed", seed_override, "Override the config seed");
  add_out(sim);

  auto* tr = app.add_subcommand("train", "Train and evaluate one zone classifier");
  add_labeled_inputs(tr);
  tr->add_option("--window", c.window_s, "Window length in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--model", c.model, "knn | logreg | linsvm")->check(CLI::IsMember(kinds))->capture_default_str();

  auto* sw = app.add_subcommand("sweep", "Accuracy grid over windows and models");
  add_labeled_inputs(sw);
  sw->add_option("--windows", windows, "Window lengths in seconds")->delimiter(',')->check(CLI::PositiveNumber);
  sw->add_option("--models", models, "Model kinds")->delimiter(',')->check(CLI::IsMember(kinds));

  auto* inf = app.add_subcommand("infer", "Reconstruct trajectories with a trained model");
  inf->add_option("--model", model_path, "Model JSON")->required();
  inf->add_option("--rssi", rssi, "RSSI JSON-lines file")->required();
  inf->add_option("--deployment", deployment, "Deployment JSON")->required();
  inf->add_option("--smoothing", smoothing, "Odd majority-filter width, 1 = off")->capture_default_str();
  inf->add_flag("--strict", c.strict, "Abort on the first malformed input line");
  add_out(inf);

  auto* st = app.add_subcommand("stats", "Occupancy and visit statistics");
  add_mobility(st);

  auto* co = app.add_subcommand("correlate", "Visits versus air quality per zone");
  add_mobility(co);
  co->add_option("--iaq", iaq, "IAQ CSV")->required();
  co->add_option("--deployment", deployment, "Deployment JSON")->required();
  co->add_option("--zone", zones, "Zones to analyse (default: zones containing a sensor)");
  co->add_option("--busy-start", busy_start, "First busy hour")->check(CLI::Range(0, 23))->capture_default_str();
  co->add_option("--busy-end", busy_end, "End of busy hours (exclusive)")->check(CLI::Range(1, 24))->capture_default_str();
  co->add_option("--max-lag", max_lag, "Largest lag in buckets")->capture_default_str();
  co->add_option("--permutations", permutations, "Permutations for the busy-hours test")->capture_default_str();
  co->add_option("--seed", c.seed, "Permutation seed")->capture_default_str();
  co->add_flag("--spearman", spearman, "Also report rank correlation");
  co->add_flag("--strict", c.strict, "Abort on the first malformed input line");

  auto* rp = app.add_subcommand("replay", "Re-run a command from its manifest");
  rp->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  add_out(rp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (busy_start >= busy_end) {
    std::cerr << "usage error: --busy-start must be before --busy-end\n";
    return kExitUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  json cfg;
  if (name == "replay") {
    json m;
    try {
      m = json::parse(text::read_file(manifest_path));
      const auto replayed = m.at("subcommand").get<std::string>();
      execute(replayed, m.at("config"), c.out);
    } catch (const json::exception& e) {
      throw Error("invalid manifest " + manifest_path + ": " + e.what());
    }
    return 0;
  }
  if (name == "simulate") {
    SimConfig s = config_path.empty() ? SimConfig{} : load_sim_config(config_path);
    if (seed_override) s.seed = *seed_override;
    s.validate();
    cfg = {{"sim", to_json(s)}};
    if (!config_path.empty()) cfg["config"] = absolute(config_path);
  } else if (name == "train" || name == "sweep") {
    cfg = {{"rssi", absolute(rssi)},
           {"truth", absolute(truth)},
           {"deployment", absolute(deployment)},
           {"scenario", c.scenario},
           {"seed", c.seed},
           {"k", k},
           {"train_fraction", train_fraction},
           {"strict", c.strict}};
    if (name == "train") {
      cfg["window_s"] = c.window_s;
      cfg["model"] = c.model;
    } else {
      cfg["windows"] = windows;
      cfg["models"] = models;
    }
  } else if (name == "infer") {
    cfg = {{"model_file", absolute(model_path)},
           {"rssi", absolute(rssi)},
           {"deployment", absolute(deployment)},
           {"smoothing", smoothing},
           {"strict", c.strict}};
  } else {
    cfg = {{"trajectories", absolute(trajectories)},
           {"tag_prefix", tag_prefix},
           {"gap_tolerance", gap_tolerance},
           {"min_visit_len", min_visit_len},
           {"tz_offset_h", tz_offset_h},
           {"svg", want_svg}};
    if (name == "correlate") {
      cfg["iaq"] = absolute(iaq);
      cfg["deployment"] = absolute(deployment);
      cfg["zones"] = zones;
      cfg["busy_start"] = busy_start;
      cfg["busy_end"] = busy_end;
      cfg["max_lag"] = max_lag;
      cfg["permutations"] = permutations;
      cfg["seed"] = c.seed;
      cfg["spearman"] = spearman;
      cfg["strict"] = c.strict;
    }
  }
  execute(name, cfg, c.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return kExitRuntime;
  }
}
