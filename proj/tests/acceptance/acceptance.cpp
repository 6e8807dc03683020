// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iaqmob/iaqmob.hpp"
#include "../oracles.hpp"
#include "../support.hpp"

using namespace iaqmob;
namespace fs = std::filesystem;
using iaqmob::testing::run_command;
using iaqmob::testing::slurp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string rssi_text(std::span<const RssiObservation> obs) {
  std::ostringstream s;
  write_rssi(s, obs);
  return s.str();
}

// ---- shared datasets ----------------------------------------------------------------

const Dataset& noisy_office() {
  static const Dataset ds = simulate(SimConfig{});
  return ds;
}

const SweepResult& noisy_sweep() {
  static const SweepResult r = sweep(noisy_office().rssi, noisy_office().truth, noisy_office().deployment, SweepConfig{});
  return r;
}

double cell_accuracy(const SweepResult& r, double window, ModelKind kind) {
  for (const auto& c : r.cells) {
    if (c.window_s == window && c.kind == kind) return c.accuracy;
  }
  throw Error("sweep cell missing");
}

ZoneModel knn_20s(const Dataset& ds) {
  SweepConfig cfg;
  cfg.windows_s = {20.0};
  cfg.kinds = {ModelKind::knn};
  return sweep(ds.rssi, ds.truth, ds.deployment, cfg).best_model;
}

std::vector<RssiObservation> occupant_stream(const Dataset& ds) {
  std::vector<RssiObservation> out;
  for (const auto& o : ds.rssi) {
    if (o.tag_id.rfind("occ-", 0) == 0) out.push_back(o);
  }
  return out;
}

// ---- 1 --------------------------------------------------------------------------------

Outcome quantile_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(1 + rng.below(50));
    for (auto& x : v) x = std::round(rng.uniform(-120.0, 0.0) * 10.0) / 10.0;
    std::vector<double> levels(kQuantileLevels.begin(), kQuantileLevels.end());
    levels.push_back(0.0);
    levels.push_back(1.0);
    levels.push_back(rng.uniform());
    for (double q : levels) worst = std::max(worst, std::abs(quantile(v, q) - oracle::quantile(v, q)));
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << "1000 lists, max |diff| " << std::scientific << std::setprecision(2) << worst << " (<= 1e-12), "
    << std::fixed << std::setprecision(3) << secs << " s";
  return {worst <= 1e-12 && secs < 5.0, s.str()};
}

// ---- 2 --------------------------------------------------------------------------------

Outcome knn_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2);
  const std::size_t n = 500, d = 30;
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  std::vector<ZoneId> labels(n);
  KnnParams p{1, Matrix(n, d), {}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) p.points(i, j) = pts[i][j] = rng.normal(0.0, 1.0);
    labels[i] = ZoneId{1 + static_cast<int>(rng.below(14))};
  }
  p.labels = labels;
  std::size_t mismatches = 0, total = 0;
  for (int k : {1, 3, 5}) {
    p.k = k;
    Rng qrng(20 + static_cast<std::uint64_t>(k));
    for (int q = 0; q < 200; ++q) {
      std::vector<double> x(d);
      for (auto& v : x) v = qrng.normal(0.0, 1.0);
      mismatches += knn_predict(p, x) != oracle::knn(pts, labels, k, x);
      ++total;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 5.0,
          std::to_string(total - mismatches) + "/" + std::to_string(total) + " identical, " + fmt(secs) + " s"};
}

// ---- 3 --------------------------------------------------------------------------------

Outcome gradient_checks() {
  Rng rng(3);
  double worst_lr = 0.0, worst_svm = 0.0;
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = 8, d = 5, c = 4;
    Matrix x(n, d), w(c, d + 1);
    for (auto& v : x.data) v = rng.normal(0, 1);
    for (auto& v : w.data) v = rng.normal(0, 0.5);
    std::vector<std::size_t> y(n);
    for (auto& v : y) v = rng.below(c);
    const auto num = oracle::numeric_gradient([&](const Matrix& m) { return logreg_loss(m, x, y, 0.01); }, w, 1e-5);
    worst_lr = std::max(worst_lr, oracle::max_relative_error(logreg_gradient(w, x, y, 0.01), num));
  }
  int checked = 0;
  while (checked < 25) {
    const std::size_t n = 8, d = 5, c = 4;
    Matrix x(n, d), w(c, d + 1);
    for (auto& v : x.data) v = rng.normal(0, 1);
    for (auto& v : w.data) v = rng.normal(0, 0.5);
    std::vector<std::size_t> y(n);
    for (auto& v : y) v = rng.below(c);
    bool near_kink = false;
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = y[i] == k ? 1.0 : -1.0;
        near_kink |= std::abs(1.0 - s * decision_value(w, k, x.row(i))) < 1e-3;
      }
    }
    if (near_kink) continue;
    const auto num = oracle::numeric_gradient([&](const Matrix& m) { return svm_objective(m, x, y, 0.01); }, w, 1e-6);
    worst_svm = std::max(worst_svm, oracle::max_relative_error(svm_subgradient(w, x, y, 0.01), num));
    ++checked;
  }
  std::ostringstream s;
  s << "logreg max rel err " << std::scientific << std::setprecision(2) << worst_lr << ", linsvm " << worst_svm;
  return {worst_lr < 1e-5 && worst_svm < 1e-4, s.str()};
}

// ---- 4 --------------------------------------------------------------------------------

Outcome localization_accuracy() {
  const auto t0 = std::chrono::steady_clock::now();
  const double noisy = cell_accuracy(noisy_sweep(), 20.0, ModelKind::knn);
  SimConfig clean;
  clean.noise_sigma_db = 0.0;
  const auto ds = simulate(clean);
  SweepConfig cfg;
  cfg.windows_s = {20.0};
  cfg.kinds = {ModelKind::knn};
  const double noiseless = sweep(ds.rssi, ds.truth, ds.deployment, cfg).cells.at(0).accuracy;
  const double secs = seconds_since(t0);
  return {noisy >= 0.70 && noiseless >= 0.95 && secs < 60.0,
          "knn 20 s mixed: sigma=3 " + fmt(noisy) + " (>= 0.70), sigma=0 " + fmt(noiseless) + " (>= 0.95), " +
              fmt(secs, 1) + " s"};
}

// ---- 5 --------------------------------------------------------------------------------

Outcome sweep_shape() {
  const auto& r = noisy_sweep();
  std::set<std::pair<double, ModelKind>> cells;
  for (const auto& c : r.cells) cells.insert({c.window_s, c.kind});
  const double a20 = cell_accuracy(r, 20.0, ModelKind::knn);
  const double a30 = cell_accuracy(r, 30.0, ModelKind::knn);
  std::string grid;
  for (const auto& c : r.cells) grid += " " + fmt(c.window_s, 0) + "s/" + to_string(c.kind) + "=" + fmt(c.accuracy);
  return {r.cells.size() == 9 && cells.size() == 9 && std::abs(a20 - a30) <= 0.10,
          "|knn20 - knn30| = " + fmt(std::abs(a20 - a30)) + " (<= 0.10); grid:" + grid};
}

// ---- 6 --------------------------------------------------------------------------------

Outcome mobility_ground_truth() {
  SimConfig c;
  c.noise_sigma_db = 0.0;
  const auto ds = simulate(c);
  const auto model = knn_20s(ds);
  const auto inferred = infer(model, occupant_stream(ds), ds.deployment).trajectories;

  std::map<ZoneId, double> dwell;
  double total = 0.0;
  for (const auto& iv : ds.truth) {
    if (iv.source != TagSource::occupant) continue;
    dwell[iv.zone] += static_cast<double>(iv.end - iv.start);
    total += static_cast<double>(iv.end - iv.start);
  }
  const auto occ = occupancy(inferred);
  double worst = 0.0;
  for (const auto& z : ds.deployment.zone_ids()) worst = std::max(worst, std::abs(occ.rate(z) - dwell[z] / total));

  bool visits_match = true;
  for (int gap : {0, 1, 2}) {
    for (int min_len : {1, 2, 3}) {
      visits_match &= visits(inferred, gap, min_len).counts == oracle::visit_counts(inferred, gap, min_len);
    }
  }
  return {worst <= 0.05 && visits_match, "max |occupancy - dwell fraction| " + fmt(worst) + " (<= 0.05); visit counts " +
                                             (visits_match ? "match" : "DIFFER from") + " run-length oracle"};
}

// ---- 7 --------------------------------------------------------------------------------

Outcome busy_hours_correlation() {
  const auto& ds = noisy_office();
  const auto model = knn_20s(ds);
  const auto inferred = infer(model, occupant_stream(ds), ds.deployment).trajectories;
  // Analyse the sensor zone with the most inferred visits.
  std::optional<ZoneId> zone;
  std::size_t most = 0;
  const auto counts = visits(inferred).counts;
  for (const auto& s : ds.deployment.iaq_sensors) {
    const auto z = zone_of_sensor(ds.deployment, s);
    const auto it = z ? counts.find(*z) : counts.end();
    if (it != counts.end() && it->second > most) {
      most = it->second;
      zone = *z;
    }
  }
  if (!zone) return {false, "no sensor zone was visited"};
  const auto aligned = align(ds.iaq, hourly_visit_counts(inferred, *zone), ds.deployment, *zone);
  const auto co2 = aligned.values(Pollutant::co2);
  const auto r = pearson(aligned.visit_counts(), co2);
  const auto contrast = busy_hours_contrast(co2, aligned.starts(), BusyHours{}, 10000, 42);
  const bool pass = r && *r >= 0.6 && contrast.delta > 0.0 && contrast.p_value < 0.01;
  return {pass, "zone " + std::to_string(zone->index) + " (" + std::to_string(most) + " visits): CO2 delta " +
                    fmt(contrast.delta, 1) + " ppm, p " + fmt(contrast.p_value, 4) + " (< 0.01), r " +
                    (r ? fmt(*r) : std::string("undefined")) + " (>= 0.6), " + std::to_string(aligned.buckets.size()) +
                    " hourly buckets"};
}

// ---- 8 --------------------------------------------------------------------------------

Outcome simulator_physics() {
  SimConfig c;
  const auto d = build_deployment(c);
  double worst_co2 = 0.0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<GroundTruthInterval> crowd;
    for (int i = 0; i < n; ++i) {
      crowd.push_back({"p" + std::to_string(i), c.day_start_ms, c.day_start_ms + kMillisPerDay, ZoneId{1},
                       TagSource::occupant});
    }
    const double target = co2_steady_state(c, n);
    const Millis settle = c.day_start_ms + static_cast<Millis>(5.0 / c.air_exchange_per_h * kMillisPerHour);
    for (const auto& r : simulate_iaq(c, d, crowd)) {
      if (r.sensor_id == "iaq-01" && r.timestamp >= settle) {
        worst_co2 = std::max(worst_co2, std::abs(r.co2 - target) / target);
      }
    }
  }
  const int samples = 10000;
  double worst_z = 0.0;
  Rng rng(8);
  for (double dist : {1.0, 3.0, 5.0, 10.0, 20.0}) {
    const double mean = path_loss_rssi(c, dist);
    double s = 0.0;
    for (int i = 0; i < samples; ++i) s += *sample_rssi(c, mean, rng);
    const double bound = 3.0 * c.noise_sigma_db / std::sqrt(static_cast<double>(samples));
    worst_z = std::max(worst_z, std::abs(s / samples - mean) / bound);
  }
  return {worst_co2 <= 0.01 && worst_z <= 1.0,
          "CO2 worst relative gap after 5/lambda h " + fmt(100.0 * worst_co2) + "% (<= 1%); RSSI mean offset " +
              fmt(worst_z) + " x 3sigma/sqrt(N) (<= 1)"};
}

// ---- 10 (CLI golden run, also feeds 9) --------------------------------------------------------

struct GoldenRun {
  fs::path root;
  bool ok = false;
  double seconds = 0.0;
  std::string failure;
  std::vector<std::string> stages;
};

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const GoldenRun& golden_run() {
  static const GoldenRun run = [] {
    GoldenRun g;
    g.root = fs::absolute("acceptance_run");
    fs::remove_all(g.root);
    fs::create_directories(g.root);
    const std::string cli = "'" + std::string(IAQMOB_CLI_PATH) + "' ";
    const auto& r = g.root;
    const std::string data = "--rssi " + q(r / "data/rssi.jsonl") + " --deployment " + q(r / "data/deployment.json");
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"data", "simulate --config " + q(fs::path(IAQMOB_SOURCE_DIR) / "configs/office.json")},
        {"train", "train " + data + " --truth " + q(r / "data/truth.csv")},
        {"infer", "infer --model " + q(r / "train/model.json") + " " + data},
        {"stats", "stats --trajectories " + q(r / "infer/trajectories.csv") + " --tag-prefix occ- --svg"},
        {"correlate", "correlate --trajectories " + q(r / "infer/trajectories.csv") + " --tag-prefix occ- --iaq " +
                          q(r / "data/iaq.csv") + " --deployment " + q(r / "data/deployment.json") + " --svg"},
    };
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& [dir, args] : steps) {
      const auto res = run_command(cli + args + " --out " + q(r / dir));
      if (res.exit_code != 0) {
        g.failure = dir + " exited " + std::to_string(res.exit_code) + ": " + res.err;
        return g;
      }
      g.stages.push_back(dir);
    }
    g.seconds = seconds_since(t0);
    g.ok = true;
    return g;
  }();
  return run;
}

Outcome end_to_end() {
  const auto& g = golden_run();
  if (!g.ok) return {false, g.failure};
  std::size_t parsed = 0;
  const auto& r = g.root;
  parsed += !load_rssi((r / "data/rssi.jsonl").string(), true).records.empty();
  parsed += !load_iaq((r / "data/iaq.csv").string(), true).records.empty();
  parsed += !load_truth((r / "data/truth.csv").string()).empty();
  load_deployment((r / "data/deployment.json").string());
  load_model((r / "train/model.json").string());
  parsed += !load_trajectories((r / "infer/trajectories.csv").string()).empty();
  std::size_t generic = 0;
  for (const auto& stage : g.stages) {
    for (const auto& e : fs::directory_iterator(r / stage)) {
      if (e.path().extension() != ".csv") continue;
      const auto t = text::read_csv_table(e.path().string());
      for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) return {false, e.path().string() + ": ragged row"};
      }
      ++generic;
    }
  }
  return {parsed == 4 && g.seconds < 180.0,
          "simulate, train, infer, stats, correlate in " + fmt(g.seconds, 1) + " s (< 180 s); " + std::to_string(generic) +
              " CSV files parsed back"};
}

// ---- 9 ---------------------------------------------------------------------------------------

Outcome determinism_and_round_trips() {
  std::vector<std::string> problems;
  // Simulator bytes.
  SimConfig c;
  const auto a = simulate(c);
  const auto& b = noisy_office();
  if (rssi_text(a.rssi) != rssi_text(b.rssi) || iaq_csv(a.iaq) != iaq_csv(b.iaq) ||
      truth_csv(a.truth) != truth_csv(b.truth) || to_json(a.deployment) != to_json(b.deployment)) {
    problems.push_back("simulator output differs between runs");
  }
  // Sweep grid.
  const auto again = sweep(a.rssi, a.truth, a.deployment, SweepConfig{});
  if (sweep_csv(again) != sweep_csv(noisy_sweep())) problems.push_back("sweep grid differs between runs");
  // Model save/load for every kind.
  std::size_t compared = 0;
  {
    iaqmob::testing::TempDir dir("accept-model");
    WindowingConfig w;
    const auto gws = a.deployment.gateway_order();
    const auto samples = segment(a.rssi, w, gws).samples;
    const auto labeled = labeled_only(label_samples(samples, a.truth));
    for (auto kind : {ModelKind::knn, ModelKind::logreg, ModelKind::linsvm}) {
      TrainConfig tc;
      tc.kind = kind;
      const auto model = train(labeled, tc, w, gws);
      save_model(model, dir.file("m.json"));
      const auto loaded = load_model(dir.file("m.json"));
      for (const auto& s : samples) {
        if (model.predict(s.features) != loaded.predict(s.features)) {
          problems.push_back(to_string(kind) + " prediction changed after save/load");
          break;
        }
        ++compared;
      }
    }
  }
  // CLI manifests.
  std::size_t replayed_files = 0;
  const auto& g = golden_run();
  if (!g.ok) {
    problems.push_back("golden run failed: " + g.failure);
  } else {
    const std::string cli = "'" + std::string(IAQMOB_CLI_PATH) + "' ";
    auto stages = g.stages;
    const auto sweep_dir = g.root / "sweep";
    const auto res = run_command(cli + "sweep --rssi " + q(g.root / "data/rssi.jsonl") + " --truth " +
                                 q(g.root / "data/truth.csv") + " --deployment " + q(g.root / "data/deployment.json") +
                                 " --out " + q(sweep_dir));
    if (res.exit_code != 0) problems.push_back("sweep run failed: " + res.err);
    stages.push_back("sweep");
    for (const auto& stage : stages) {
      const auto target = g.root / "replay" / stage;
      const auto rr = run_command(cli + "replay --manifest " + q(g.root / stage / "manifest.json") + " --out " + q(target));
      if (rr.exit_code != 0) {
        problems.push_back("replay of " + stage + " failed: " + rr.err);
        continue;
      }
      const auto m = nlohmann::json::parse(slurp(g.root / stage / "manifest.json"));
      for (const auto& name : m.at("outputs")) {
        const auto n = name.get<std::string>();
        if (slurp(g.root / stage / n) != slurp(target / n)) problems.push_back(stage + "/" + n + " not reproduced");
        ++replayed_files;
      }
    }
  }
  std::string detail = "simulator bytes, sweep grid, " + std::to_string(compared) + " model predictions, " +
                       std::to_string(replayed_files) + " replayed CLI outputs";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  // 10 runs before 9: the manifest replays reuse the golden run's outputs.
  const std::vector<Criterion> criteria = {
      {1, "quantile oracle", quantile_oracle},
      {2, "knn oracle", knn_oracle},
      {3, "gradient checks", gradient_checks},
      {4, "localization accuracy", localization_accuracy},
      {5, "sweep shape", sweep_shape},
      {6, "mobility statistics", mobility_ground_truth},
      {7, "busy-hours correlation", busy_hours_correlation},
      {8, "simulator physics", simulator_physics},
      {10, "end-to-end golden run", end_to_end},
      {9, "determinism and round trips", determinism_and_round_trips},
  };
  std::map<int, std::string> lines;
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all &= o.pass;
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
         << fmt(seconds_since(t0), 2) << " s]";
    lines[c.id] = line.str();
    std::cerr << "  finished criterion " << c.id << "\n";
  }
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return all ? 0 : 1;
}
