#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "iaqmob/core.hpp"
#include "iaqmob/error.hpp"
#include "iaqmob/ingest.hpp"
#include "iaqmob/rng.hpp"

namespace iaqmob {

struct SensorSpec {
  std::string id;
  Point position;
  std::optional<ZoneId> zone_hint;
};

/// Everything that shapes a synthetic dataset. Defaults describe a
/// 14-zone office with 6 gateways, 7 IAQ sensors and one monitored day.
struct SimConfig {
  std::uint64_t seed = 42;
  std::string name = "simulated-office";

  // Floor plan: rows x cols grid of equal rectangles, zone ids row-major.
  int rows = 2;
  int cols = 7;
  double zone_width_m = 5.0;
  double zone_height_m = 5.0;
  /// Explicit gateway positions; when empty `auto_gateways` are spread on a lattice.
  std::vector<Point> gateways;
  int auto_gateways = 6;
  /// Explicit sensors; when empty one sensor sits at the centroid of every
  /// odd-numbered zone.
  std::vector<SensorSpec> sensors;

  // Time line. Occupants are on site [work_start_h, work_end_h) each day;
  // the labeled survey runs the day before the first monitored day.
  Millis day_start_ms = 1709510400000;  // 2024-03-04T00:00:00Z
  int days = 1;
  double work_start_h = 8.0;
  double work_end_h = 18.0;
  double survey_start_h = 8.0;

  // Radio.
  double report_rate_hz = 1.0;
  double rssi_at_1m = -55.0;
  double path_loss_exponent = 2.5;
  double noise_sigma_db = 3.0;
  double rssi_resolution_db = 0.1;  // 0 keeps full precision
  double falloff_threshold_dbm = -100.0;
  double falloff_drop_prob = 0.5;

  // Anonymous occupants.
  int occupants = 6;
  double move_prob = 0.1;  // per minute
  /// Zone preference weights; when empty zones 3 and 7 weigh 3, others 1.
  std::vector<double> zone_weights;

  // Labeled survey tags.
  int carried_tags = 3;
  double carried_minutes_per_zone = 15.0;
  double carried_jitter_m = 1.5;
  int stationary_tags_per_zone = 2;
  double stationary_minutes = 30.0;

  // Indoor air quality.
  double room_height_m = 3.0;  // zone volume = area x height
  double co2_generation_lps = 0.005;
  double air_exchange_per_h = 1.0;
  double outdoor_co2_ppm = 420.0;
  double iaq_step_s = 60.0;
  double pm25_baseline = 5.0;
  double pm10_baseline = 12.0;
  double pm25_pulse = 4.0;        // per movement event
  double pm10_pulse_ratio = 2.5;  // PM10 pulse relative to PM2.5
  double pm_decay_min = 20.0;
  double voc_baseline = 50.0;
  double voc_per_occupant = 15.0;
  double temperature_base_c = 21.0;
  double temperature_amplitude_c = 1.5;

  Millis work_start_offset() const { return static_cast<Millis>(std::llround(work_start_h * kMillisPerHour)); }
  Millis work_end_offset() const { return static_cast<Millis>(std::llround(work_end_h * kMillisPerHour)); }
  double zone_volume_m3() const { return zone_width_m * zone_height_m * room_height_m; }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0)) throw Error(std::string("simulation: ") + what + " must be positive");
    };
    if (rows < 1 || cols < 1) throw Error("simulation: grid needs at least one zone");
    positive(zone_width_m, "zone_width_m");
    positive(zone_height_m, "zone_height_m");
    positive(report_rate_hz, "report_rate_hz");
    positive(path_loss_exponent, "path_loss_exponent");
    positive(room_height_m, "room_height_m");
    positive(air_exchange_per_h, "air_exchange_per_h");
    positive(iaq_step_s, "iaq_step_s");
    positive(pm_decay_min, "pm_decay_min");
    if (co2_generation_lps < 0.0) throw Error("simulation: co2_generation_lps must be >= 0");
    if (days < 1) throw Error("simulation: days must be >= 1");
    if (noise_sigma_db < 0.0) throw Error("simulation: noise_sigma_db must be >= 0");
    if (rssi_resolution_db < 0.0) throw Error("simulation: rssi_resolution_db must be >= 0");
    if (!(work_start_h >= 0.0 && work_end_h <= 24.0 && work_start_h < work_end_h)) {
      throw Error("simulation: work hours must satisfy 0 <= start < end <= 24");
    }
    if (!(move_prob >= 0.0 && move_prob <= 1.0)) throw Error("simulation: move_prob must be in [0, 1]");
    if (occupants < 0 || carried_tags < 0 || stationary_tags_per_zone < 0) {
      throw Error("simulation: tag counts must be >= 0");
    }
    if (gateways.empty() && auto_gateways < 1) throw Error("simulation: need at least one gateway");
    if (!zone_weights.empty()) {
      if (zone_weights.size() != static_cast<std::size_t>(rows * cols)) {
        throw Error("simulation: zone_weights needs one entry per zone");
      }
      for (double w : zone_weights) {
        if (!(w > 0.0)) throw Error("simulation: zone weights must be positive");
      }
    }
    // Forward Euler on the CO2 balance is stable only when lambda*dt < 1.
    if (air_exchange_per_h / 3600.0 * iaq_step_s >= 1.0) {
      throw Error("simulation: iaq_step_s too large for the air-exchange rate (lambda*dt >= 1)");
    }
  }
};

// ---- config JSON -------------------------------------------------------------------

inline nlohmann::json to_json(const SimConfig& c) {
  using nlohmann::json;
  json gws = json::array();
  for (const auto& g : c.gateways) gws.push_back({{"x", g.x}, {"y", g.y}});
  json sensors = json::array();
  for (const auto& s : c.sensors) {
    json js = {{"id", s.id}, {"x", s.position.x}, {"y", s.position.y}};
    if (s.zone_hint) js["zone_hint"] = s.zone_hint->index;
    sensors.push_back(js);
  }
  return {{"seed", c.seed},
          {"name", c.name},
          {"rows", c.rows},
          {"cols", c.cols},
          {"zone_width_m", c.zone_width_m},
          {"zone_height_m", c.zone_height_m},
          {"gateways", gws},
          {"auto_gateways", c.auto_gateways},
          {"sensors", sensors},
          {"day_start_ms", c.day_start_ms},
          {"days", c.days},
          {"work_start_h", c.work_start_h},
          {"work_end_h", c.work_end_h},
          {"survey_start_h", c.survey_start_h},
          {"report_rate_hz", c.report_rate_hz},
          {"rssi_at_1m", c.rssi_at_1m},
          {"path_loss_exponent", c.path_loss_exponent},
          {"noise_sigma_db", c.noise_sigma_db},
          {"rssi_resolution_db", c.rssi_resolution_db},
          {"falloff_threshold_dbm", c.falloff_threshold_dbm},
          {"falloff_drop_prob", c.falloff_drop_prob},
          {"occupants", c.occupants},
          {"move_prob", c.move_prob},
          {"zone_weights", c.zone_weights},
          {"carried_tags", c.carried_tags},
          {"carried_minutes_per_zone", c.carried_minutes_per_zone},
          {"carried_jitter_m", c.carried_jitter_m},
          {"stationary_tags_per_zone", c.stationary_tags_per_zone},
          {"stationary_minutes", c.stationary_minutes},
          {"room_height_m", c.room_height_m},
          {"co2_generation_lps", c.co2_generation_lps},
          {"air_exchange_per_h", c.air_exchange_per_h},
          {"outdoor_co2_ppm", c.outdoor_co2_ppm},
          {"iaq_step_s", c.iaq_step_s},
          {"pm25_baseline", c.pm25_baseline},
          {"pm10_baseline", c.pm10_baseline},
          {"pm25_pulse", c.pm25_pulse},
          {"pm10_pulse_ratio", c.pm10_pulse_ratio},
          {"pm_decay_min", c.pm_decay_min},
          {"voc_baseline", c.voc_baseline},
          {"voc_per_occupant", c.voc_per_occupant},
          {"temperature_base_c", c.temperature_base_c},
          {"temperature_amplitude_c", c.temperature_amplitude_c}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  if (!j.is_object()) throw Error("simulation config must be a JSON object");
  const auto known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error("unknown simulation config key: " + key);
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("seed", c.seed);
    get("name", c.name);
    get("rows", c.rows);
    get("cols", c.cols);
    get("zone_width_m", c.zone_width_m);
    get("zone_height_m", c.zone_height_m);
    if (j.contains("gateways")) {
      for (const auto& g : j.at("gateways")) {
        c.gateways.push_back({g.at("x").get<double>(), g.at("y").get<double>()});
      }
    }
    get("auto_gateways", c.auto_gateways);
    if (j.contains("sensors")) {
      for (const auto& s : j.at("sensors")) {
        SensorSpec spec{s.at("id").get<std::string>(),
                        {s.at("x").get<double>(), s.at("y").get<double>()},
                        std::nullopt};
        if (s.contains("zone_hint")) spec.zone_hint = ZoneId{s.at("zone_hint").get<int>()};
        c.sensors.push_back(spec);
      }
    }
    get("day_start_ms", c.day_start_ms);
    get("days", c.days);
    get("work_start_h", c.work_start_h);
    get("work_end_h", c.work_end_h);
    get("survey_start_h", c.survey_start_h);
    get("report_rate_hz", c.report_rate_hz);
    get("rssi_at_1m", c.rssi_at_1m);
    get("path_loss_exponent", c.path_loss_exponent);
    get("noise_sigma_db", c.noise_sigma_db);
    get("rssi_resolution_db", c.rssi_resolution_db);
    get("falloff_threshold_dbm", c.falloff_threshold_dbm);
    get("falloff_drop_prob", c.falloff_drop_prob);
    get("occupants", c.occupants);
    get("move_prob", c.move_prob);
    get("zone_weights", c.zone_weights);
    get("carried_tags", c.carried_tags);
    get("carried_minutes_per_zone", c.carried_minutes_per_zone);
    get("carried_jitter_m", c.carried_jitter_m);
    get("stationary_tags_per_zone", c.stationary_tags_per_zone);
    get("stationary_minutes", c.stationary_minutes);
    get("room_height_m", c.room_height_m);
    get("co2_generation_lps", c.co2_generation_lps);
    get("air_exchange_per_h", c.air_exchange_per_h);
    get("outdoor_co2_ppm", c.outdoor_co2_ppm);
    get("iaq_step_s", c.iaq_step_s);
    get("pm25_baseline", c.pm25_baseline);
    get("pm10_baseline", c.pm10_baseline);
    get("pm25_pulse", c.pm25_pulse);
    get("pm10_pulse_ratio", c.pm10_pulse_ratio);
    get("pm_decay_min", c.pm_decay_min);
    get("voc_baseline", c.voc_baseline);
    get("voc_per_occupant", c.voc_per_occupant);
    get("temperature_base_c", c.temperature_base_c);
    get("temperature_amplitude_c", c.temperature_amplitude_c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

inline SimConfig load_sim_config(const std::string& path) {
  try {
    return sim_config_from_json(nlohmann::json::parse(text::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
}

// ---- deployment ----------------------------------------------------------------------

/// Independent generator streams so that, e.g., adding occupants leaves the
/// survey data untouched.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Deployment build_deployment(const SimConfig& c) {
  Deployment d;
  d.name = c.name;
  for (int r = 0; r < c.rows; ++r) {
    for (int col = 0; col < c.cols; ++col) {
      const int id = r * c.cols + col + 1;
      d.zones.push_back({ZoneId{id},
                         Rect{col * c.zone_width_m, r * c.zone_height_m,
                              (col + 1) * c.zone_width_m, (r + 1) * c.zone_height_m}});
    }
  }
  const double width = c.cols * c.zone_width_m;
  const double height = c.rows * c.zone_height_m;
  if (!c.gateways.empty()) {
    for (std::size_t i = 0; i < c.gateways.size(); ++i) {
      d.gateways.push_back({"gw-" + std::to_string(i + 1), c.gateways[i]});
    }
  } else {
    const int per_row = (c.auto_gateways + 1) / 2;
    for (int i = 0; i < c.auto_gateways; ++i) {
      const int row = i / per_row;
      const int col = i % per_row;
      const int in_row = (row == 0) ? per_row : c.auto_gateways - per_row;
      const double y = (c.auto_gateways == 1) ? height / 2.0 : height * (2 * row + 1) / 4.0;
      d.gateways.push_back({"gw-" + std::to_string(i + 1),
                            Point{width * (2 * col + 1) / (2.0 * in_row), y}});
    }
  }
  if (!c.sensors.empty()) {
    for (const auto& s : c.sensors) d.iaq_sensors.push_back({s.id, s.position, s.zone_hint});
  } else {
    int n = 0;
    for (const auto& z : d.zones) {
      if (z.id.index % 2 == 0) continue;
      char id[16];
      std::snprintf(id, sizeof(id), "iaq-%02d", ++n);
      d.iaq_sensors.push_back({id, z.extent.centroid(), z.id});
    }
  }
  d.validate();
  return d;
}

inline std::vector<double> effective_weights(const SimConfig& c, std::size_t n_zones) {
  if (!c.zone_weights.empty()) return c.zone_weights;
  std::vector<double> w(n_zones, 1.0);
  for (std::size_t hot : {3u, 7u}) {
    if (hot <= n_zones) w[hot - 1] = 3.0;
  }
  return w;
}

/// Zones sharing an edge segment of positive length. Index i is zone i+1.
inline std::vector<std::vector<std::size_t>> zone_adjacency(const Deployment& d) {
  const auto ids = d.zone_ids();
  const std::size_t n = ids.size();
  std::vector<std::vector<std::size_t>> adj(n);
  constexpr double eps = 1e-9;
  auto overlap = [](double a0, double a1, double b0, double b1) {
    return std::min(a1, b1) - std::max(a0, b0);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = d.zone(ids[i]).extent;
      const auto& b = d.zone(ids[j]).extent;
      const bool vertical_edge =
          (std::abs(a.x_max - b.x_min) < eps || std::abs(b.x_max - a.x_min) < eps) &&
          overlap(a.y_min, a.y_max, b.y_min, b.y_max) > eps;
      const bool horizontal_edge =
          (std::abs(a.y_max - b.y_min) < eps || std::abs(b.y_max - a.y_min) < eps) &&
          overlap(a.x_min, a.x_max, b.x_min, b.x_max) > eps;
      if (vertical_edge || horizontal_edge) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  return adj;
}

/// Row-stochastic transition matrix of the per-minute walk.
inline std::vector<std::vector<double>> transition_matrix(
    const std::vector<std::vector<std::size_t>>& adj, std::span<const double> weights,
    double move_prob) {
  const std::size_t n = adj.size();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (auto j : adj[i]) total += weights[j];
    if (adj[i].empty()) {
      p[i][i] = 1.0;
      continue;
    }
    p[i][i] = 1.0 - move_prob;
    for (auto j : adj[i]) p[i][j] += move_prob * weights[j] / total;
  }
  return p;
}

// ---- movement ----------------------------------------------------------------------------

/// Per-minute discrete walk over the zone graph for every occupant and day.
/// Returns occupant intervals ordered by tag, then start.
inline std::vector<GroundTruthInterval> simulate_movement(const SimConfig& c,
                                                          const Deployment& d) {
  const auto ids = d.zone_ids();
  const auto adj = zone_adjacency(d);
  {
    std::vector<bool> seen(ids.size(), false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t visited = 1;
    while (!q.empty()) {
      const auto i = q.front();
      q.pop();
      for (auto j : adj[i]) {
        if (!seen[j]) {
          seen[j] = true;
          ++visited;
          q.push(j);
        }
      }
    }
    if (visited != ids.size()) throw Error("simulation: zone graph is disconnected");
  }
  const auto weights = effective_weights(c, ids.size());
  Rng rng(stream_seed(c.seed, 1));
  const Millis start_off = c.work_start_offset();
  const Millis minutes = (c.work_end_offset() - start_off) / kMillisPerMinute;

  std::vector<GroundTruthInterval> out;
  for (int o = 0; o < c.occupants; ++o) {
    char tag[16];
    std::snprintf(tag, sizeof(tag), "occ-%02d", o + 1);
    for (int day = 0; day < c.days; ++day) {
      const Millis t0 = c.day_start_ms + day * kMillisPerDay + start_off;
      std::size_t zone = rng.weighted(weights);
      Millis run_start = t0;
      for (Millis m = 0; m < minutes; ++m) {
        if (m > 0 && rng.bernoulli(c.move_prob) && !adj[zone].empty()) {
          std::vector<double> w;
          for (auto j : adj[zone]) w.push_back(weights[j]);
          const std::size_t next = adj[zone][rng.weighted(w)];
          const Millis t = t0 + m * kMillisPerMinute;
          out.push_back({tag, run_start, t, ids[zone], TagSource::occupant});
          run_start = t;
          zone = next;
        }
      }
      out.push_back({tag, run_start, t0 + minutes * kMillisPerMinute, ids[zone],
                     TagSource::occupant});
    }
  }
  return out;
}

/// Carried and stationary survey tags, the day before monitoring starts.
inline std::vector<GroundTruthInterval> survey_schedule(const SimConfig& c, const Deployment& d) {
  const auto ids = d.zone_ids();
  const Millis t0 = c.day_start_ms - kMillisPerDay +
                    static_cast<Millis>(std::llround(c.survey_start_h * kMillisPerHour));
  const auto per_zone = static_cast<Millis>(std::llround(c.carried_minutes_per_zone * kMillisPerMinute));
  const auto fixed_len = static_cast<Millis>(std::llround(c.stationary_minutes * kMillisPerMinute));
  std::vector<GroundTruthInterval> out;
  if (per_zone > 0) {
    for (int t = 0; t < c.carried_tags; ++t) {
      const std::string tag = "carried-" + std::to_string(t + 1);
      for (std::size_t z = 0; z < ids.size(); ++z) {
        const Millis s = t0 + static_cast<Millis>(z) * per_zone;
        out.push_back({tag, s, s + per_zone, ids[z], TagSource::carried});
      }
    }
  }
  if (fixed_len > 0) {
    for (auto z : ids) {
      for (int k = 0; k < c.stationary_tags_per_zone; ++k) {
        char tag[32];
        std::snprintf(tag, sizeof(tag), "fixed-z%02d-%c", z.index, static_cast<char>('a' + k % 26));
        out.push_back({tag, t0, t0 + fixed_len, z, TagSource::stationary});
      }
    }
  }
  return out;
}

// ---- RSSI ----------------------------------------------------------------------------------

/// Mean received power at distance d under log-distance path loss.
inline double path_loss_rssi(const SimConfig& c, double distance_m) {
  return c.rssi_at_1m - 10.0 * c.path_loss_exponent * std::log10(std::max(distance_m, 0.1));
}

inline double quantize_rssi(double v, double resolution) {
  if (resolution <= 0.0) return v;
  const double inv = 1.0 / resolution;
  const double k = std::round(v * inv);
  if (std::abs(inv - std::round(inv)) < 1e-9) return k / std::round(inv);
  return k * resolution;
}

/// One noisy report: path loss + Gaussian shadowing, clamped to [-120, -20].
/// nullopt when the detection falloff drops it.
inline std::optional<double> sample_rssi(const SimConfig& c, double mean, Rng& rng) {
  double v = mean;
  if (c.noise_sigma_db > 0.0) v += rng.normal(0.0, c.noise_sigma_db);
  v = std::clamp(v, -120.0, -20.0);
  if (v < c.falloff_threshold_dbm && rng.bernoulli(c.falloff_drop_prob)) return std::nullopt;
  return std::clamp(quantize_rssi(v, c.rssi_resolution_db), -120.0, -20.0);
}

/// Observations for every interval, ordered by timestamp (ties keep tag,
/// then gateway order). Each tag draws from its own stream.
inline std::vector<RssiObservation> simulate_rssi(const SimConfig& c, const Deployment& d,
                                                  std::span<const GroundTruthInterval> intervals) {
  std::map<std::string, std::vector<const GroundTruthInterval*>> by_tag;
  for (const auto& iv : intervals) by_tag[iv.tag_id].push_back(&iv);
  const auto period = static_cast<Millis>(std::llround(1000.0 / c.report_rate_hz));
  if (period < 1) throw Error("simulation: report rate too high");

  std::vector<RssiObservation> out;
  std::uint64_t tag_index = 0;
  for (auto& [tag, list] : by_tag) {
    std::sort(list.begin(), list.end(), [](auto a, auto b) { return a->start < b->start; });
    Rng rng(stream_seed(c.seed, 1000 + tag_index++));
    std::optional<Point> fixed;
    for (const auto* iv : list) {
      const Rect& r = d.zone(iv->zone).extent;
      if (iv->source == TagSource::stationary && !fixed) {
        fixed = Point{rng.uniform(r.x_min, r.x_max), rng.uniform(r.y_min, r.y_max)};
      }
      std::vector<double> means(d.gateways.size());
      Millis minute_end = iv->start;
      for (Millis t = iv->start; t < iv->end; t += period) {
        if (t >= minute_end) {
          Point p;
          if (iv->source == TagSource::stationary) {
            p = *fixed;
          } else if (iv->source == TagSource::carried) {
            const Point ctr = r.centroid();
            const double j = c.carried_jitter_m;
            p = {std::clamp(ctr.x + rng.uniform(-j, j), r.x_min, r.x_max),
                 std::clamp(ctr.y + rng.uniform(-j, j), r.y_min, r.y_max)};
          } else {
            p = {rng.uniform(r.x_min, r.x_max), rng.uniform(r.y_min, r.y_max)};
          }
          for (std::size_t g = 0; g < d.gateways.size(); ++g) {
            means[g] = path_loss_rssi(c, distance(p, d.gateways[g].position));
          }
          minute_end = t + kMillisPerMinute;
        }
        for (std::size_t g = 0; g < d.gateways.size(); ++g) {
          if (auto v = sample_rssi(c, means[g], rng)) {
            out.push_back({t, tag, d.gateways[g].id, *v});
          }
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

// ---- IAQ -------------------------------------------------------------------------------------

/// Analytic CO2 equilibrium of the well-mixed zone balance.
inline double co2_steady_state(const SimConfig& c, double occupants) {
  const double gen_ppm_per_s = c.co2_generation_lps * 1e-3 * 1e6 / c.zone_volume_m3();
  return c.outdoor_co2_ppm + gen_ppm_per_s * occupants / (c.air_exchange_per_h / 3600.0);
}

/// Per-sensor series over the monitored days. CO2 integrates
/// dC/dt = G*N/V - lambda*(C - C_out) with forward Euler; particulate matter
/// adds a decaying pulse for every occupant entering or leaving the zone.
inline std::vector<IaqReading> simulate_iaq(const SimConfig& c, const Deployment& d,
                                            std::span<const GroundTruthInterval> intervals) {
  const auto ids = d.zone_ids();
  const Millis begin = c.day_start_ms;
  const Millis end = c.day_start_ms + c.days * kMillisPerDay;
  const auto n_minutes = static_cast<std::size_t>((end - begin) / kMillisPerMinute);

  // Occupant count and movement events per zone and minute.
  std::map<ZoneId, std::vector<int>> count, events;
  for (auto z : ids) {
    count[z].assign(n_minutes, 0);
    events[z].assign(n_minutes, 0);
  }
  for (const auto& iv : intervals) {
    if (iv.source != TagSource::occupant) continue;
    const Millis s = std::max(iv.start, begin);
    const Millis e = std::min(iv.end, end);
    if (s >= e) continue;
    const auto m0 = static_cast<std::size_t>((s - begin) / kMillisPerMinute);
    const auto m1 = static_cast<std::size_t>((e - begin + kMillisPerMinute - 1) / kMillisPerMinute);
    for (auto m = m0; m < m1; ++m) ++count[iv.zone][m];
    ++events[iv.zone][m0];  // entering
    if (m1 < n_minutes) ++events[iv.zone][m1];  // leaving
  }

  const Millis step = static_cast<Millis>(std::llround(c.iaq_step_s * 1000.0));
  const double dt = static_cast<double>(step) / 1000.0;
  const double gen = c.co2_generation_lps * 1e-3 * 1e6 / c.zone_volume_m3();  // ppm/s per person
  const double lambda = c.air_exchange_per_h / 3600.0;
  const double decay = std::exp(-dt / (c.pm_decay_min * 60.0));

  std::vector<IaqReading> out;
  for (const auto& sensor : d.iaq_sensors) {
    const auto zone = zone_of_sensor(d, sensor);
    double co2 = c.outdoor_co2_ppm;
    double pm = 0.0;
    std::size_t last_minute = 0;
    bool first = true;
    for (Millis t = begin; t < end; t += step) {
      const auto minute = static_cast<std::size_t>((t - begin) / kMillisPerMinute);
      int n = 0;
      if (zone) {
        n = count[*zone][minute];
        const std::size_t from = first ? minute : last_minute + 1;
        for (std::size_t m = from; m <= minute; ++m) pm += c.pm25_pulse * events[*zone][m];
      }
      first = false;
      last_minute = minute;
      const double hour = static_cast<double>((t - begin) % kMillisPerDay) / kMillisPerHour;
      out.push_back({t, sensor.id, co2, c.pm25_baseline + pm,
                     c.pm10_baseline + c.pm10_pulse_ratio * pm, c.voc_baseline + c.voc_per_occupant * n,
                     c.temperature_base_c +
                         c.temperature_amplitude_c * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0)});
      co2 += dt * (gen * n - lambda * (co2 - c.outdoor_co2_ppm));
      pm *= decay;
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

// ---- whole dataset -----------------------------------------------------------------------------

struct Dataset {
  Deployment deployment;
  std::vector<GroundTruthInterval> truth;  // survey tags, then occupants
  std::vector<RssiObservation> rssi;
  std::vector<IaqReading> iaq;
};

inline Dataset simulate(const SimConfig& c) {
  c.validate();
  Dataset ds;
  ds.deployment = build_deployment(c);
  ds.truth = survey_schedule(c, ds.deployment);
  const auto moves = simulate_movement(c, ds.deployment);
  ds.truth.insert(ds.truth.end(), moves.begin(), moves.end());
  ds.rssi = simulate_rssi(c, ds.deployment, ds.truth);
  ds.iaq = simulate_iaq(c, ds.deployment, ds.truth);
  return ds;
}

struct DatasetPaths {
  std::string deployment;
  std::string rssi;
  std::string iaq;
  std::string truth;
};

inline DatasetPaths dataset_paths(const std::filesystem::path& dir) {
  return {(dir / "deployment.json").string(), (dir / "rssi.jsonl").string(),
          (dir / "iaq.csv").string(), (dir / "truth.csv").string()};
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  const auto p = dataset_paths(dir);
  save_deployment(ds.deployment, p.deployment);
  save_rssi(p.rssi, ds.rssi);
  text::write_file(p.iaq, iaq_csv(ds.iaq));
  text::write_file(p.truth, truth_csv(ds.truth));
}

/// Simulates and writes deployment.json, rssi.jsonl, iaq.csv and truth.csv.
inline Dataset generate(const SimConfig& c, const std::filesystem::path& dir) {
  auto ds = simulate(c);
  write_dataset(ds, dir);
  return ds;
}

}  // namespace iaqmob
