#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "iaqmob/error.hpp"
#include "iaqmob/text.hpp"

namespace iaqmob {

/// Milliseconds since the Unix epoch.
using Millis = std::int64_t;

inline constexpr Millis kMillisPerSecond = 1000;
inline constexpr Millis kMillisPerMinute = 60 * kMillisPerSecond;
inline constexpr Millis kMillisPerHour = 60 * kMillisPerMinute;
inline constexpr Millis kMillisPerDay = 24 * kMillisPerHour;

inline constexpr double kMinRssi = -120.0;
inline constexpr double kMaxRssi = 0.0;

/// Floor division for possibly negative timestamps.
constexpr Millis floor_div(Millis a, Millis b) {
  Millis q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Grid label C_i of a deployment, 1-based.
struct ZoneId {
  int index = 0;

  constexpr auto operator<=>(const ZoneId&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  Point centroid() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

struct Zone {
  ZoneId id;
  Rect extent;
};

struct Gateway {
  std::string id;
  Point position;
};

struct IaqSensor {
  std::string id;
  Point position;
  std::optional<ZoneId> zone_hint;
};

/// A study site: zones (grids), BLE gateways and air-quality sensors.
/// deployment_from_json() validates; hand-built values should call validate().
struct Deployment {
  std::string name;
  std::vector<Zone> zones;
  std::vector<Gateway> gateways;
  std::vector<IaqSensor> iaq_sensors;

  /// Throws Error when an invariant is violated.
  void validate() const {
    if (zones.empty()) throw Error("deployment has no zones");
    if (gateways.empty()) throw Error("deployment has no gateways");
    std::set<int> ids;
    for (const auto& z : zones) {
      if (!ids.insert(z.id.index).second) {
        throw Error("duplicate zone id " + std::to_string(z.id.index));
      }
      if (!(z.extent.x_max > z.extent.x_min) || !(z.extent.y_max > z.extent.y_min)) {
        throw Error("zone " + std::to_string(z.id.index) + " has a degenerate rectangle");
      }
    }
    const int n = static_cast<int>(zones.size());
    if (*ids.begin() < 1 || *ids.rbegin() > n) {
      throw Error("zone ids must be 1.." + std::to_string(n));
    }
    std::set<std::string> names;
    for (const auto& g : gateways) {
      if (!names.insert(g.id).second) throw Error("duplicate gateway id " + g.id);
    }
    names.clear();
    for (const auto& s : iaq_sensors) {
      if (!names.insert(s.id).second) throw Error("duplicate sensor id " + s.id);
      if (s.zone_hint && !ids.contains(s.zone_hint->index)) {
        throw Error("sensor " + s.id + " hints unknown zone " +
                    std::to_string(s.zone_hint->index));
      }
    }
  }

  std::size_t zone_count() const { return zones.size(); }
  std::size_t gateway_count() const { return gateways.size(); }

  const Zone& zone(ZoneId id) const {
    for (const auto& z : zones) {
      if (z.id == id) return z;
    }
    throw Error("unknown zone " + std::to_string(id.index));
  }

  std::vector<std::string> gateway_order() const {
    std::vector<std::string> out;
    out.reserve(gateways.size());
    for (const auto& g : gateways) out.push_back(g.id);
    return out;
  }

  std::vector<ZoneId> zone_ids() const {
    std::vector<ZoneId> out;
    for (const auto& z : zones) out.push_back(z.id);
    std::sort(out.begin(), out.end());
    return out;
  }
};

/// Zone whose rectangle contains the point. Boundary points go to the
/// lowest zone index.
inline std::optional<ZoneId> zone_of(const Deployment& deployment, Point p) {
  std::optional<ZoneId> best;
  for (const auto& z : deployment.zones) {
    if (z.extent.contains(p) && (!best || z.id < *best)) best = z.id;
  }
  return best;
}

/// Sensor closest to the zone centroid; ties go to the smallest sensor id.
inline std::string nearest_sensor(const Deployment& deployment, ZoneId zone) {
  if (deployment.iaq_sensors.empty()) throw Error("deployment has no IAQ sensors");
  const Point c = deployment.zone(zone).extent.centroid();
  const IaqSensor* best = nullptr;
  double best_d = 0.0;
  for (const auto& s : deployment.iaq_sensors) {
    const double d = distance(s.position, c);
    if (!best || d < best_d || (d == best_d && s.id < best->id)) {
      best = &s;
      best_d = d;
    }
  }
  return best->id;
}

/// Sensor paired with a zone: an explicit zone_hint wins, otherwise the
/// nearest sensor. Several hinted sensors resolve to the smallest id.
inline std::string sensor_for_zone(const Deployment& deployment, ZoneId zone) {
  std::optional<std::string> hinted;
  for (const auto& s : deployment.iaq_sensors) {
    if (s.zone_hint == zone && (!hinted || s.id < *hinted)) hinted = s.id;
  }
  if (hinted) return *hinted;
  return nearest_sensor(deployment, zone);
}

/// Zone a sensor measures: its hint, else the zone containing it.
inline std::optional<ZoneId> zone_of_sensor(const Deployment& deployment,
                                            const IaqSensor& sensor) {
  if (sensor.zone_hint) return sensor.zone_hint;
  return zone_of(deployment, sensor.position);
}

/// One gateway's reading of one tag.
struct RssiObservation {
  Millis timestamp = 0;
  std::string tag_id;
  std::string gateway_id;
  double rssi = 0.0;
};

struct IaqReading {
  Millis timestamp = 0;
  std::string sensor_id;
  double co2 = 0.0;
  double pm25 = 0.0;
  double pm10 = 0.0;
  double voc = 0.0;
  double temperature = 0.0;
};

/// Tumbling window [start, start + duration).
struct TimeWindow {
  Millis start = 0;
  Millis duration = 0;

  Millis end() const { return start + duration; }
  auto operator<=>(const TimeWindow&) const = default;
};

/// How a labeled tag was deployed during collection.
enum class TagSource { carried, stationary, occupant };

inline std::string to_string(TagSource s) {
  switch (s) {
    case TagSource::carried: return "carried";
    case TagSource::stationary: return "stationary";
    case TagSource::occupant: return "occupant";
  }
  return "occupant";
}

inline std::optional<TagSource> parse_tag_source(std::string_view s) {
  if (s == "carried") return TagSource::carried;
  if (s == "stationary") return TagSource::stationary;
  if (s == "occupant") return TagSource::occupant;
  return std::nullopt;
}

/// Known position of a tag over [start, end).
struct GroundTruthInterval {
  std::string tag_id;
  Millis start = 0;
  Millis end = 0;
  ZoneId zone;
  TagSource source = TagSource::occupant;
};

// ---- Deployment JSON -------------------------------------------------------

inline nlohmann::json to_json(const Deployment& d) {
  using nlohmann::json;
  json zones = json::array();
  for (const auto& z : d.zones) {
    zones.push_back({{"id", z.id.index},
                     {"x_min", z.extent.x_min},
                     {"y_min", z.extent.y_min},
                     {"x_max", z.extent.x_max},
                     {"y_max", z.extent.y_max}});
  }
  json gws = json::array();
  for (const auto& g : d.gateways) {
    gws.push_back({{"id", g.id}, {"x", g.position.x}, {"y", g.position.y}});
  }
  json sensors = json::array();
  for (const auto& s : d.iaq_sensors) {
    json js = {{"id", s.id}, {"x", s.position.x}, {"y", s.position.y}};
    if (s.zone_hint) js["zone_hint"] = s.zone_hint->index;
    sensors.push_back(std::move(js));
  }
  return {{"name", d.name}, {"zones", zones}, {"gateways", gws}, {"iaq_sensors", sensors}};
}

inline Deployment deployment_from_json(const nlohmann::json& j) {
  Deployment d;
  try {
    d.name = j.at("name").get<std::string>();
    for (const auto& z : j.at("zones")) {
      d.zones.push_back({ZoneId{z.at("id").get<int>()},
                         Rect{z.at("x_min").get<double>(), z.at("y_min").get<double>(),
                              z.at("x_max").get<double>(), z.at("y_max").get<double>()}});
    }
    for (const auto& g : j.at("gateways")) {
      d.gateways.push_back({g.at("id").get<std::string>(),
                            Point{g.at("x").get<double>(), g.at("y").get<double>()}});
    }
    for (const auto& s : j.at("iaq_sensors")) {
      IaqSensor sensor{s.at("id").get<std::string>(),
                       Point{s.at("x").get<double>(), s.at("y").get<double>()},
                       std::nullopt};
      if (s.contains("zone_hint") && !s.at("zone_hint").is_null()) {
        sensor.zone_hint = ZoneId{s.at("zone_hint").get<int>()};
      }
      d.iaq_sensors.push_back(std::move(sensor));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid deployment document: ") + e.what());
  }
  d.validate();
  return d;
}

inline Deployment load_deployment(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
  return deployment_from_json(j);
}

inline void save_deployment(const Deployment& d, const std::string& path) {
  text::write_file(path, to_json(d).dump(2) + "\n");
}

}  // namespace iaqmob
