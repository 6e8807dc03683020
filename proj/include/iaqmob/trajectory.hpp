#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "iaqmob/classify.hpp"
#include "iaqmob/core.hpp"
#include "iaqmob/featurize.hpp"
#include "iaqmob/text.hpp"

namespace iaqmob {

struct TrajectoryStep {
  TimeWindow window;
  ZoneId zone;
};

/// Time-ordered zone predictions for one tag. Windows that lacked data are
/// simply absent.
struct Trajectory {
  std::string tag_id;
  std::vector<TrajectoryStep> steps;
};

struct InferOptions {
  /// Odd width of the optional majority filter; 1 disables it.
  int smoothing_window = 1;
};

struct InferResult {
  std::vector<Trajectory> trajectories;  // ascending tag id
  std::size_t dropped_windows = 0;
  std::size_t ignored_observations = 0;
  std::vector<std::string> warnings;
};

/// Replaces each step's zone by the majority over the surrounding
/// `width` steps. Ties keep the step's own zone when it is among the
/// leaders, else the lowest zone index.
inline Trajectory majority_filter(const Trajectory& t, int width) {
  if (width < 1 || width % 2 == 0) throw Error("smoothing window must be a positive odd number");
  if (width == 1) return t;
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  const auto n = static_cast<std::ptrdiff_t>(t.steps.size());
  Trajectory out = t;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::map<ZoneId, int> counts;
    for (auto j = std::max<std::ptrdiff_t>(0, i - half); j <= std::min(n - 1, i + half); ++j) {
      ++counts[t.steps[static_cast<std::size_t>(j)].zone];
    }
    const ZoneId own = t.steps[static_cast<std::size_t>(i)].zone;
    int top = 0;
    for (const auto& [z, c] : counts) top = std::max(top, c);
    ZoneId pick = own;
    if (counts[own] != top) {
      for (const auto& [z, c] : counts) {
        if (c == top) {
          pick = z;
          break;
        }
      }
    }
    out.steps[static_cast<std::size_t>(i)].zone = pick;
  }
  return out;
}

/// Reconstructs one trajectory per tag in the stream by featurizing with
/// the model's own windowing and gateway layout.
inline InferResult infer(const ZoneModel& model, std::span<const RssiObservation> observations,
                         const Deployment& deployment, const InferOptions& options = {}) {
  InferResult result;
  const std::set<std::string> layout(model.gateway_order.begin(), model.gateway_order.end());
  std::set<std::string> unknown;
  std::set<std::string> tags;
  for (const auto& o : observations) {
    tags.insert(o.tag_id);
    if (!layout.contains(o.gateway_id)) unknown.insert(o.gateway_id);
  }
  for (const auto& g : unknown) {
    result.warnings.push_back("gateway " + g + " is not in the model layout; its readings are ignored");
  }
  for (const auto& g : deployment.gateways) {
    if (!layout.contains(g.id)) {
      result.warnings.push_back("deployment gateway " + g.id + " is unknown to the model");
    }
  }

  auto seg = segment(observations, model.windowing, model.gateway_order);
  result.dropped_windows = seg.dropped_windows;
  result.ignored_observations = seg.ignored_observations;

  std::map<std::string, Trajectory> by_tag;
  for (const auto& tag : tags) by_tag[tag].tag_id = tag;
  for (const auto& s : seg.samples) {
    by_tag[s.tag_id].steps.push_back({s.window, model.predict(s.features)});
  }
  for (auto& [tag, traj] : by_tag) {
    result.trajectories.push_back(majority_filter(traj, options.smoothing_window));
  }
  return result;
}

// ---- occupancy -----------------------------------------------------------------

struct TagOccupancy {
  std::string tag_id;
  std::size_t total_steps = 0;
  std::map<ZoneId, std::size_t> steps;

  double rate(ZoneId z) const {
    const auto it = steps.find(z);
    if (it == steps.end() || total_steps == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total_steps);
  }
};

struct OccupancyStats {
  std::vector<TagOccupancy> per_tag;  // tags with at least one step
  std::map<ZoneId, std::size_t> zone_steps;
  std::size_t total_steps = 0;

  double rate(ZoneId z) const {
    const auto it = zone_steps.find(z);
    if (it == zone_steps.end() || total_steps == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total_steps);
  }
};

inline OccupancyStats occupancy(std::span<const Trajectory> trajectories) {
  OccupancyStats stats;
  for (const auto& t : trajectories) {
    if (t.steps.empty()) continue;
    TagOccupancy tag{t.tag_id, t.steps.size(), {}};
    for (const auto& s : t.steps) {
      ++tag.steps[s.zone];
      ++stats.zone_steps[s.zone];
    }
    stats.total_steps += t.steps.size();
    stats.per_tag.push_back(std::move(tag));
  }
  return stats;
}

// ---- visits -----------------------------------------------------------------------

struct Visit {
  std::string tag_id;
  ZoneId zone;
  Millis start = 0;  // start of the first step window
  Millis end = 0;    // end of the last step window
  std::size_t steps = 0;
};

struct VisitStats {
  std::map<ZoneId, std::size_t> counts;
  std::vector<Visit> visits;  // tag order, then time
};

/// Missing windows between two consecutive steps.
inline Millis missing_windows(const TrajectoryStep& a, const TrajectoryStep& b) {
  const Millis d = std::max<Millis>(a.window.duration, 1);
  return std::max<Millis>(0, (b.window.start - a.window.end()) / d);
}

/// A visit is a maximal run of steps in one zone; a gap of more than
/// gap_tolerance missing windows ends the run. Runs with fewer than
/// min_visit_len steps are discarded.
inline VisitStats visits(std::span<const Trajectory> trajectories, int gap_tolerance = 1,
                         int min_visit_len = 1) {
  if (gap_tolerance < 0) throw Error("gap_tolerance must be >= 0");
  if (min_visit_len < 1) throw Error("min_visit_len must be >= 1");
  VisitStats stats;
  for (const auto& t : trajectories) {
    std::optional<Visit> run;
    auto close = [&] {
      if (run && run->steps >= static_cast<std::size_t>(min_visit_len)) {
        ++stats.counts[run->zone];
        stats.visits.push_back(*run);
      }
      run.reset();
    };
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      const bool extends = run && run->zone == s.zone &&
                           missing_windows(t.steps[i - 1], s) <= gap_tolerance;
      if (!extends) {
        close();
        run = Visit{t.tag_id, s.zone, s.window.start, s.window.end(), 0};
      }
      run->end = s.window.end();
      ++run->steps;
    }
    close();
  }
  return stats;
}

// ---- hourly series ------------------------------------------------------------------

struct HourlyBucket {
  Millis start = 0;
  std::size_t entries = 0;   // visits starting in the bucket
  std::size_t presence = 0;  // distinct tags with a step overlapping the bucket
};

struct HourlyOptions {
  Millis bucket_ms = kMillisPerHour;
  /// Local time = UTC + offset; buckets and clock hours follow local time.
  Millis tz_offset_ms = 0;
  int gap_tolerance = 1;
  int min_visit_len = 1;
  /// Explicit [begin, end) range; otherwise whole local days spanning the steps.
  std::optional<std::pair<Millis, Millis>> range;
};

inline Millis bucket_floor(Millis t, Millis bucket, Millis offset) {
  return floor_div(t + offset, bucket) * bucket - offset;
}

/// Bucket range shared by all zones of one analysis.
inline std::optional<std::pair<Millis, Millis>> hourly_range(
    std::span<const Trajectory> trajectories, const HourlyOptions& opt) {
  if (opt.range) {
    return std::pair{bucket_floor(opt.range->first, opt.bucket_ms, opt.tz_offset_ms),
                     opt.range->second};
  }
  std::optional<Millis> lo, hi;
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) {
      lo = lo ? std::min(*lo, s.window.start) : s.window.start;
      hi = hi ? std::max(*hi, s.window.end()) : s.window.end();
    }
  }
  if (!lo) return std::nullopt;
  const Millis begin = bucket_floor(*lo, kMillisPerDay, opt.tz_offset_ms);
  const Millis end = bucket_floor(*hi - 1, kMillisPerDay, opt.tz_offset_ms) + kMillisPerDay;
  return std::pair{begin, end};
}

/// Entries and presence of one zone per clock-hour bucket. A visit counts
/// as an entry in the bucket where it starts; presence counts every bucket
/// the tag's steps touch.
inline std::vector<HourlyBucket> hourly_visit_counts(std::span<const Trajectory> trajectories,
                                                     ZoneId zone, const HourlyOptions& opt = {}) {
  if (opt.bucket_ms <= 0) throw Error("bucket width must be positive");
  const auto range = hourly_range(trajectories, opt);
  if (!range) return {};
  const auto [begin, end] = *range;
  std::vector<HourlyBucket> series;
  for (Millis b = begin; b < end; b += opt.bucket_ms) series.push_back({b, 0, 0});
  if (series.empty()) return series;
  auto index_of = [&](Millis t) -> std::optional<std::size_t> {
    if (t < begin || t >= end) return std::nullopt;
    return static_cast<std::size_t>((t - begin) / opt.bucket_ms);
  };

  for (const auto& v : visits(trajectories, opt.gap_tolerance, opt.min_visit_len).visits) {
    if (v.zone != zone) continue;
    if (auto i = index_of(v.start)) ++series[*i].entries;
  }
  std::vector<std::set<std::string_view>> present(series.size());
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) {
      if (s.zone != zone) continue;
      const Millis first = std::max(s.window.start, begin);
      const Millis last = std::min(s.window.end() - 1, end - 1);
      for (Millis b = bucket_floor(first, opt.bucket_ms, opt.tz_offset_ms); b <= last;
           b += opt.bucket_ms) {
        if (auto i = index_of(std::max(b, begin))) present[*i].insert(t.tag_id);
      }
    }
  }
  for (std::size_t i = 0; i < series.size(); ++i) series[i].presence = present[i].size();
  return series;
}

// ---- CSV ---------------------------------------------------------------------------

inline constexpr std::string_view kTrajectoryHeader = "tag_id,window_start_ms,window_end_ms,zone";

inline std::string trajectories_csv(std::span<const Trajectory> trajectories) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) {
      out += text::csv_field(t.tag_id) + "," + std::to_string(s.window.start) + "," +
             std::to_string(s.window.end()) + "," + std::to_string(s.zone.index) + "\n";
    }
  }
  return out;
}

inline std::vector<Trajectory> load_trajectories(const std::string& path) {
  const auto table = text::read_csv_table(path);
  if (text::join_csv(table.header) != kTrajectoryHeader) {
    throw ParseError(path, 1, "header must be " + std::string(kTrajectoryHeader));
  }
  std::map<std::string, Trajectory> by_tag;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto start = text::parse_int(f[1]);
    const auto end = text::parse_int(f[2]);
    const auto zone = text::parse_int(f[3]);
    if (!start || !end || !zone || *end <= *start || *zone < 1) {
      throw ParseError(path, i + 2, "malformed trajectory row");
    }
    auto& t = by_tag[f[0]];
    t.tag_id = f[0];
    t.steps.push_back({{*start, *end - *start}, ZoneId{static_cast<int>(*zone)}});
  }
  std::vector<Trajectory> out;
  for (auto& [tag, t] : by_tag) {
    std::sort(t.steps.begin(), t.steps.end(),
              [](const auto& a, const auto& b) { return a.window.start < b.window.start; });
    for (std::size_t i = 1; i < t.steps.size(); ++i) {
      if (t.steps[i].window.start < t.steps[i - 1].window.end()) {
        throw Error(path + ": overlapping windows for tag " + tag);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<ZoneId> zones_in(std::span<const Trajectory> trajectories) {
  std::set<ZoneId> zones;
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) zones.insert(s.zone);
  }
  return {zones.begin(), zones.end()};
}

/// Wide matrix: one row per tag plus an "ALL" row, rate per zone column.
inline std::string occupancy_csv(const OccupancyStats& stats, std::span<const ZoneId> zones) {
  std::string out = "tag_id,total_steps";
  for (auto z : zones) out += ",zone_" + std::to_string(z.index);
  out += "\n";
  for (const auto& t : stats.per_tag) {
    out += text::csv_field(t.tag_id) + "," + std::to_string(t.total_steps);
    for (auto z : zones) out += "," + text::format_double(t.rate(z));
    out += "\n";
  }
  out += "ALL," + std::to_string(stats.total_steps);
  for (auto z : zones) out += "," + text::format_double(stats.rate(z));
  out += "\n";
  return out;
}

inline std::string visits_csv(const VisitStats& stats, std::span<const ZoneId> zones) {
  std::string out = "zone,visits\n";
  for (auto z : zones) {
    const auto it = stats.counts.find(z);
    out += std::to_string(z.index) + "," +
           std::to_string(it == stats.counts.end() ? 0 : it->second) + "\n";
  }
  return out;
}

}  // namespace iaqmob
