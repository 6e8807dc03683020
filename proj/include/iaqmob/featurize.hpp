#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "iaqmob/core.hpp"
#include "iaqmob/error.hpp"
#include "iaqmob/text.hpp"

namespace iaqmob {

/// Per-gateway statistics, in feature-block order.
inline constexpr std::array<std::string_view, 5> kStatNames = {"mean", "q25", "median",
                                                                "q75", "p90"};
inline constexpr std::size_t kStatsPerGateway = kStatNames.size();

/// Quantile levels behind the q25/median/q75/p90 slots. The upper statistic
/// is the 90th percentile (ninth decile).
inline constexpr std::array<double, 4> kQuantileLevels = {0.25, 0.5, 0.75, 0.9};

struct WindowingConfig {
  double delta_t_s = 20.0;
  int min_observations = 3;
  /// Value written into all five slots of a gateway that never heard the tag.
  double missing_rssi = -100.0;

  Millis delta_ms() const {
    const auto ms = static_cast<Millis>(std::llround(delta_t_s * 1000.0));
    if (!(delta_t_s > 0.0) || ms < 1) throw Error("window length must be positive");
    return ms;
  }

  void validate() const {
    (void)delta_ms();
    if (min_observations < 1) throw Error("min_observations must be >= 1");
  }
};

using FeatureVector = std::vector<double>;

struct FingerprintSample {
  std::string tag_id;
  TimeWindow window;
  FeatureVector features;
  std::optional<ZoneId> label;
  std::optional<TagSource> source;
};

// ---- quantiles --------------------------------------------------------------

/// Linear interpolation between closest ranks on already sorted input.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("quantile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile level outside [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size() || frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Quantile at level q: position q*(n-1) on the sorted values, interpolated.
inline double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

/// [mean, q25, median, q75, p90] of one gateway's readings.
inline std::array<double, kStatsPerGateway> gateway_block(std::vector<double> readings) {
  std::sort(readings.begin(), readings.end());
  double sum = 0.0;
  for (double v : readings) sum += v;
  std::array<double, kStatsPerGateway> block{};
  block[0] = sum / static_cast<double>(readings.size());
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    block[i + 1] = quantile_sorted(readings, kQuantileLevels[i]);
  }
  return block;
}

// ---- segmentation -----------------------------------------------------------

struct SegmentResult {
  std::vector<FingerprintSample> samples;
  /// (tag, window) groups that had too few readings on every gateway.
  std::size_t dropped_windows = 0;
  /// Readings from gateways outside the feature layout.
  std::size_t ignored_observations = 0;
};

/// Tumbling-window fingerprints, one per (tag, window) with at least
/// min_observations readings on some gateway. Windows start at multiples of
/// the window length, which is the first timestamp rounded down. Output is
/// ordered by tag id, then window start.
inline SegmentResult segment(std::span<const RssiObservation> observations,
                             const WindowingConfig& cfg,
                             std::span<const std::string> gateway_order) {
  cfg.validate();
  const Millis delta = cfg.delta_ms();
  const std::size_t m = gateway_order.size();
  if (m == 0) throw Error("feature layout has no gateways");

  std::unordered_map<std::string_view, std::size_t> gw_index;
  for (std::size_t i = 0; i < m; ++i) gw_index.emplace(gateway_order[i], i);

  using Readings = std::vector<std::vector<double>>;
  std::map<std::string_view, std::map<Millis, Readings>> groups;
  SegmentResult result;
  for (const auto& obs : observations) {
    const auto it = gw_index.find(obs.gateway_id);
    if (it == gw_index.end()) {
      ++result.ignored_observations;
      continue;
    }
    const Millis start = floor_div(obs.timestamp, delta) * delta;
    auto& readings = groups[obs.tag_id][start];
    if (readings.empty()) readings.resize(m);
    readings[it->second].push_back(obs.rssi);
  }

  for (auto& [tag, windows] : groups) {
    for (auto& [start, readings] : windows) {
      const bool enough = std::any_of(readings.begin(), readings.end(), [&](const auto& r) {
        return r.size() >= static_cast<std::size_t>(cfg.min_observations);
      });
      if (!enough) {
        ++result.dropped_windows;
        continue;
      }
      FingerprintSample sample;
      sample.tag_id = std::string(tag);
      sample.window = {start, delta};
      sample.features.reserve(m * kStatsPerGateway);
      for (auto& r : readings) {
        if (r.empty()) {
          sample.features.insert(sample.features.end(), kStatsPerGateway, cfg.missing_rssi);
        } else {
          const auto block = gateway_block(std::move(r));
          sample.features.insert(sample.features.end(), block.begin(), block.end());
        }
      }
      result.samples.push_back(std::move(sample));
    }
  }
  return result;
}

inline SegmentResult segment(std::span<const RssiObservation> observations,
                             const WindowingConfig& cfg, const Deployment& deployment) {
  const auto order = deployment.gateway_order();
  return segment(observations, cfg, order);
}

// ---- labeling ---------------------------------------------------------------

/// Per-tag interval lookup; rejects overlapping intervals of one tag.
class GroundTruthIndex {
 public:
  explicit GroundTruthIndex(std::span<const GroundTruthInterval> intervals) {
    for (const auto& iv : intervals) {
      if (iv.end <= iv.start) {
        throw Error("empty ground-truth interval for tag " + iv.tag_id);
      }
      by_tag_[iv.tag_id].push_back(iv);
    }
    for (auto& [tag, list] : by_tag_) {
      std::sort(list.begin(), list.end(),
                [](const auto& a, const auto& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < list.size(); ++i) {
        if (list[i].start < list[i - 1].end) {
          throw Error("overlapping ground-truth intervals for tag " + tag);
        }
      }
    }
  }

  /// Interval fully containing [start, end), if any.
  const GroundTruthInterval* containing(const std::string& tag, Millis start,
                                        Millis end) const {
    const auto it = by_tag_.find(tag);
    if (it == by_tag_.end()) return nullptr;
    const auto& list = it->second;
    auto pos = std::upper_bound(list.begin(), list.end(), start,
                                [](Millis t, const auto& iv) { return t < iv.start; });
    if (pos == list.begin()) return nullptr;
    --pos;
    if (pos->start <= start && end <= pos->end) return &*pos;
    return nullptr;
  }

 private:
  std::map<std::string, std::vector<GroundTruthInterval>> by_tag_;
};

/// Sets label and source on every sample whose window lies entirely inside
/// one ground-truth interval; other samples stay unlabeled.
inline std::vector<FingerprintSample> label_samples(
    std::vector<FingerprintSample> samples,
    std::span<const GroundTruthInterval> ground_truth) {
  const GroundTruthIndex index(ground_truth);
  for (auto& s : samples) {
    const auto* iv = index.containing(s.tag_id, s.window.start, s.window.end());
    if (iv) {
      s.label = iv->zone;
      s.source = iv->source;
    } else {
      s.label.reset();
      s.source.reset();
    }
  }
  return samples;
}

inline std::vector<FingerprintSample> labeled_only(std::vector<FingerprintSample> samples) {
  std::erase_if(samples, [](const auto& s) { return !s.label.has_value(); });
  return samples;
}

// ---- scaling ----------------------------------------------------------------

inline constexpr double kDegenerateStd = 1e-9;

/// Per-dimension standardization with population standard deviation.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> std_dev;

  std::size_t dimensions() const { return mean.size(); }

  FeatureVector apply(std::span<const double> x) const {
    if (x.size() != mean.size()) {
      throw Error("feature length " + std::to_string(x.size()) + " does not match scaler " +
                  std::to_string(mean.size()));
    }
    FeatureVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / std_dev[j];
    return out;
  }
};

inline Scaler fit_scaler(std::span<const FeatureVector> rows) {
  if (rows.size() < 2) throw Error("scaler needs at least 2 training samples");
  const std::size_t d = rows.front().size();
  Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (r.size() != d) throw Error("inconsistent feature lengths");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (auto& v : s.mean) v /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = r[j] - s.mean[j];
      s.std_dev[j] += c * c;
    }
  }
  for (auto& v : s.std_dev) {
    v = std::sqrt(v / n);
    if (v < kDegenerateStd) v = 1.0;
  }
  return s;
}

inline Scaler fit_scaler(std::span<const FingerprintSample> samples) {
  std::vector<FeatureVector> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.features);
  return fit_scaler(std::span<const FeatureVector>(rows));
}

inline FeatureVector apply_scaler(const Scaler& scaler, std::span<const double> x) {
  return scaler.apply(x);
}

// ---- feature dump -----------------------------------------------------------

inline std::vector<std::string> feature_column_names(std::span<const std::string> gateways) {
  std::vector<std::string> names;
  for (const auto& g : gateways) {
    for (auto stat : kStatNames) names.push_back(g + "_" + std::string(stat));
  }
  return names;
}

/// CSV: tag_id, window_start_ms, label (empty when unlabeled), then one
/// column per gateway statistic.
inline std::string features_csv(std::span<const FingerprintSample> samples,
                                std::span<const std::string> gateways) {
  std::vector<std::string> header = {"tag_id", "window_start_ms", "label"};
  for (auto& n : feature_column_names(gateways)) header.push_back(std::move(n));
  std::string out = text::join_csv(header) + "\n";
  for (const auto& s : samples) {
    out += text::csv_field(s.tag_id);
    out += ',';
    out += std::to_string(s.window.start);
    out += ',';
    if (s.label) out += std::to_string(s.label->index);
    for (double v : s.features) {
      out += ',';
      out += text::format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace iaqmob
