#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "iaqmob/classify.hpp"
#include "iaqmob/core.hpp"
#include "iaqmob/error.hpp"
#include "iaqmob/text.hpp"

namespace iaqmob {

template <typename T>
struct LoadResult {
  std::vector<T> records;  // ascending timestamp, stable
  std::size_t skipped = 0;
  std::size_t total_lines = 0;
  /// First problem seen in non-strict mode, empty when none.
  std::string first_error;
};

namespace detail {

// parse() returns an empty string on success, else the reason the line was
// rejected. line_offset accounts for lines already consumed (a CSV header).
template <typename T, typename ParseLine>
LoadResult<T> load_lines(std::istream& in, const std::string& source, bool strict,
                         std::size_t line_offset, ParseLine&& parse) {
  LoadResult<T> out;
  std::string line;
  std::size_t lineno = line_offset;
  while (std::getline(in, line)) {
    ++lineno;
    ++out.total_lines;
    T record;
    std::string why = parse(text::chomp(line), record);
    if (why.empty()) {
      out.records.push_back(std::move(record));
      continue;
    }
    if (strict) throw ParseError(source, lineno, why);
    if (out.first_error.empty()) out.first_error = source + ":" + std::to_string(lineno) + ": " + why;
    ++out.skipped;
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const T& a, const T& b) { return a.timestamp < b.timestamp; });
  return out;
}

}  // namespace detail

// ---- RSSI JSON lines --------------------------------------------------------

/// Parses {"ts": int ms, "tag": str, "gw": str, "rssi": number in [-120, 0]}.
/// Returns an empty string on success, else the reason.
inline std::string parse_rssi_line(std::string_view line, RssiObservation& obs) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return "invalid JSON";
  if (!j.is_object()) return "expected a JSON object";
  const auto ts = j.find("ts");
  const auto tag = j.find("tag");
  const auto gw = j.find("gw");
  const auto rssi = j.find("rssi");
  if (ts == j.end() || tag == j.end() || gw == j.end() || rssi == j.end()) {
    return "missing one of ts, tag, gw, rssi";
  }
  if (!ts->is_number_integer()) return "ts must be an integer";
  if (!tag->is_string() || !gw->is_string()) return "tag and gw must be strings";
  if (!rssi->is_number()) return "rssi must be a number";
  obs.timestamp = ts->get<Millis>();
  if (obs.timestamp <= 0) return "ts must be positive";
  obs.tag_id = tag->get<std::string>();
  obs.gateway_id = gw->get<std::string>();
  obs.rssi = rssi->get<double>();
  if (!(obs.rssi >= kMinRssi && obs.rssi <= kMaxRssi)) return "rssi outside [-120, 0]";
  return {};
}

inline LoadResult<RssiObservation> load_rssi(std::istream& in, const std::string& source,
                                             bool strict) {
  return detail::load_lines<RssiObservation>(in, source, strict, 0, parse_rssi_line);
}

inline LoadResult<RssiObservation> load_rssi(const std::string& path, bool strict) {
  auto in = text::open_input(path);
  return load_rssi(in, path, strict);
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

/// Writes observations as JSON lines with keys in ts, tag, gw, rssi order.
inline void write_rssi(std::ostream& out, std::span<const RssiObservation> observations) {
  std::unordered_map<std::string, std::string> quoted;
  auto q = [&](const std::string& s) -> const std::string& {
    auto it = quoted.find(s);
    if (it == quoted.end()) it = quoted.emplace(s, json_string(s)).first;
    return it->second;
  };
  std::string line;
  for (const auto& o : observations) {
    line.clear();
    line += "{\"ts\":";
    line += std::to_string(o.timestamp);
    line += ",\"tag\":";
    line += q(o.tag_id);
    line += ",\"gw\":";
    line += q(o.gateway_id);
    line += ",\"rssi\":";
    line += text::format_double(o.rssi);
    line += "}\n";
    out << line;
  }
}

inline void save_rssi(const std::string& path, std::span<const RssiObservation> observations) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file: " + path);
  write_rssi(out, observations);
  if (!out) throw Error("write failed: " + path);
}

// ---- IAQ CSV ------------------------------------------------------------------

inline constexpr std::string_view kIaqHeader =
    "ts,sensor_id,co2_ppm,pm25_ugm3,pm10_ugm3,voc_index,temp_c";

inline std::string parse_iaq_row(std::string_view line, IaqReading& r) {
  auto fields = text::split_csv(line);
  if (!fields) return "unterminated quote";
  if (fields->size() != 7) return "expected 7 fields";
  const auto& f = *fields;
  const auto ts = text::parse_int(f[0]);
  if (!ts || *ts <= 0) return "ts must be a positive integer";
  if (f[1].empty()) return "empty sensor_id";
  double values[5];
  static constexpr const char* names[] = {"co2_ppm", "pm25_ugm3", "pm10_ugm3", "voc_index",
                                          "temp_c"};
  for (int i = 0; i < 5; ++i) {
    const auto v = text::parse_double(f[static_cast<std::size_t>(i) + 2]);
    if (!v || !std::isfinite(*v)) return std::string(names[i]) + " is not a number";
    if (i < 4 && *v < 0.0) return std::string(names[i]) + " is negative";
    values[i] = *v;
  }
  r = {*ts, f[1], values[0], values[1], values[2], values[3], values[4]};
  return {};
}

/// The header must match exactly, in both strict and lenient modes.
inline LoadResult<IaqReading> load_iaq(std::istream& in, const std::string& source, bool strict) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError(source, 1, "missing header");
  if (text::chomp(header) != kIaqHeader) {
    throw ParseError(source, 1, "header must be " + std::string(kIaqHeader));
  }
  return detail::load_lines<IaqReading>(in, source, strict, 1, parse_iaq_row);
}

inline LoadResult<IaqReading> load_iaq(const std::string& path, bool strict) {
  auto in = text::open_input(path);
  return load_iaq(in, path, strict);
}

inline std::string iaq_csv(std::span<const IaqReading> readings) {
  std::string out = std::string(kIaqHeader) + "\n";
  for (const auto& r : readings) {
    out += std::to_string(r.timestamp) + "," + text::csv_field(r.sensor_id) + "," +
           text::format_double(r.co2) + "," + text::format_double(r.pm25) + "," +
           text::format_double(r.pm10) + "," + text::format_double(r.voc) + "," +
           text::format_double(r.temperature) + "\n";
  }
  return out;
}

// ---- ground truth CSV -----------------------------------------------------------

inline constexpr std::string_view kTruthHeader = "tag_id,start_ms,end_ms,zone,source";

inline std::string truth_csv(std::span<const GroundTruthInterval> intervals) {
  std::string out = std::string(kTruthHeader) + "\n";
  for (const auto& iv : intervals) {
    out += text::csv_field(iv.tag_id) + "," + std::to_string(iv.start) + "," +
           std::to_string(iv.end) + "," + std::to_string(iv.zone.index) + "," +
           to_string(iv.source) + "\n";
  }
  return out;
}

inline std::vector<GroundTruthInterval> load_truth(const std::string& path) {
  const auto table = text::read_csv_table(path);
  if (text::join_csv(table.header) != kTruthHeader) {
    throw ParseError(path, 1, "header must be " + std::string(kTruthHeader));
  }
  std::vector<GroundTruthInterval> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const auto start = text::parse_int(f[1]);
    const auto end = text::parse_int(f[2]);
    const auto zone = text::parse_int(f[3]);
    const auto source = parse_tag_source(f[4]);
    if (!start || !end || !zone || !source || *end <= *start || *zone < 1) {
      throw ParseError(path, i + 2, "malformed ground-truth row");
    }
    out.push_back({f[0], *start, *end, ZoneId{static_cast<int>(*zone)}, *source});
  }
  return out;
}

// ---- model files ----------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const ZoneModel& m) {
  using nlohmann::json;
  json classifier;
  if (const auto* knn = std::get_if<KnnParams>(&m.params)) {
    std::vector<int> labels;
    for (auto z : knn->labels) labels.push_back(z.index);
    classifier = {{"k", knn->k},
                  {"rows", knn->points.rows},
                  {"cols", knn->points.cols},
                  {"points", knn->points.data},
                  {"labels", labels}};
  } else {
    const auto& lin = std::get<LinearParams>(m.params);
    std::vector<int> classes;
    for (auto z : lin.classes) classes.push_back(z.index);
    classifier = {{"classes", classes},
                  {"rows", lin.weights.rows},
                  {"cols", lin.weights.cols},
                  {"weights", lin.weights.data}};
  }
  return {{"format_version", kModelFormatVersion},
          {"kind", to_string(m.kind)},
          {"windowing",
           {{"delta_t_s", m.windowing.delta_t_s},
            {"min_observations", m.windowing.min_observations},
            {"missing_rssi", m.windowing.missing_rssi}}},
          {"gateway_order", m.gateway_order},
          {"scaler", {{"mean", m.scaler.mean}, {"std", m.scaler.std_dev}}},
          {"classifier", classifier},
          {"training",
           {{"train_samples", m.info.train_samples},
            {"test_samples", m.info.test_samples},
            {"split_seed", m.info.split_seed},
            {"scenario", m.info.scenario}}}};
}

inline ZoneModel model_from_json(const nlohmann::json& j) {
  ZoneModel m;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model format_version " + std::to_string(version) +
                  " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto& w = j.at("windowing");
    m.windowing.delta_t_s = w.at("delta_t_s").get<double>();
    m.windowing.min_observations = w.at("min_observations").get<int>();
    m.windowing.missing_rssi = w.at("missing_rssi").get<double>();
    m.windowing.validate();
    m.gateway_order = j.at("gateway_order").get<std::vector<std::string>>();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.std_dev = j.at("scaler").at("std").get<std::vector<double>>();
    const std::size_t d = m.feature_length();
    if (m.gateway_order.empty() || m.scaler.mean.size() != d || m.scaler.std_dev.size() != d) {
      throw Error("model scaler does not match its " + std::to_string(m.gateway_order.size()) +
                  "-gateway feature layout");
    }
    const auto& c = j.at("classifier");
    if (m.kind == ModelKind::knn) {
      KnnParams p;
      p.k = c.at("k").get<int>();
      p.points.rows = c.at("rows").get<std::size_t>();
      p.points.cols = c.at("cols").get<std::size_t>();
      p.points.data = c.at("points").get<std::vector<double>>();
      for (int z : c.at("labels").get<std::vector<int>>()) p.labels.push_back(ZoneId{z});
      if (p.points.cols != d || p.points.data.size() != p.points.rows * p.points.cols ||
          p.labels.size() != p.points.rows || p.k < 1 ||
          static_cast<std::size_t>(p.k) > p.points.rows) {
        throw Error("inconsistent knn parameters");
      }
      m.params = std::move(p);
    } else {
      LinearParams p;
      for (int z : c.at("classes").get<std::vector<int>>()) p.classes.push_back(ZoneId{z});
      p.weights.rows = c.at("rows").get<std::size_t>();
      p.weights.cols = c.at("cols").get<std::size_t>();
      p.weights.data = c.at("weights").get<std::vector<double>>();
      if (p.weights.cols != d + 1 || p.weights.rows != p.classes.size() ||
          p.weights.data.size() != p.weights.rows * p.weights.cols || p.classes.size() < 2 ||
          !std::is_sorted(p.classes.begin(), p.classes.end())) {
        throw Error("inconsistent linear model parameters");
      }
      m.params = std::move(p);
    }
    const auto& t = j.at("training");
    m.info.train_samples = t.at("train_samples").get<std::size_t>();
    m.info.test_samples = t.at("test_samples").get<std::size_t>();
    m.info.split_seed = t.at("split_seed").get<std::uint64_t>();
    m.info.scenario = t.at("scenario").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid model document: ") + e.what());
  }
  return m;
}

inline void save_model(const ZoneModel& model, const std::string& path) {
  text::write_file(path, model_to_json(model).dump() + "\n");
}

inline ZoneModel load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace iaqmob
