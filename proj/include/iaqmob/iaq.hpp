#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iaqmob/core.hpp"
#include "iaqmob/error.hpp"
#include "iaqmob/rng.hpp"
#include "iaqmob/text.hpp"
#include "iaqmob/trajectory.hpp"

namespace iaqmob {

enum class Pollutant { co2, pm25, pm10, voc, temperature };

inline constexpr std::array<Pollutant, 5> kAllPollutants = {
    Pollutant::co2, Pollutant::pm25, Pollutant::pm10, Pollutant::voc, Pollutant::temperature};

inline std::string to_string(Pollutant p) {
  switch (p) {
    case Pollutant::co2: return "co2";
    case Pollutant::pm25: return "pm25";
    case Pollutant::pm10: return "pm10";
    case Pollutant::voc: return "voc";
    case Pollutant::temperature: return "temperature";
  }
  return "co2";
}

inline Pollutant parse_pollutant(std::string_view s) {
  for (auto p : kAllPollutants) {
    if (to_string(p) == s) return p;
  }
  throw Error("unknown pollutant: " + std::string(s));
}

struct AlignedBucket {
  Millis start = 0;
  std::size_t visit_count = 0;
  std::size_t presence_count = 0;
  std::size_t readings = 0;
  double co2 = 0.0;
  double pm25 = 0.0;
  double pm10 = 0.0;
  double voc = 0.0;
  double temperature = 0.0;

  double value(Pollutant p) const {
    switch (p) {
      case Pollutant::co2: return co2;
      case Pollutant::pm25: return pm25;
      case Pollutant::pm10: return pm10;
      case Pollutant::voc: return voc;
      case Pollutant::temperature: return temperature;
    }
    return co2;
  }
};

/// Hourly mobility joined with the mean readings of the zone's sensor.
/// Buckets missing either stream are absent.
struct AlignedSeries {
  ZoneId zone;
  std::string sensor_id;
  std::vector<AlignedBucket> buckets;

  std::vector<double> values(Pollutant p) const {
    std::vector<double> out;
    for (const auto& b : buckets) out.push_back(b.value(p));
    return out;
  }
  std::vector<double> visit_counts() const {
    std::vector<double> out;
    for (const auto& b : buckets) out.push_back(static_cast<double>(b.visit_count));
    return out;
  }
  std::vector<Millis> starts() const {
    std::vector<Millis> out;
    for (const auto& b : buckets) out.push_back(b.start);
    return out;
  }
};

struct AlignOptions {
  Millis bucket_ms = kMillisPerHour;
  Millis tz_offset_ms = 0;
};

inline AlignedSeries align(std::span<const IaqReading> readings,
                           std::span<const HourlyBucket> mobility, const Deployment& deployment,
                           ZoneId zone, const AlignOptions& opt = {}) {
  AlignedSeries out;
  out.zone = zone;
  out.sensor_id = sensor_for_zone(deployment, zone);

  struct Sum {
    std::size_t n = 0;
    double co2 = 0, pm25 = 0, pm10 = 0, voc = 0, temperature = 0;
  };
  std::map<Millis, Sum> sums;
  for (const auto& r : readings) {
    if (r.sensor_id != out.sensor_id) continue;
    auto& s = sums[bucket_floor(r.timestamp, opt.bucket_ms, opt.tz_offset_ms)];
    ++s.n;
    s.co2 += r.co2;
    s.pm25 += r.pm25;
    s.pm10 += r.pm10;
    s.voc += r.voc;
    s.temperature += r.temperature;
  }
  for (const auto& m : mobility) {
    const auto it = sums.find(m.start);
    if (it == sums.end()) continue;
    const auto& s = it->second;
    const double n = static_cast<double>(s.n);
    out.buckets.push_back({m.start, m.entries, m.presence, s.n, s.co2 / n, s.pm25 / n,
                           s.pm10 / n, s.voc / n, s.temperature / n});
  }
  std::sort(out.buckets.begin(), out.buckets.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

// ---- correlation ------------------------------------------------------------------

/// Product-moment correlation. nullopt when either series has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: series lengths differ");
  if (x.size() < 3) throw Error("pearson: need at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Ranks starting at 1, ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: series lengths differ");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

struct LaggedCorrelation {
  std::vector<std::pair<int, std::optional<double>>> by_lag;  // lags -L..L
  std::optional<int> best_lag;
  std::optional<double> best_r;
};

/// r between x[i] and y[i + lag] for every lag in [-L, L]. Best: largest |r|,
/// then smaller |lag|, then negative before positive.
inline LaggedCorrelation lagged_correlation(std::span<const double> x, std::span<const double> y,
                                            int max_lag) {
  if (x.size() != y.size()) throw Error("lagged correlation: series lengths differ");
  if (max_lag < 0) throw Error("max lag must be >= 0");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n - max_lag < 3) {
    throw Error("lagged correlation: lag " + std::to_string(max_lag) + " leaves fewer than 3 of " +
                std::to_string(n) + " points");
  }
  LaggedCorrelation out;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const std::ptrdiff_t len = n - std::abs(lag);
    const auto xs = x.subspan(static_cast<std::size_t>(std::max(0, -lag)), static_cast<std::size_t>(len));
    const auto ys = y.subspan(static_cast<std::size_t>(std::max(0, lag)), static_cast<std::size_t>(len));
    const auto r = pearson(xs, ys);
    out.by_lag.emplace_back(lag, r);
    if (!r) continue;
    bool better = !out.best_r;
    if (!better) {
      const double a = std::abs(*r), b = std::abs(*out.best_r);
      const int la = std::abs(lag), lb = std::abs(*out.best_lag);
      better = a > b || (a == b && (la < lb || (la == lb && lag < *out.best_lag)));
    }
    if (better) {
      out.best_lag = lag;
      out.best_r = r;
    }
  }
  return out;
}

// ---- busy-hours contrast ------------------------------------------------------------

struct BusyHours {
  int start_hour = 8;  // inclusive
  int end_hour = 18;   // exclusive
  Millis tz_offset_ms = 0;

  bool contains(Millis t) const {
    const Millis local = t + tz_offset_ms;
    const auto hour = static_cast<int>(floor_div(local - floor_div(local, kMillisPerDay) * kMillisPerDay,
                                                 kMillisPerHour));
    return hour >= start_hour && hour < end_hour;
  }
};

struct Contrast {
  double mean_busy = 0.0;
  double mean_off = 0.0;
  double delta = 0.0;
  double p_value = 1.0;
  std::size_t n_busy = 0;
  std::size_t n_off = 0;
};

/// mean(first n_busy) - mean(rest) under `permutations` seeded random
/// reassignments of the group labels. Depends only on the multiset of
/// values, the group size and the seed, never on which buckets were
/// originally busy.
inline std::vector<double> permutation_null(std::span<const double> values, std::size_t n_busy,
                                            int permutations, std::uint64_t seed) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  const double nb = static_cast<double>(n_busy);
  const double no = static_cast<double>(v.size() - n_busy);
  Rng rng(seed);
  std::vector<double> null;
  null.reserve(static_cast<std::size_t>(std::max(permutations, 0)));
  for (int p = 0; p < permutations; ++p) {
    // Partial Fisher-Yates: only the first n_busy slots need to be drawn.
    for (std::size_t i = 0; i < n_busy; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(v.size() - i));
      std::swap(v[i], v[j]);
    }
    double busy = 0.0;
    for (std::size_t i = 0; i < n_busy; ++i) busy += v[i];
    null.push_back(busy / nb - (total - busy) / no);
  }
  return null;
}

/// Two-sided permutation test of busy minus off-hours means. The observed
/// labeling counts as one of the `permutations`, so p lies in
/// [1/permutations, 1].
inline Contrast busy_hours_contrast(std::span<const double> values, std::span<const Millis> starts,
                                    const BusyHours& busy, int permutations, std::uint64_t seed) {
  if (values.size() != starts.size()) throw Error("busy contrast: series lengths differ");
  if (permutations < 1) throw Error("permutations must be >= 1");
  std::vector<double> grouped;  // busy first, then off
  std::vector<double> off;
  for (std::size_t i = 0; i < values.size(); ++i) {
    (busy.contains(starts[i]) ? grouped : off).push_back(values[i]);
  }
  Contrast c;
  c.n_busy = grouped.size();
  c.n_off = off.size();
  if (c.n_busy == 0 || c.n_off == 0) throw Error("busy contrast: a group is empty");
  c.mean_busy = std::accumulate(grouped.begin(), grouped.end(), 0.0) / static_cast<double>(c.n_busy);
  c.mean_off = std::accumulate(off.begin(), off.end(), 0.0) / static_cast<double>(c.n_off);
  c.delta = c.mean_busy - c.mean_off;
  grouped.insert(grouped.end(), off.begin(), off.end());

  double scale = 1.0;
  for (double v : grouped) scale = std::max(scale, std::abs(v));
  const double threshold = std::abs(c.delta) - 1e-9 * scale;
  std::size_t extreme = 1;  // the observed labeling
  for (double d : permutation_null(grouped, c.n_busy, permutations - 1, seed)) {
    if (std::abs(d) >= threshold) ++extreme;
  }
  c.p_value = static_cast<double>(extreme) / static_cast<double>(permutations);
  return c;
}

// ---- response model -------------------------------------------------------------------

/// pollutant ≈ intercept + visit_coef·visits + presence_coef·presence
struct ResponseModel {
  Pollutant pollutant = Pollutant::co2;
  double intercept = 0.0;
  double visit_coef = 0.0;
  double presence_coef = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  /// False when the pollutant has zero variance; r2 is then reported as 0.
  bool r2_defined = true;
  bool ridge_used = false;
  std::size_t n = 0;
};

inline constexpr double kRidgeLambda = 1e-8;

namespace detail {

/// Gaussian elimination with partial pivoting on a 3x3 system. Returns
/// nullopt when a pivot is negligible relative to the matrix scale.
inline std::optional<std::array<double, 3>> solve3(std::array<std::array<double, 3>, 3> a,
                                                   std::array<double, 3> b) {
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return std::nullopt;
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 3; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) <= 1e-12 * scale) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, 3> x{};
  for (std::size_t i = 3; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < 3; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

/// Ordinary least squares through the normal equations; collinear inputs
/// fall back to a ridge of kRidgeLambda on the diagonal.
inline ResponseModel fit_response(const AlignedSeries& aligned, Pollutant pollutant) {
  const auto& b = aligned.buckets;
  if (b.size() < 4) throw Error("response model needs at least 4 buckets");
  std::array<std::array<double, 3>, 3> xtx{};
  std::array<double, 3> xty{};
  for (const auto& bucket : b) {
    const std::array<double, 3> row = {1.0, static_cast<double>(bucket.visit_count),
                                       static_cast<double>(bucket.presence_count)};
    const double y = bucket.value(pollutant);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) xtx[i][j] += row[i] * row[j];
      xty[i] += row[i] * y;
    }
  }
  ResponseModel m;
  m.pollutant = pollutant;
  m.n = b.size();
  auto beta = detail::solve3(xtx, xty);
  if (!beta) {
    for (std::size_t i = 0; i < 3; ++i) xtx[i][i] += kRidgeLambda;
    beta = detail::solve3(xtx, xty);
    m.ridge_used = true;
    if (!beta) throw Error("response model: normal equations are singular");
  }
  m.intercept = (*beta)[0];
  m.visit_coef = (*beta)[1];
  m.presence_coef = (*beta)[2];

  double mean = 0.0;
  for (const auto& bucket : b) mean += bucket.value(pollutant);
  mean /= static_cast<double>(b.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& bucket : b) {
    const double y = bucket.value(pollutant);
    const double fit = m.intercept + m.visit_coef * static_cast<double>(bucket.visit_count) +
                       m.presence_coef * static_cast<double>(bucket.presence_count);
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean) * (y - mean);
  }
  m.rmse = std::sqrt(ss_res / static_cast<double>(b.size()));
  if (ss_tot <= 0.0) {
    m.r2 = 0.0;
    m.r2_defined = false;
  } else {
    m.r2 = std::min(1.0, 1.0 - ss_res / ss_tot);
  }
  return m;
}

// ---- report ------------------------------------------------------------------------------

struct CorrelationConfig {
  int max_lag = 3;
  BusyHours busy;
  int permutations = 10000;
  std::uint64_t seed = 42;
  bool spearman = false;
};

struct CorrelationRow {
  ZoneId zone;
  std::string sensor_id;
  Pollutant pollutant = Pollutant::co2;
  std::size_t n = 0;
  std::optional<double> r;
  std::optional<double> spearman_r;
  std::optional<int> best_lag;
  std::optional<double> best_lag_r;
  std::optional<Contrast> contrast;
};

struct CorrelationReport {
  std::vector<CorrelationRow> rows;
  std::vector<ResponseModel> responses;  // aligned with rows
};

/// Every pollutant of one aligned zone: visit-count correlation, lag scan
/// (clamped so each lag keeps 3 points), busy contrast and response model.
/// Statistics that are undefined for this series are left empty.
inline void correlate_zone(const AlignedSeries& aligned, const CorrelationConfig& cfg,
                           CorrelationReport& report) {
  const auto visits = aligned.visit_counts();
  const auto starts = aligned.starts();
  for (auto p : kAllPollutants) {
    const auto y = aligned.values(p);
    CorrelationRow row{aligned.zone, aligned.sensor_id, p, y.size(), {}, {}, {}, {}, {}};
    if (y.size() >= 3) {
      row.r = pearson(visits, y);
      if (cfg.spearman) row.spearman_r = spearman(visits, y);
      const int lag = std::min(cfg.max_lag, static_cast<int>(y.size()) - 3);
      const auto lc = lagged_correlation(visits, y, std::max(lag, 0));
      row.best_lag = lc.best_lag;
      row.best_lag_r = lc.best_r;
    }
    const bool has_busy = std::any_of(starts.begin(), starts.end(), [&](Millis t) { return cfg.busy.contains(t); });
    const bool has_off = std::any_of(starts.begin(), starts.end(), [&](Millis t) { return !cfg.busy.contains(t); });
    if (has_busy && has_off) {
      row.contrast = busy_hours_contrast(y, starts, cfg.busy, cfg.permutations, cfg.seed);
    }
    report.rows.push_back(row);
    if (y.size() >= 4) {
      report.responses.push_back(fit_response(aligned, p));
    } else {
      ResponseModel empty;
      empty.pollutant = p;
      empty.r2_defined = false;
      report.responses.push_back(empty);
    }
  }
}

inline std::string optional_field(const std::optional<double>& v) {
  return v ? text::format_double(*v) : std::string();
}

inline std::string correlation_csv(const CorrelationReport& report) {
  std::string out =
      "zone,sensor_id,pollutant,n_buckets,pearson_r,spearman_r,best_lag,best_lag_r,"
      "mean_busy,mean_off,delta,p_value,resp_intercept,resp_visit_coef,resp_presence_coef,"
      "resp_rmse,resp_r2,resp_r2_defined\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const auto& m = report.responses[i];
    out += std::to_string(r.zone.index) + "," + text::csv_field(r.sensor_id) + "," +
           to_string(r.pollutant) + "," + std::to_string(r.n) + "," + optional_field(r.r) + "," +
           optional_field(r.spearman_r) + "," +
           (r.best_lag ? std::to_string(*r.best_lag) : std::string()) + "," +
           optional_field(r.best_lag_r) + ",";
    if (r.contrast) {
      out += text::format_double(r.contrast->mean_busy) + "," +
             text::format_double(r.contrast->mean_off) + "," +
             text::format_double(r.contrast->delta) + "," +
             text::format_double(r.contrast->p_value) + ",";
    } else {
      out += ",,,,";
    }
    if (m.n > 0) {
      out += text::format_double(m.intercept) + "," + text::format_double(m.visit_coef) + "," +
             text::format_double(m.presence_coef) + "," + text::format_double(m.rmse) + "," +
             text::format_double(m.r2) + "," + (m.r2_defined ? "1" : "0") + "\n";
    } else {
      out += ",,,,,0\n";
    }
  }
  return out;
}

inline std::string correlation_text(const CorrelationReport& report) {
  std::string out = "zone  sensor      pollutant    n    r       lag  r@lag   busy-off    p\n";
  for (const auto& r : report.rows) {
    auto opt = [](const std::optional<double>& v, int digits) {
      return v ? text::fixed(*v, digits) : std::string("n/a");
    };
    std::string line = std::to_string(r.zone.index);
    line.resize(6, ' ');
    line += r.sensor_id;
    line.resize(18, ' ');
    line += to_string(r.pollutant);
    line.resize(31, ' ');
    line += std::to_string(r.n);
    line.resize(36, ' ');
    line += opt(r.r, 3);
    line.resize(44, ' ');
    line += r.best_lag ? std::to_string(*r.best_lag) : "n/a";
    line.resize(49, ' ');
    line += opt(r.best_lag_r, 3);
    line.resize(57, ' ');
    if (r.contrast) {
      line += text::fixed(r.contrast->delta, 2);
      line.resize(68, ' ');
      line += text::fixed(r.contrast->p_value, 4);
    } else {
      line += "n/a";
    }
    out += line + "\n";
  }
  return out;
}

inline std::string aligned_csv(std::span<const AlignedSeries> series) {
  std::string out =
      "zone,sensor_id,bucket_start_ms,visit_count,presence_count,readings,co2,pm25,pm10,voc,"
      "temperature\n";
  for (const auto& s : series) {
    for (const auto& b : s.buckets) {
      out += std::to_string(s.zone.index) + "," + text::csv_field(s.sensor_id) + "," +
             std::to_string(b.start) + "," + std::to_string(b.visit_count) + "," +
             std::to_string(b.presence_count) + "," + std::to_string(b.readings) + "," +
             text::format_double(b.co2) + "," + text::format_double(b.pm25) + "," +
             text::format_double(b.pm10) + "," + text::format_double(b.voc) + "," +
             text::format_double(b.temperature) + "\n";
    }
  }
  return out;
}

}  // namespace iaqmob
