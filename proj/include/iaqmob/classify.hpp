#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iaqmob/core.hpp"
#include "iaqmob/error.hpp"
#include "iaqmob/featurize.hpp"
#include "iaqmob/rng.hpp"

namespace iaqmob {

enum class ModelKind { knn, logreg, linsvm };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::knn: return "knn";
    case ModelKind::logreg: return "logreg";
    case ModelKind::linsvm: return "linsvm";
  }
  return "knn";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "knn") return ModelKind::knn;
  if (s == "logreg") return ModelKind::logreg;
  if (s == "linsvm") return ModelKind::linsvm;
  throw Error("unknown model kind: " + std::string(s));
}

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// ---- model ------------------------------------------------------------------

struct KnnParams {
  int k = 5;
  Matrix points;  // scaled training matrix
  std::vector<ZoneId> labels;
};

/// One row per class: d feature weights followed by the bias. Used for both
/// multinomial logistic regression and one-vs-rest linear SVM.
struct LinearParams {
  std::vector<ZoneId> classes;  // ascending
  Matrix weights;
};

struct TrainingInfo {
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::uint64_t split_seed = 0;
  std::string scenario;
};

/// The deployable localizer: scaler, windowing and classifier together.
struct ZoneModel {
  ModelKind kind = ModelKind::knn;
  Scaler scaler;
  WindowingConfig windowing;
  std::vector<std::string> gateway_order;
  std::variant<KnnParams, LinearParams> params;
  TrainingInfo info;

  std::size_t feature_length() const { return gateway_order.size() * kStatsPerGateway; }

  ZoneId predict(std::span<const double> features) const;
  /// Classifier on features already passed through the scaler.
  ZoneId predict_scaled(std::span<const double> scaled) const;
};

// ---- KNN ----------------------------------------------------------------------

/// Majority vote of the k nearest training points (Euclidean). Vote ties go
/// to the class with the smaller mean neighbor distance, then the lower zone
/// index; equal distances at the k-th rank keep the lower sample index.
inline ZoneId knn_predict(const KnnParams& p, std::span<const double> q) {
  const std::size_t n = p.points.rows;
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = {squared_distance(p.points.row(i), q), i};
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(p.k), n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  struct Vote {
    int count = 0;
    double dist_sum = 0.0;
  };
  std::map<ZoneId, Vote> votes;
  for (std::size_t i = 0; i < k; ++i) {
    auto& v = votes[p.labels[dist[i].second]];
    ++v.count;
    v.dist_sum += std::sqrt(dist[i].first);
  }
  std::optional<ZoneId> best;
  Vote best_vote;
  for (const auto& [zone, v] : votes) {  // ascending zone order
    if (!best || v.count > best_vote.count ||
        (v.count == best_vote.count &&
         v.dist_sum / v.count < best_vote.dist_sum / best_vote.count)) {
      best = zone;
      best_vote = v;
    }
  }
  return *best;
}

// ---- linear models --------------------------------------------------------------

/// Labels mapped to row indices of LinearParams::classes.
struct EncodedLabels {
  std::vector<ZoneId> classes;
  std::vector<std::size_t> y;
};

inline EncodedLabels encode_labels(std::span<const ZoneId> labels) {
  EncodedLabels e;
  e.classes.assign(labels.begin(), labels.end());
  std::sort(e.classes.begin(), e.classes.end());
  e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
  e.y.reserve(labels.size());
  for (auto z : labels) {
    e.y.push_back(static_cast<std::size_t>(
        std::lower_bound(e.classes.begin(), e.classes.end(), z) - e.classes.begin()));
  }
  return e;
}

inline double decision_value(const Matrix& w, std::size_t c, std::span<const double> x) {
  const auto r = w.row(c);
  return dot(r.first(x.size()), x) + r[x.size()];
}

/// Highest decision value; ties go to the lowest zone index.
inline ZoneId linear_predict(const LinearParams& p, std::span<const double> x) {
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < p.classes.size(); ++c) {
    const double v = decision_value(p.weights, c, x);
    if (v > best_v) {
      best_v = v;
      best = c;
    }
  }
  return p.classes[best];
}

/// Softmax class probabilities for one input.
inline std::vector<double> softmax_scores(const Matrix& w, std::span<const double> x) {
  std::vector<double> z(w.rows);
  for (std::size_t c = 0; c < w.rows; ++c) z[c] = decision_value(w, c, x);
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return z;
}

/// Mean cross-entropy plus (l2/2)·||W||² over feature weights (bias excluded).
inline double logreg_loss(const Matrix& w, const Matrix& x, std::span<const std::size_t> y,
                          double l2) {
  double loss = 0.0;
  std::vector<double> z(w.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t c = 0; c < w.rows; ++c) z[c] = decision_value(w, c, x.row(i));
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    loss += (mx + std::log(sum)) - z[y[i]];
  }
  loss /= static_cast<double>(x.rows);
  double reg = 0.0;
  for (std::size_t c = 0; c < w.rows; ++c) {
    for (std::size_t j = 0; j < x.cols; ++j) reg += w(c, j) * w(c, j);
  }
  return loss + 0.5 * l2 * reg;
}

/// Analytic gradient of logreg_loss with respect to every entry of W.
inline Matrix logreg_gradient(const Matrix& w, const Matrix& x, std::span<const std::size_t> y,
                              double l2) {
  Matrix g(w.rows, w.cols);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto xi = x.row(i);
    auto p = softmax_scores(w, xi);
    p[y[i]] -= 1.0;
    for (std::size_t c = 0; c < w.rows; ++c) {
      const double coef = p[c] * inv_n;
      auto gr = g.row(c);
      for (std::size_t j = 0; j < x.cols; ++j) gr[j] += coef * xi[j];
      gr[x.cols] += coef;
    }
  }
  for (std::size_t c = 0; c < w.rows; ++c) {
    for (std::size_t j = 0; j < x.cols; ++j) g(c, j) += l2 * w(c, j);
  }
  return g;
}

struct LogRegConfig {
  int epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

/// Full-batch gradient descent from zero weights. When loss_history is
/// given it receives the loss before each update.
inline Matrix fit_logreg(const Matrix& x, std::span<const std::size_t> y, std::size_t n_classes,
                         const LogRegConfig& cfg, std::vector<double>* loss_history = nullptr) {
  if (n_classes < 2) throw Error("logistic regression needs at least 2 classes");
  Matrix w(n_classes, x.cols + 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = logreg_loss(w, x, y, cfg.l2);
    if (!std::isfinite(loss)) {
      throw Error("logistic regression loss became non-finite at epoch " +
                  std::to_string(epoch) + " (learning rate too high?)");
    }
    if (loss_history) loss_history->push_back(loss);
    const Matrix g = logreg_gradient(w, x, y, cfg.l2);
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= cfg.learning_rate * g.data[i];
  }
  return w;
}

/// Sum over classes of the one-vs-rest objective
/// mean hinge(1 - y·(w·x + b)) + (l2/2)·(||w||² + b²).
/// The bias is regularized like a weight on a constant feature.
inline double svm_objective(const Matrix& w, const Matrix& x, std::span<const std::size_t> y,
                            double l2) {
  double total = 0.0;
  for (std::size_t c = 0; c < w.rows; ++c) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double sign = (y[i] == c) ? 1.0 : -1.0;
      hinge += std::max(0.0, 1.0 - sign * decision_value(w, c, x.row(i)));
    }
    double reg = 0.0;
    for (std::size_t j = 0; j <= x.cols; ++j) reg += w(c, j) * w(c, j);
    total += hinge / static_cast<double>(x.rows) + 0.5 * l2 * reg;
  }
  return total;
}

/// Subgradient of svm_objective; exact gradient away from margin == 1.
inline Matrix svm_subgradient(const Matrix& w, const Matrix& x, std::span<const std::size_t> y,
                              double l2) {
  Matrix g(w.rows, w.cols);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (std::size_t c = 0; c < w.rows; ++c) {
    auto gr = g.row(c);
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double sign = (y[i] == c) ? 1.0 : -1.0;
      const auto xi = x.row(i);
      if (sign * decision_value(w, c, xi) < 1.0) {
        for (std::size_t j = 0; j < x.cols; ++j) gr[j] -= sign * xi[j] * inv_n;
        gr[x.cols] -= sign * inv_n;
      }
    }
    for (std::size_t j = 0; j <= x.cols; ++j) gr[j] += l2 * w(c, j);
  }
  return g;
}

struct SvmConfig {
  int epochs = 200;
  double l2 = 1e-4;
  std::uint64_t seed = 7;
};

/// One-vs-rest hinge-loss SGD with step 1/(l2·t) at the t-th update.
/// Samples are visited in a seeded shuffle each epoch; the result is the
/// average of the iterates over the second half of the epochs.
inline Matrix fit_linsvm(const Matrix& x, std::span<const std::size_t> y, std::size_t n_classes,
                         const SvmConfig& cfg) {
  if (n_classes < 2) throw Error("linear SVM needs at least 2 classes");
  if (!(cfg.l2 > 0.0)) throw Error("linear SVM needs l2 > 0");
  if (cfg.epochs < 1) throw Error("linear SVM needs at least one epoch");
  Matrix w(n_classes, x.cols + 1);
  Matrix avg(n_classes, x.cols + 1);
  std::size_t averaged = 0;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double t = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      t += 1.0;
      const double eta = 1.0 / (cfg.l2 * t);
      const auto xi = x.row(i);
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double sign = (y[i] == c) ? 1.0 : -1.0;
        const bool violated = sign * decision_value(w, c, xi) < 1.0;
        auto wr = w.row(c);
        for (std::size_t j = 0; j < x.cols; ++j) {
          wr[j] -= eta * (cfg.l2 * wr[j] - (violated ? sign * xi[j] : 0.0));
        }
        wr[x.cols] -= eta * (cfg.l2 * wr[x.cols] - (violated ? sign : 0.0));
      }
      if (2 * epoch >= cfg.epochs) {
        for (std::size_t k = 0; k < w.data.size(); ++k) avg.data[k] += w.data[k];
        ++averaged;
      }
    }
    const double obj = svm_objective(w, x, y, cfg.l2);
    if (!std::isfinite(obj)) {
      throw Error("linear SVM objective became non-finite at epoch " + std::to_string(epoch));
    }
  }
  if (averaged == 0) return w;
  for (auto& v : avg.data) v /= static_cast<double>(averaged);
  return avg;
}

inline ZoneId ZoneModel::predict_scaled(std::span<const double> scaled) const {
  if (const auto* knn = std::get_if<KnnParams>(&params)) return knn_predict(*knn, scaled);
  return linear_predict(std::get<LinearParams>(params), scaled);
}

inline ZoneId ZoneModel::predict(std::span<const double> features) const {
  if (features.size() != feature_length()) {
    throw Error("feature length " + std::to_string(features.size()) +
                " does not match model layout " + std::to_string(feature_length()));
  }
  const auto scaled = scaler.apply(features);
  return predict_scaled(scaled);
}

inline ZoneId predict(const ZoneModel& model, std::span<const double> features) {
  return model.predict(features);
}

// ---- training entry points ----------------------------------------------------

struct TrainConfig {
  ModelKind kind = ModelKind::knn;
  int k = 5;
  LogRegConfig logreg;
  SvmConfig svm;
};

namespace detail {

struct Prepared {
  Scaler scaler;
  Matrix x;
  std::vector<ZoneId> labels;
};

inline Prepared prepare(std::span<const FingerprintSample> train) {
  if (train.empty()) throw Error("empty training set");
  Prepared p;
  p.scaler = fit_scaler(train);
  p.x = Matrix(train.size(), p.scaler.dimensions());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].label) throw Error("unlabeled training sample for tag " + train[i].tag_id);
    const auto s = p.scaler.apply(train[i].features);
    std::copy(s.begin(), s.end(), p.x.row(i).begin());
    p.labels.push_back(*train[i].label);
  }
  return p;
}

inline ZoneModel shell(ModelKind kind, Scaler scaler, const WindowingConfig& windowing,
                       std::span<const std::string> gateways, std::size_t n_train) {
  ZoneModel m;
  m.kind = kind;
  m.scaler = std::move(scaler);
  m.windowing = windowing;
  m.gateway_order.assign(gateways.begin(), gateways.end());
  m.info.train_samples = n_train;
  if (m.scaler.dimensions() != m.feature_length()) {
    throw Error("training features do not match a " + std::to_string(gateways.size()) +
                "-gateway layout");
  }
  return m;
}

}  // namespace detail

inline ZoneModel train_knn(std::span<const FingerprintSample> train, int k,
                           const WindowingConfig& windowing,
                           std::span<const std::string> gateways) {
  if (train.empty()) throw Error("empty training set");
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw Error("k must be in [1, training size]");
  }
  auto p = detail::prepare(train);
  auto m = detail::shell(ModelKind::knn, std::move(p.scaler), windowing, gateways, train.size());
  m.params = KnnParams{k, std::move(p.x), std::move(p.labels)};
  return m;
}

inline ZoneModel train_logreg(std::span<const FingerprintSample> train, const LogRegConfig& cfg,
                              const WindowingConfig& windowing,
                              std::span<const std::string> gateways) {
  auto p = detail::prepare(train);
  auto enc = encode_labels(p.labels);
  auto w = fit_logreg(p.x, enc.y, enc.classes.size(), cfg);
  auto m = detail::shell(ModelKind::logreg, std::move(p.scaler), windowing, gateways, train.size());
  m.params = LinearParams{std::move(enc.classes), std::move(w)};
  return m;
}

inline ZoneModel train_linsvm(std::span<const FingerprintSample> train, const SvmConfig& cfg,
                              const WindowingConfig& windowing,
                              std::span<const std::string> gateways) {
  auto p = detail::prepare(train);
  auto enc = encode_labels(p.labels);
  auto w = fit_linsvm(p.x, enc.y, enc.classes.size(), cfg);
  auto m = detail::shell(ModelKind::linsvm, std::move(p.scaler), windowing, gateways, train.size());
  m.params = LinearParams{std::move(enc.classes), std::move(w)};
  return m;
}

inline ZoneModel train(std::span<const FingerprintSample> samples, const TrainConfig& cfg,
                       const WindowingConfig& windowing, std::span<const std::string> gateways) {
  switch (cfg.kind) {
    case ModelKind::knn: return train_knn(samples, cfg.k, windowing, gateways);
    case ModelKind::logreg: return train_logreg(samples, cfg.logreg, windowing, gateways);
    case ModelKind::linsvm: return train_linsvm(samples, cfg.svm, windowing, gateways);
  }
  throw Error("unknown model kind");
}

// ---- split --------------------------------------------------------------------

struct Split {
  std::vector<FingerprintSample> train;
  std::vector<FingerprintSample> test;
  std::vector<std::string> warnings;
};

/// Stratified split: within each zone, a seeded shuffle sends
/// round(train_fraction·n) samples to train, keeping at least one on each
/// side when the class has two or more samples.
inline Split split(std::span<const FingerprintSample> samples, double train_fraction,
                   std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must be in (0, 1)");
  }
  std::map<ZoneId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].label) throw Error("split needs labeled samples");
    by_class[*samples[i].label].push_back(i);
  }
  if (by_class.empty()) throw Error("no labeled samples to split");
  Split out;
  Rng rng(seed);
  for (auto& [zone, idx] : by_class) {
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n = idx.size();
    std::size_t n_train = n;
    if (n >= 2) {
      n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
      n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    } else {
      out.warnings.push_back("zone " + std::to_string(zone.index) +
                             " has a single sample; it goes to training only");
    }
    for (std::size_t i = 0; i < n; ++i) {
      (i < n_train ? out.train : out.test).push_back(samples[idx[i]]);
    }
  }
  return out;
}

// ---- evaluation -----------------------------------------------------------------

struct EvalReport {
  double accuracy = 0.0;
  std::vector<ZoneId> labels;                 // row/column order of the confusion matrix
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t correct = 0;
  std::size_t total = 0;
};

inline EvalReport evaluate(const ZoneModel& model, std::span<const FingerprintSample> test) {
  if (test.empty()) throw Error("empty test set");
  std::vector<std::pair<ZoneId, ZoneId>> pairs;
  pairs.reserve(test.size());
  std::vector<ZoneId> labels;
  for (const auto& s : test) {
    if (!s.label) throw Error("unlabeled test sample for tag " + s.tag_id);
    const ZoneId pred = model.predict(s.features);
    pairs.emplace_back(*s.label, pred);
    labels.push_back(*s.label);
    labels.push_back(pred);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto pos = [&](ZoneId z) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), z) -
                                    labels.begin());
  };
  EvalReport r;
  r.labels = labels;
  r.confusion.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  for (auto [truth, pred] : pairs) ++r.confusion[pos(truth)][pos(pred)];
  for (std::size_t i = 0; i < labels.size(); ++i) r.correct += r.confusion[i][i];
  r.total = pairs.size();
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

inline std::string confusion_csv(const EvalReport& r) {
  std::string out = "true\\pred";
  for (auto z : r.labels) out += "," + std::to_string(z.index);
  out += "\n";
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    out += std::to_string(r.labels[i].index);
    for (auto c : r.confusion[i]) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

// ---- evaluation scenarios -------------------------------------------------------

/// Which labeled data trains and tests the model: carried tags only,
/// stationary tags only, or stationary (capped per zone) plus 80% of the
/// carried data for training and the remaining carried data for testing.
enum class Scenario { carried, stationary, mixed };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::carried: return "carried";
    case Scenario::stationary: return "stationary";
    case Scenario::mixed: return "mixed";
  }
  return "mixed";
}

inline Scenario parse_scenario(std::string_view s) {
  if (s == "carried") return Scenario::carried;
  if (s == "stationary") return Scenario::stationary;
  if (s == "mixed") return Scenario::mixed;
  throw Error("unknown scenario: " + std::string(s));
}

struct ScenarioConfig {
  Scenario scenario = Scenario::mixed;
  double train_fraction = 0.8;
  /// Stationary data kept per zone in mixed mode.
  Millis stationary_cap_ms = 20 * kMillisPerMinute;
};

/// Keeps, per zone, stationary windows in (window start, tag) order until
/// their total duration reaches the cap.
inline std::vector<FingerprintSample> cap_per_zone(std::vector<FingerprintSample> samples,
                                                   Millis cap_ms) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    if (a.label != b.label) return a.label < b.label;
    if (a.window.start != b.window.start) return a.window.start < b.window.start;
    return a.tag_id < b.tag_id;
  });
  std::vector<FingerprintSample> out;
  std::map<ZoneId, Millis> used;
  for (auto& s : samples) {
    auto& u = used[*s.label];
    if (u >= cap_ms) continue;
    u += s.window.duration;
    out.push_back(std::move(s));
  }
  return out;
}

inline Split select_scenario(std::span<const FingerprintSample> labeled, const ScenarioConfig& cfg,
                             std::uint64_t seed) {
  std::vector<FingerprintSample> carried, stationary;
  for (const auto& s : labeled) {
    if (!s.label || !s.source) continue;
    if (*s.source == TagSource::carried) carried.push_back(s);
    if (*s.source == TagSource::stationary) stationary.push_back(s);
  }
  switch (cfg.scenario) {
    case Scenario::carried:
      if (carried.empty()) throw Error("no labeled carried-tag samples");
      return split(carried, cfg.train_fraction, seed);
    case Scenario::stationary:
      if (stationary.empty()) throw Error("no labeled stationary-tag samples");
      return split(stationary, cfg.train_fraction, seed);
    case Scenario::mixed: {
      if (carried.empty()) throw Error("no labeled carried-tag samples");
      auto out = split(carried, cfg.train_fraction, seed);
      for (auto& s : cap_per_zone(std::move(stationary), cfg.stationary_cap_ms)) {
        out.train.push_back(std::move(s));
      }
      return out;
    }
  }
  throw Error("unknown scenario");
}

// ---- sweep ----------------------------------------------------------------------

struct SweepConfig {
  std::vector<double> windows_s = {10.0, 20.0, 30.0};
  std::vector<ModelKind> kinds = {ModelKind::knn, ModelKind::logreg, ModelKind::linsvm};
  WindowingConfig windowing;  // delta_t is overridden per cell
  ScenarioConfig scenario;
  TrainConfig train;  // kind is overridden per cell
  std::uint64_t seed = 42;
};

struct SweepCell {
  double window_s = 0.0;
  ModelKind kind = ModelKind::knn;
  double accuracy = 0.0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // window-major, kinds in configured order
  std::size_t best = 0;
  ZoneModel best_model;
  EvalReport best_report;
};

/// Trains and evaluates every (window, kind) pair on a fresh featurization.
/// Best cell: highest accuracy, then smaller window, then knn < logreg < linsvm.
inline SweepResult sweep(std::span<const RssiObservation> observations,
                         std::span<const GroundTruthInterval> truth, const Deployment& deployment,
                         const SweepConfig& cfg) {
  if (cfg.windows_s.empty() || cfg.kinds.empty()) throw Error("empty sweep grid");
  const auto gateways = deployment.gateway_order();
  SweepResult result;
  std::optional<ZoneModel> best_model;
  for (double window : cfg.windows_s) {
    WindowingConfig wcfg = cfg.windowing;
    wcfg.delta_t_s = window;
    auto seg = segment(observations, wcfg, gateways);
    auto labeled = labeled_only(label_samples(std::move(seg.samples), truth));
    const auto parts = select_scenario(labeled, cfg.scenario, cfg.seed);
    for (ModelKind kind : cfg.kinds) {
      TrainConfig tcfg = cfg.train;
      tcfg.kind = kind;
      auto model = train(parts.train, tcfg, wcfg, gateways);
      model.info.test_samples = parts.test.size();
      model.info.split_seed = cfg.seed;
      model.info.scenario = to_string(cfg.scenario.scenario);
      auto report = evaluate(model, parts.test);
      SweepCell cell{window, kind, report.accuracy, parts.train.size(), parts.test.size()};
      const auto rank = [](ModelKind k) { return static_cast<int>(k); };
      bool better = !best_model;
      if (!better) {
        const auto& b = result.cells[result.best];
        better = cell.accuracy > b.accuracy ||
                 (cell.accuracy == b.accuracy &&
                  (cell.window_s < b.window_s ||
                   (cell.window_s == b.window_s && rank(cell.kind) < rank(b.kind))));
      }
      result.cells.push_back(cell);
      if (better) {
        result.best = result.cells.size() - 1;
        best_model = std::move(model);
        result.best_report = std::move(report);
      }
    }
  }
  result.best_model = std::move(*best_model);
  return result;
}

inline std::string sweep_csv(const SweepResult& r) {
  std::string out = "window_s,model,accuracy,train_samples,test_samples\n";
  for (const auto& c : r.cells) {
    out += text::format_double(c.window_s) + "," + to_string(c.kind) + "," +
           text::format_double(c.accuracy) + "," + std::to_string(c.train_samples) + "," +
           std::to_string(c.test_samples) + "\n";
  }
  return out;
}

}  // namespace iaqmob
