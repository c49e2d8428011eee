#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "densehar/errors.hpp"

namespace densehar {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::int64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n) : n_classes(n), counts(n * n, 0) {}

  std::int64_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * n_classes + pred];
  }
  std::int64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * n_classes + pred];
  }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : counts) s += v;
    return s;
  }
  std::int64_t row_sum(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < n_classes; ++j) s += at(i, j);
    return s;
  }
  std::int64_t col_sum(std::size_t j) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n_classes; ++i) s += at(i, j);
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<std::int32_t>& truth,
                                 const std::vector<std::int32_t>& predicted,
                                 std::size_t n_classes) {
  if (truth.size() != predicted.size()) {
    throw InputError("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= n_classes) {
      throw LabelError("confusion: true label " + std::to_string(truth[i]) + " at position " +
                       std::to_string(i) + " outside [0," + std::to_string(n_classes) + ")");
    }
    if (predicted[i] < 0 || static_cast<std::size_t>(predicted[i]) >= n_classes) {
      throw LabelError("confusion: predicted label " + std::to_string(predicted[i]) +
                       " at position " + std::to_string(i) + " outside [0," +
                       std::to_string(n_classes) + ")");
    }
    ++cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

// Multi-class accuracy: trace over total.
inline double accuracy(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) return 0.0;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < cm.n_classes; ++i) correct += cm.at(i, i);
  return static_cast<double>(correct) / static_cast<double>(total);
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  // Set when the class never occurs in truth or prediction, so every metric
  // fell back to the zero-denominator convention.
  bool degenerate = false;
};

// One-vs-rest precision/recall/F1 per class. Zero denominators yield 0.
inline std::vector<ClassMetrics> per_class_prf(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out(cm.n_classes);
  for (std::size_t i = 0; i < cm.n_classes; ++i) {
    const std::int64_t tp = cm.at(i, i);
    const std::int64_t predicted = cm.col_sum(i);
    const std::int64_t actual = cm.row_sum(i);
    ClassMetrics& m = out[i];
    m.support = actual;
    m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.degenerate = predicted == 0 && actual == 0;
  }
  return out;
}

// Class-frequency weighted F1: weights are true-class proportions.
inline double weighted_f1(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) return 0.0;
  const auto per_class = per_class_prf(cm);
  double f1 = 0.0;
  for (std::size_t i = 0; i < cm.n_classes; ++i) {
    const double w = static_cast<double>(cm.row_sum(i)) / static_cast<double>(total);
    f1 += w * per_class[i].f1;
  }
  return f1;
}

struct EvalReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<double> class_weights;
  double weighted_f1 = 0.0;
  std::int64_t uncovered_samples = 0;
  std::string model_kind;
  std::int64_t seed = 0;
};

inline EvalReport evaluate_dense(const std::vector<std::int32_t>& truth,
                                 const std::vector<std::int32_t>& predicted,
                                 std::size_t n_classes) {
  EvalReport report;
  report.confusion = confusion(truth, predicted, n_classes);
  report.accuracy = accuracy(report.confusion);
  report.per_class = per_class_prf(report.confusion);
  const std::int64_t total = report.confusion.total();
  report.class_weights.resize(n_classes, 0.0);
  for (std::size_t i = 0; i < n_classes; ++i) {
    report.class_weights[i] =
        total > 0 ? static_cast<double>(report.confusion.row_sum(i)) / static_cast<double>(total)
                  : 0.0;
  }
  report.weighted_f1 = weighted_f1(report.confusion);
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["model_kind"] = report.model_kind;
  j["seed"] = report.seed;
  j["accuracy"] = report.accuracy;
  j["weighted_f1"] = report.weighted_f1;
  j["uncovered_samples"] = report.uncovered_samples;
  j["n_classes"] = report.confusion.n_classes;
  std::vector<std::vector<std::int64_t>> cm(report.confusion.n_classes);
  for (std::size_t i = 0; i < report.confusion.n_classes; ++i) {
    cm[i].resize(report.confusion.n_classes);
    for (std::size_t k = 0; k < report.confusion.n_classes; ++k) {
      cm[i][k] = report.confusion.at(i, k);
    }
  }
  j["confusion"] = cm;
  j["class_weights"] = report.class_weights;
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& m : report.per_class) {
    classes.push_back({{"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"degenerate", m.degenerate}});
  }
  j["per_class"] = classes;
  return j;
}

// ---------------------------------------------------------------------------
// Unified evaluation protocol for window methods

struct ExpandedPredictions {
  // Dense labels over samples [0, labels.size()); anything past that is
  // uncovered by the protocol and excluded from scoring.
  std::vector<std::int32_t> labels;
};

// Even-window retention for 50%-overlap sliding windows: even-indexed windows
// broadcast their label over their span, odd windows are dropped, except that
// a final odd window labels the suffix no even window reaches.
inline ExpandedPredictions expand_window_predictions(const std::vector<std::int32_t>& labels,
                                                     const std::vector<std::size_t>& origins,
                                                     std::size_t window,
                                                     double overlap_fraction) {
  if (std::abs(overlap_fraction - 0.5) > 1e-12) {
    throw ConfigError("unified protocol: unsupported overlap " +
                      std::to_string(overlap_fraction) + ", the even-window rule needs 50%");
  }
  if (labels.size() != origins.size()) {
    throw InputError("expand_window_predictions: " + std::to_string(labels.size()) +
                     " labels vs " + std::to_string(origins.size()) + " origins");
  }
  if (labels.empty()) throw InputError("expand_window_predictions: no windows");
  if (window == 0 || window % 2 != 0) {
    throw GeometryError("unified protocol: window size must be even and positive");
  }
  for (std::size_t i = 0; i < origins.size(); ++i) {
    if (origins[i] != i * (window / 2)) {
      throw InputError("expand_window_predictions: window " + std::to_string(i) +
                       " has origin " + std::to_string(origins[i]) + ", expected " +
                       std::to_string(i * (window / 2)));
    }
  }

  ExpandedPredictions out;
  for (std::size_t i = 0; i < labels.size(); i += 2) {
    out.labels.insert(out.labels.end(), window, labels[i]);
  }
  // With an even window count the last window is odd-indexed and its second
  // half is reached by no even window; it keeps that window's label.
  if (labels.size() % 2 == 0) {
    const std::size_t last = labels.size() - 1;
    const std::size_t end = origins[last] + window;
    out.labels.insert(out.labels.end(), end - out.labels.size(), labels[last]);
  }
  return out;
}

// Report over the covered prefix; trailing samples the protocol cannot reach
// are counted, not scored.
inline EvalReport evaluate_unified(const std::vector<std::int32_t>& truth,
                                   const std::vector<std::int32_t>& window_labels,
                                   const std::vector<std::size_t>& origins, std::size_t window,
                                   double overlap_fraction, std::size_t n_classes) {
  const ExpandedPredictions expanded =
      expand_window_predictions(window_labels, origins, window, overlap_fraction);
  if (expanded.labels.size() > truth.size()) {
    throw InputError("evaluate_unified: expansion covers " +
                     std::to_string(expanded.labels.size()) + " samples, series has " +
                     std::to_string(truth.size()));
  }
  std::vector<std::int32_t> covered_truth(truth.begin(),
                                          truth.begin() + expanded.labels.size());
  EvalReport report = evaluate_dense(covered_truth, expanded.labels, n_classes);
  report.uncovered_samples = static_cast<std::int64_t>(truth.size() - expanded.labels.size());
  return report;
}

}  // namespace densehar
