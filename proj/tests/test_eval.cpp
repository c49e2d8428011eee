#include <gtest/gtest.h>

#include <cmath>

#include "densehar/data.hpp"
#include "densehar/eval.hpp"
#include "densehar/rng.hpp"
#include "densehar/synth.hpp"

using namespace densehar;

namespace {

ConfusionMatrix fixture_cm() {
  // rows true, cols predicted
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 3;
  cm.at(0, 1) = 1;
  cm.at(1, 0) = 1;
  cm.at(1, 1) = 5;
  return cm;
}

}  // namespace

TEST(Confusion, TabulatesAndValidates) {
  const std::vector<std::int32_t> truth = {0, 0, 1, 1, 2};
  const std::vector<std::int32_t> pred = {0, 1, 1, 1, 2};
  ConfusionMatrix cm = confusion(truth, pred, 3);
  EXPECT_EQ(cm.total(), 5);
  EXPECT_EQ(cm.at(0, 0), 1);
  EXPECT_EQ(cm.at(0, 1), 1);
  EXPECT_EQ(cm.at(1, 1), 2);
  EXPECT_EQ(cm.at(2, 2), 1);

  EXPECT_THROW(confusion({0}, {0, 1}, 2), InputError);
  EXPECT_THROW(confusion({5}, {0}, 2), LabelError);
}

TEST(Confusion, PerfectAndSwapped) {
  ConfusionMatrix perfect = confusion({0, 1, 1}, {0, 1, 1}, 2);
  EXPECT_EQ(perfect.at(0, 1), 0);
  EXPECT_EQ(perfect.at(1, 0), 0);
  EXPECT_DOUBLE_EQ(accuracy(perfect), 1.0);

  ConfusionMatrix swapped = confusion({0, 0, 1, 1}, {1, 1, 0, 0}, 2);
  EXPECT_EQ(swapped.at(0, 0), 0);
  EXPECT_EQ(swapped.at(1, 1), 0);
  EXPECT_DOUBLE_EQ(accuracy(swapped), 0.0);
}

TEST(Accuracy, BinaryFixture) {
  EXPECT_NEAR(accuracy(fixture_cm()), 0.8, 1e-12);
}

TEST(PerClassPrf, HarmonicMeanOfEqualHalves) {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 1;
  cm.at(0, 1) = 1;
  cm.at(1, 0) = 1;
  cm.at(1, 1) = 1;
  const auto prf = per_class_prf(cm);
  EXPECT_NEAR(prf[0].precision, 0.5, 1e-12);
  EXPECT_NEAR(prf[0].recall, 0.5, 1e-12);
  EXPECT_NEAR(prf[0].f1, 0.5, 1e-12);
}

TEST(PerClassPrf, Fixture) {
  const auto prf = per_class_prf(fixture_cm());
  EXPECT_NEAR(prf[0].precision, 0.75, 1e-12);
  EXPECT_NEAR(prf[0].recall, 0.75, 1e-12);
  EXPECT_NEAR(prf[0].f1, 0.75, 1e-12);
  EXPECT_NEAR(prf[1].precision, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(prf[1].recall, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(prf[1].f1, 5.0 / 6.0, 1e-12);
  EXPECT_FALSE(prf[0].degenerate);
}

TEST(PerClassPrf, AbsentClassIsFlaggedZero) {
  ConfusionMatrix cm(3);
  cm.at(0, 0) = 4;
  cm.at(1, 1) = 2;
  const auto prf = per_class_prf(cm);
  EXPECT_DOUBLE_EQ(prf[2].f1, 0.0);
  EXPECT_TRUE(prf[2].degenerate);
  EXPECT_FALSE(prf[0].degenerate);
}

TEST(WeightedF1, FixtureAndBounds) {
  EXPECT_NEAR(weighted_f1(fixture_cm()), 0.8, 1e-12);

  ConfusionMatrix single(2);
  single.at(1, 1) = 9;
  EXPECT_NEAR(weighted_f1(single), 1.0, 1e-12);
}

TEST(WeightedF1, WeightsSumToOne) {
  EvalReport report = evaluate_dense({0, 0, 1, 1, 1, 2}, {0, 1, 1, 1, 2, 2}, 3);
  double sum = 0.0;
  for (double w : report.class_weights) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Invariants, AccuracyIsRecallWeightedByClassShare) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    ConfusionMatrix cm(n);
    for (auto& v : cm.counts) v = static_cast<std::int64_t>(rng.below(9));
    if (cm.total() == 0) continue;
    const auto prf = per_class_prf(cm);
    double weighted_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weighted_recall += static_cast<double>(cm.row_sum(i)) / static_cast<double>(cm.total()) *
                         prf[i].recall;
    }
    EXPECT_NEAR(accuracy(cm), weighted_recall, 1e-12);
    EXPECT_LE(weighted_f1(cm), 1.0 + 1e-12);
  }
}

TEST(EvaluateDense, ReportIsSelfConsistent) {
  const std::vector<std::int32_t> truth = {0, 1, 2, 1, 0, 2, 2};
  const std::vector<std::int32_t> pred = {0, 1, 1, 1, 0, 2, 0};
  EvalReport report = evaluate_dense(truth, pred, 3);
  EXPECT_NEAR(report.accuracy, accuracy(report.confusion), 1e-15);
  EXPECT_NEAR(report.weighted_f1, weighted_f1(report.confusion), 1e-15);
  EXPECT_EQ(report.confusion.total(), 7);

  EvalReport perfect = evaluate_dense(truth, truth, 3);
  EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);

  EXPECT_THROW(evaluate_dense({0, 1}, {0}, 2), InputError);
}

TEST(ReportJson, CarriesAllFields) {
  EvalReport report = evaluate_dense({0, 1, 1}, {0, 1, 0}, 2);
  report.model_kind = "unet";
  report.seed = 7;
  report.uncovered_samples = 3;
  const nlohmann::json j = report_to_json(report);
  EXPECT_EQ(j.at("model_kind"), "unet");
  EXPECT_EQ(j.at("seed"), 7);
  EXPECT_EQ(j.at("uncovered_samples"), 3);
  EXPECT_EQ(j.at("confusion").size(), 2u);
  EXPECT_EQ(j.at("per_class").size(), 2u);
  EXPECT_TRUE(j.at("per_class")[0].contains("degenerate"));
}

TEST(ExpandWindows, SpecExampleTenSamples) {
  // 4 windows, W=4, 50% overlap over T=10: evens cover 0-7, the final odd
  // window labels its unreached suffix 8-9.
  const std::vector<std::int32_t> labels = {5, 6, 7, 8};
  const std::vector<std::size_t> origins = {0, 2, 4, 6};
  const ExpandedPredictions out = expand_window_predictions(labels, origins, 4, 0.5);
  EXPECT_EQ(out.labels,
            (std::vector<std::int32_t>{5, 5, 5, 5, 7, 7, 7, 7, 8, 8}));
}

TEST(ExpandWindows, SingleWindowBroadcasts) {
  const ExpandedPredictions out = expand_window_predictions({3}, {0}, 8, 0.5);
  EXPECT_EQ(out.labels, std::vector<std::int32_t>(8, 3));
}

TEST(ExpandWindows, UniformLabelsStayUniform) {
  const std::vector<std::int32_t> labels(9, 2);
  std::vector<std::size_t> origins;
  for (std::size_t i = 0; i < 9; ++i) origins.push_back(i * 4);
  const ExpandedPredictions out = expand_window_predictions(labels, origins, 8, 0.5);
  EXPECT_EQ(out.labels, std::vector<std::int32_t>(40, 2));
}

TEST(ExpandWindows, RejectsUnsupportedOverlap) {
  EXPECT_THROW(expand_window_predictions({1, 2}, {0, 2}, 8, 0.75), ConfigError);
  EXPECT_THROW(expand_window_predictions({1, 2}, {0, 3}, 8, 0.5), InputError);
  EXPECT_THROW(expand_window_predictions({}, {}, 8, 0.5), InputError);
}

TEST(ExpandWindows, ConsistentWindowsReproduceDenseLabels) {
  // When the series has long single-class runs, windows labeled by majority
  // are single-class, and expansion must reproduce the truth where covered.
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    LabeledSeries s;
    s.sample_rate_hz = 1.0;
    s.class_names = {"a", "b", "c"};
    s.channels.assign(1, {});
    std::int32_t cls = static_cast<std::int32_t>(rng.below(3));
    while (s.labels.size() < 200) {
      const std::size_t run = 32 + rng.below(32);
      for (std::size_t i = 0; i < run && s.labels.size() < 200; ++i) {
        s.labels.push_back(cls);
        s.channels[0].push_back(cls);
      }
      cls = (cls + 1 + static_cast<std::int32_t>(rng.below(2))) % 3;
    }
    const std::size_t w = 8;
    const auto windows = window_segment(s, w, 0.5);
    std::vector<std::int32_t> labels;
    std::vector<std::size_t> origins;
    for (const auto& win : windows) {
      labels.push_back(label_window_majority(win.raw_labels));
      origins.push_back(win.origin);
    }
    const ExpandedPredictions out = expand_window_predictions(labels, origins, w, 0.5);
    std::size_t mismatches = 0;
    std::size_t boundaries = 0;
    for (std::size_t t = 1; t < out.labels.size(); ++t) {
      boundaries += s.labels[t] != s.labels[t - 1];
    }
    for (std::size_t t = 0; t < out.labels.size(); ++t) {
      mismatches += out.labels[t] != s.labels[t];
    }
    // Only boundary-spanning windows can disagree with the dense truth.
    EXPECT_LE(mismatches, boundaries * w);
  }
}

TEST(ExpandWindows, BoundaryFractionBoundsProtocolDegradation) {
  // Perfect window classifier on long segments: the unified score can differ
  // from the window score only inside boundary-spanning windows.
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.channels = 1;
  spec.classes.resize(3);
  for (int c = 0; c < 3; ++c) {
    spec.classes[c].mean = {c * 5.0};
    spec.classes[c].amplitude = {0.0};
    spec.classes[c].frequency_hz = {0.0};
    spec.classes[c].noise_sigma = 0.0;
  }
  const std::size_t w = 16;
  spec.segment_min = 2 * w;
  spec.segment_max = 4 * w;
  spec.total_length = 2000;
  spec.seed = 23;
  const LabeledSeries s = synth_generate(spec);

  const auto windows = window_segment(s, w, 0.5);
  std::vector<std::int32_t> labels;
  std::vector<std::size_t> origins;
  std::size_t correct_windows = 0;
  for (const auto& win : windows) {
    const std::int32_t majority = label_window_majority(win.raw_labels);
    labels.push_back(majority);
    origins.push_back(win.origin);
    correct_windows += majority == label_window_majority(win.raw_labels);
  }
  const double window_acc =
      static_cast<double>(correct_windows) / static_cast<double>(windows.size());

  EvalReport unified = evaluate_unified(s.labels, labels, origins, w, 0.5, 3);
  std::size_t boundaries = 0;
  for (std::size_t t = 1; t < s.length(); ++t) boundaries += s.labels[t] != s.labels[t - 1];
  const double bound = 2.0 * static_cast<double>(boundaries * w) / 2000.0;
  EXPECT_LE(std::abs(unified.accuracy - window_acc), bound);
  EXPECT_GT(unified.accuracy, 0.8);
}

TEST(EvaluateUnified, CountsUncoveredTail) {
  // 13 samples, W=4: origins 0,2,4,6,8 -> evens cover 0..11, sample 12 stays
  // uncovered (odd window 3 never reaches past window 4).
  std::vector<std::int32_t> truth(13, 1);
  const std::vector<std::int32_t> labels = {1, 1, 1, 1, 1};
  const std::vector<std::size_t> origins = {0, 2, 4, 6, 8};
  EvalReport report = evaluate_unified(truth, labels, origins, 4, 0.5, 2);
  EXPECT_EQ(report.uncovered_samples, 1);
  EXPECT_DOUBLE_EQ(report.accuracy, 1.0);
}
