#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "densehar/errors.hpp"
#include "densehar/rng.hpp"

namespace densehar {

// Multi-channel sample stream with one class label per sample point.
// channels is C rows of T values each.
struct LabeledSeries {
  std::vector<std::vector<double>> channels;
  std::vector<std::int32_t> labels;
  double sample_rate_hz = 0.0;
  std::vector<std::string> class_names;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t length() const { return labels.size(); }
  std::size_t num_classes() const { return class_names.size(); }
};

// Fixed-length slice still carrying its raw per-sample labels; a window
// labeling strategy reduces it to a WindowSegment.
struct RawWindow {
  std::vector<std::vector<double>> values;
  std::vector<std::int32_t> raw_labels;
  std::size_t origin = 0;
};

struct WindowSegment {
  std::vector<std::vector<double>> values;
  std::int32_t label = 0;
  std::size_t origin = 0;
};

// Fixed-length slice with dense labels, the network's training unit.
struct SubSequence {
  std::vector<std::vector<double>> values;
  std::vector<std::int32_t> dense_labels;
  std::size_t origin = 0;
};

// ---------------------------------------------------------------------------
// CSV ingestion

enum class CsvSchema { Plain, Wisdm };

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const std::string t = trim(s);
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0') {
    throw IngestionError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

inline long parse_int(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const std::string t = trim(s);
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0') {
    throw IngestionError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace detail

// Activity order of the WISDM raw dump, fixed for reproducible label indices.
inline const std::vector<std::string>& wisdm_activities() {
  static const std::vector<std::string> names = {"Walking",    "Jogging", "Upstairs",
                                                 "Downstairs", "Sitting", "Standing"};
  return names;
}

// Plain schema: header line `# rate=<hz> classes=<name,name,...>`, then rows
// of C channel values followed by the integer label.
inline LabeledSeries parse_plain_csv(std::istream& in) {
  LabeledSeries series;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t channels = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::size_t rate_pos = t.find("rate=");
      std::size_t classes_pos = t.find("classes=");
      if (rate_pos == std::string::npos || classes_pos == std::string::npos) {
        throw IngestionError("line " + std::to_string(line_no) +
                             ": header must carry rate= and classes=");
      }
      std::size_t rate_end = t.find(' ', rate_pos);
      series.sample_rate_hz =
          detail::parse_double(t.substr(rate_pos + 5, rate_end - rate_pos - 5), line_no);
      for (const auto& name : detail::split_fields(t.substr(classes_pos + 8), ',')) {
        const std::string n = detail::trim(name);
        if (!n.empty()) series.class_names.push_back(n);
      }
      if (series.class_names.empty()) {
        throw IngestionError("line " + std::to_string(line_no) + ": empty class list");
      }
      have_header = true;
      continue;
    }
    if (!have_header) {
      throw IngestionError("line " + std::to_string(line_no) +
                           ": plain csv must start with a '# rate=... classes=...' header");
    }
    const auto fields = detail::split_fields(t, ',');
    if (fields.size() < 2) {
      throw IngestionError("line " + std::to_string(line_no) + ": expected values,label");
    }
    if (channels == 0) {
      channels = fields.size() - 1;
      series.channels.assign(channels, {});
    } else if (fields.size() - 1 != channels) {
      throw IngestionError("line " + std::to_string(line_no) + ": ragged row, expected " +
                           std::to_string(channels + 1) + " fields");
    }
    for (std::size_t c = 0; c < channels; ++c) {
      series.channels[c].push_back(detail::parse_double(fields[c], line_no));
    }
    const long label = detail::parse_int(fields.back(), line_no);
    if (label < 0 || static_cast<std::size_t>(label) >= series.class_names.size()) {
      throw LabelError("line " + std::to_string(line_no) + ": label " + std::to_string(label) +
                       " outside [0," + std::to_string(series.class_names.size()) + ")");
    }
    series.labels.push_back(static_cast<std::int32_t>(label));
  }
  if (series.labels.empty()) throw IngestionError("no samples in plain csv input");
  return series;
}

// WISDM raw schema: user,activity,timestamp,x,y,z with an optional trailing
// ';'. Timestamps only order the stream; the file order is kept.
inline LabeledSeries parse_wisdm_csv(std::istream& in) {
  LabeledSeries series;
  series.sample_rate_hz = 20.0;
  series.class_names = wisdm_activities();
  series.channels.assign(3, {});
  std::map<std::string, std::int32_t> index;
  for (std::size_t i = 0; i < series.class_names.size(); ++i) {
    index[series.class_names[i]] = static_cast<std::int32_t>(i);
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = detail::trim(line);
    while (!t.empty() && (t.back() == ';' || t.back() == ',')) t.pop_back();
    if (t.empty()) continue;
    const auto fields = detail::split_fields(t, ',');
    if (fields.size() != 6) {
      throw IngestionError("line " + std::to_string(line_no) + ": expected 6 wisdm fields, got " +
                           std::to_string(fields.size()));
    }
    const std::string activity = detail::trim(fields[1]);
    const auto it = index.find(activity);
    if (it == index.end()) {
      throw IngestionError("line " + std::to_string(line_no) + ": unknown activity '" +
                           activity + "'");
    }
    for (std::size_t c = 0; c < 3; ++c) {
      series.channels[c].push_back(detail::parse_double(fields[3 + c], line_no));
    }
    series.labels.push_back(it->second);
  }
  if (series.labels.empty()) throw IngestionError("no samples in wisdm input");
  return series;
}

inline LabeledSeries load_csv(const std::string& path, CsvSchema schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return schema == CsvSchema::Plain ? parse_plain_csv(in) : parse_wisdm_csv(in);
}

// 17 significant digits round-trip doubles exactly through decimal text.
inline void write_plain_csv(std::ostream& out, const LabeledSeries& series) {
  out << "# rate=" << series.sample_rate_hz << " classes=";
  for (std::size_t i = 0; i < series.class_names.size(); ++i) {
    if (i) out << ',';
    out << series.class_names[i];
  }
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < series.length(); ++t) {
    for (std::size_t c = 0; c < series.num_channels(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", series.channels[c][t]);
      out << buf << ',';
    }
    out << series.labels[t] << '\n';
  }
}

inline void save_plain_csv(const std::string& path, const LabeledSeries& series) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  write_plain_csv(out, series);
}

// ---------------------------------------------------------------------------
// Windowing

inline std::size_t window_stride(std::size_t window, double overlap_fraction) {
  const double raw = static_cast<double>(window) * (1.0 - overlap_fraction);
  const auto stride = static_cast<std::size_t>(std::llround(raw));
  return std::max<std::size_t>(1, stride);
}

// Fixed windows in origin order; trailing samples that do not fill a window
// are dropped.
inline std::vector<RawWindow> window_segment(const LabeledSeries& series, std::size_t window,
                                             double overlap_fraction) {
  if (overlap_fraction < 0.0 || overlap_fraction >= 1.0) {
    throw ConfigError("overlap fraction must be in [0,1)");
  }
  if (window == 0 || window > series.length()) {
    throw GeometryError("window size " + std::to_string(window) + " exceeds series length " +
                        std::to_string(series.length()));
  }
  const std::size_t stride = window_stride(window, overlap_fraction);
  std::vector<RawWindow> out;
  for (std::size_t origin = 0; origin + window <= series.length(); origin += stride) {
    RawWindow w;
    w.origin = origin;
    w.values.resize(series.num_channels());
    for (std::size_t c = 0; c < series.num_channels(); ++c) {
      w.values[c].assign(series.channels[c].begin() + origin,
                         series.channels[c].begin() + origin + window);
    }
    w.raw_labels.assign(series.labels.begin() + origin, series.labels.begin() + origin + window);
    out.push_back(std::move(w));
  }
  return out;
}

// Modal class of the window; ties break to the smallest class index.
inline std::int32_t label_window_majority(const std::vector<std::int32_t>& raw_labels) {
  if (raw_labels.empty()) throw InputError("majority labeler: empty window");
  std::map<std::int32_t, std::size_t> counts;
  for (std::int32_t l : raw_labels) ++counts[l];
  std::int32_t best = raw_labels[0];
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

inline std::int32_t label_window_last(const std::vector<std::int32_t>& raw_labels) {
  if (raw_labels.empty()) throw InputError("last-step labeler: empty window");
  return raw_labels.back();
}

enum class WindowLabeler { Majority, Last };

inline std::vector<WindowSegment> label_windows(std::vector<RawWindow> raw,
                                                WindowLabeler labeler) {
  std::vector<WindowSegment> out;
  out.reserve(raw.size());
  for (auto& w : raw) {
    WindowSegment seg;
    seg.label = labeler == WindowLabeler::Majority ? label_window_majority(w.raw_labels)
                                                   : label_window_last(w.raw_labels);
    seg.values = std::move(w.values);
    seg.origin = w.origin;
    out.push_back(std::move(seg));
  }
  return out;
}

// Sub-sequence extraction: same geometry as window_segment but the dense
// labels ride along unchanged.
inline std::vector<SubSequence> extract_subsequences(const LabeledSeries& series, std::size_t n,
                                                     double overlap_fraction) {
  std::vector<SubSequence> out;
  for (auto& w : window_segment(series, n, overlap_fraction)) {
    SubSequence s;
    s.values = std::move(w.values);
    s.dense_labels = std::move(w.raw_labels);
    s.origin = w.origin;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Split and standardization

// Seeded uniform shuffle, ceil(n * test_fraction) items to test.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& items,
                                                double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test fraction must be in (0,1)");
  }
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(items.size()) - 1e-9));
  std::pair<std::vector<T>, std::vector<T>> result;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_test ? result.second : result.first).push_back(items[order[i]]);
  }
  return result;
}

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // floored at 1e-8
};

// Per-channel mean/std over the training items only. Works for anything that
// carries a `values` member of C channel rows (sub-sequences, windows).
template <typename Item>
ChannelStats standardize_fit(const std::vector<Item>& train) {
  if (train.empty()) throw InputError("standardize_fit: empty training set");
  const std::size_t channels = train[0].values.size();
  ChannelStats stats;
  stats.mean.assign(channels, 0.0);
  stats.stddev.assign(channels, 0.0);
  std::size_t count = 0;
  for (const auto& s : train) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (double v : s.values[c]) stats.mean[c] += v;
    }
    count += s.values[0].size();
  }
  for (std::size_t c = 0; c < channels; ++c) stats.mean[c] /= static_cast<double>(count);
  for (const auto& s : train) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (double v : s.values[c]) {
        const double d = v - stats.mean[c];
        stats.stddev[c] += d * d;
      }
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    stats.stddev[c] = std::max(std::sqrt(stats.stddev[c] / static_cast<double>(count)), 1e-8);
  }
  return stats;
}

inline void standardize_apply(const ChannelStats& stats,
                              std::vector<std::vector<double>>& channels) {
  if (channels.size() != stats.mean.size()) {
    throw DimensionError("standardize_apply: " + std::to_string(channels.size()) +
                         " channels, stats carry " + std::to_string(stats.mean.size()));
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const double m = stats.mean[c];
    const double inv = 1.0 / stats.stddev[c];
    for (double& v : channels[c]) v = (v - m) * inv;
  }
}

// ---------------------------------------------------------------------------
// Hand-crafted time-domain features

// Per channel: mean, median (lower-middle for even counts), population
// variance, population standard deviation, max, min, RMS. 7*C values.
inline std::vector<double> extract_features(const std::vector<std::vector<double>>& values) {
  if (values.empty() || values[0].empty()) {
    throw InputError("extract_features: empty window");
  }
  std::vector<double> features;
  features.reserve(values.size() * 7);
  for (const auto& channel : values) {
    if (channel.empty()) throw InputError("extract_features: empty channel");
    const double n = static_cast<double>(channel.size());
    double mean = 0.0, sq = 0.0;
    double mx = channel[0], mn = channel[0];
    for (double v : channel) {
      mean += v;
      sq += v * v;
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    mean /= n;
    std::vector<double> sorted(channel);
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[(sorted.size() - 1) / 2];
    double var = 0.0;
    for (double v : channel) var += (v - mean) * (v - mean);
    var /= n;
    features.push_back(mean);
    features.push_back(median);
    features.push_back(var);
    features.push_back(std::sqrt(var));
    features.push_back(mx);
    features.push_back(mn);
    features.push_back(std::sqrt(sq / n));
  }
  return features;
}

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline FeatureStats feature_standardize_fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InputError("feature_standardize_fit: no rows");
  const std::size_t dim = rows[0].size();
  FeatureStats stats;
  stats.mean.assign(dim, 0.0);
  stats.stddev.assign(dim, 0.0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < dim; ++i) stats.mean[i] += row[i];
  }
  for (std::size_t i = 0; i < dim; ++i) stats.mean[i] /= static_cast<double>(rows.size());
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = row[i] - stats.mean[i];
      stats.stddev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    stats.stddev[i] =
        std::max(std::sqrt(stats.stddev[i] / static_cast<double>(rows.size())), 1e-8);
  }
  return stats;
}

inline void feature_standardize_apply(const FeatureStats& stats, std::vector<double>& row) {
  if (row.size() != stats.mean.size()) {
    throw DimensionError("feature vector length does not match stats");
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    row[i] = (row[i] - stats.mean[i]) / stats.stddev[i];
  }
}

}  // namespace densehar
