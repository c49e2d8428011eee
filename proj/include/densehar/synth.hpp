#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "densehar/data.hpp"
#include "densehar/errors.hpp"
#include "densehar/rng.hpp"

namespace densehar {

// Desk-scale synthetic activity generator: random-length segments, one class
// each, value = class mean + sinusoid + Gaussian noise per channel.
struct SyntheticClass {
  std::vector<double> mean;          // per channel
  std::vector<double> amplitude;     // per channel
  std::vector<double> frequency_hz;  // per channel
  double noise_sigma = 0.0;
};

struct SyntheticSpec {
  std::size_t num_classes = 0;
  std::size_t channels = 0;
  double sample_rate_hz = 25.0;
  std::vector<SyntheticClass> classes;
  std::size_t segment_min = 1;
  std::size_t segment_max = 1;
  std::size_t total_length = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;  // optional, defaults to class<i>

  void validate() const {
    if (num_classes < 2) throw ConfigError("synthetic spec: need at least 2 classes");
    if (channels == 0) throw ConfigError("synthetic spec: need at least 1 channel");
    if (classes.size() != num_classes) {
      throw ConfigError("synthetic spec: " + std::to_string(classes.size()) +
                        " class blocks for num_classes=" + std::to_string(num_classes));
    }
    for (const auto& c : classes) {
      if (c.mean.size() != channels || c.amplitude.size() != channels ||
          c.frequency_hz.size() != channels) {
        throw ConfigError("synthetic spec: per-class vectors must have one entry per channel");
      }
      if (c.noise_sigma < 0.0) throw ConfigError("synthetic spec: noise sigma must be >= 0");
    }
    if (segment_min < 1 || segment_max < segment_min) {
      throw ConfigError("synthetic spec: need 1 <= segment_min <= segment_max");
    }
    if (total_length == 0) throw ConfigError("synthetic spec: total_length must be positive");
    if (sample_rate_hz <= 0.0) throw ConfigError("synthetic spec: sample rate must be positive");
  }
};

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  try {
    spec.num_classes = j.at("num_classes").get<std::size_t>();
    spec.channels = j.at("channels").get<std::size_t>();
    spec.sample_rate_hz = j.value("sample_rate_hz", 25.0);
    spec.segment_min = j.at("segment_min").get<std::size_t>();
    spec.segment_max = j.at("segment_max").get<std::size_t>();
    spec.total_length = j.at("total_length").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.class_names = j.value("class_names", std::vector<std::string>{});
    for (const auto& c : j.at("classes")) {
      SyntheticClass cls;
      cls.mean = c.at("mean").get<std::vector<double>>();
      cls.amplitude = c.at("amplitude").get<std::vector<double>>();
      cls.frequency_hz = c.at("frequency_hz").get<std::vector<double>>();
      cls.noise_sigma = c.value("noise_sigma", 0.0);
      spec.classes.push_back(std::move(cls));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synthetic spec '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("synthetic spec '" + path + "' is not valid json");
  return synthetic_spec_from_json(j);
}

// Segment classes are uniform with no immediate repeats; each segment draws a
// fresh phase per channel. Fully determined by spec.seed.
inline LabeledSeries synth_generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  LabeledSeries series;
  series.sample_rate_hz = spec.sample_rate_hz;
  for (std::size_t i = 0; i < spec.num_classes; ++i) {
    series.class_names.push_back(i < spec.class_names.size() ? spec.class_names[i]
                                                             : "class" + std::to_string(i));
  }
  series.channels.assign(spec.channels, {});
  for (auto& ch : series.channels) ch.reserve(spec.total_length);
  series.labels.reserve(spec.total_length);

  std::int64_t previous = -1;
  while (series.labels.size() < spec.total_length) {
    std::size_t cls;
    if (previous < 0) {
      cls = static_cast<std::size_t>(rng.below(spec.num_classes));
    } else {
      cls = static_cast<std::size_t>(rng.below(spec.num_classes - 1));
      if (cls >= static_cast<std::size_t>(previous)) ++cls;
    }
    previous = static_cast<std::int64_t>(cls);
    const std::size_t span = spec.segment_min + rng.below(spec.segment_max - spec.segment_min + 1);
    const std::size_t remaining = spec.total_length - series.labels.size();
    const std::size_t len = std::min(span, remaining);
    const SyntheticClass& c = spec.classes[cls];
    std::vector<double> phase(spec.channels);
    for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t ch = 0; ch < spec.channels; ++ch) {
        const double arg =
            2.0 * std::numbers::pi * c.frequency_hz[ch] * static_cast<double>(t) /
                spec.sample_rate_hz +
            phase[ch];
        double v = c.mean[ch] + c.amplitude[ch] * std::sin(arg);
        if (c.noise_sigma > 0.0) v += rng.normal(0.0, c.noise_sigma);
        series.channels[ch].push_back(v);
      }
      series.labels.push_back(static_cast<std::int32_t>(cls));
    }
  }
  return series;
}

}  // namespace densehar
