// densehar command line: synthesize datasets, train models, run dense
// prediction, score with the unified sample-level protocol, and benchmark
// prediction speed. All commands are deterministic for a fixed config and
// seed, except wall-clock fields.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "densehar/densehar.hpp"

namespace dh = densehar;
using nlohmann::json;

namespace {

struct RunConfig {
  std::uint64_t seed = 0;
  std::string csv_path;
  dh::CsvSchema schema = dh::CsvSchema::Plain;
  std::string synthetic_spec_path;
  std::string model_kind = "unet";
  std::string labeler = "dense";
  dh::UNetConfig unet;
  dh::FcnConfig fcn;
  dh::CnnConfig cnn;
  dh::TrainConfig train;
  std::size_t knn_k = 5;
  std::size_t window = 64;
  double window_overlap = 0.5;
  std::string out_model = "model.dhm";
  std::string log_path;
};

dh::CsvSchema parse_schema(const std::string& name) {
  if (name == "plain") return dh::CsvSchema::Plain;
  if (name == "wisdm") return dh::CsvSchema::Wisdm;
  throw dh::ConfigError("unknown csv schema '" + name + "' (expected plain or wisdm)");
}

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw dh::ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw dh::ConfigError(std::string(what) + " '" + path + "' is not valid json");
  }
  return j;
}

RunConfig parse_run_config(const std::string& path) {
  const json j = load_json_file(path, "run config");
  RunConfig cfg;
  try {
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      if (d.contains("csv")) {
        cfg.csv_path = d.at("csv").get<std::string>();
        cfg.schema = parse_schema(d.value("schema", std::string("plain")));
      } else if (d.contains("synthetic")) {
        cfg.synthetic_spec_path = d.at("synthetic").get<std::string>();
      } else {
        throw dh::ConfigError("dataset block needs 'csv' or 'synthetic'");
      }
    } else {
      throw dh::ConfigError("run config is missing the dataset block");
    }
    cfg.model_kind = j.value("model", std::string("unet"));
    cfg.labeler = j.value("labeler", std::string(""));
    if (cfg.labeler.empty()) {
      cfg.labeler = (cfg.model_kind == "unet" || cfg.model_kind == "fcn") ? "dense" : "majority";
    }
    if (j.contains("unet")) {
      const json& u = j.at("unet");
      cfg.unet.in_channels = u.value("in_channels", cfg.unet.in_channels);
      cfg.unet.num_classes = u.value("num_classes", cfg.unet.num_classes);
      cfg.unet.base_features = u.value("base_features", cfg.unet.base_features);
      cfg.unet.levels = u.value("levels", cfg.unet.levels);
      cfg.unet.subseq_length = u.value("subseq_length", cfg.unet.subseq_length);
    }
    if (j.contains("fcn")) {
      const json& f = j.at("fcn");
      cfg.fcn.base_features = f.value("base_features", cfg.fcn.base_features);
      cfg.fcn.width_cap = f.value("width_cap", cfg.fcn.width_cap);
      cfg.fcn.subseq_length = f.value("subseq_length", cfg.fcn.subseq_length);
    }
    if (j.contains("cnn")) {
      const json& c = j.at("cnn");
      cfg.cnn.width1 = c.value("width1", cfg.cnn.width1);
      cfg.cnn.width2 = c.value("width2", cfg.cnn.width2);
      cfg.cnn.hidden = c.value("hidden", cfg.cnn.hidden);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      cfg.train.epochs = t.value("epochs", cfg.train.epochs);
      cfg.train.test_fraction = t.value("test_fraction", cfg.train.test_fraction);
    }
    if (j.contains("window")) {
      const json& w = j.at("window");
      cfg.window = w.value("size", cfg.window);
      cfg.window_overlap = w.value("overlap", cfg.window_overlap);
    }
    if (j.contains("knn")) cfg.knn_k = j.at("knn").value("k", cfg.knn_k);
    cfg.out_model = j.value("out_model", cfg.out_model);
    cfg.log_path = j.value("log", std::string(""));
  } catch (const json::exception& e) {
    throw dh::ConfigError(std::string("run config: ") + e.what());
  }
  if (cfg.model_kind != "unet" && cfg.model_kind != "cnn" && cfg.model_kind != "fcn" &&
      cfg.model_kind != "knn") {
    throw dh::ConfigError("unknown model kind '" + cfg.model_kind + "'");
  }
  const bool dense = cfg.labeler == "dense";
  const bool dense_model = cfg.model_kind == "unet" || cfg.model_kind == "fcn";
  if (dense != dense_model) {
    throw dh::ConfigError("labeler '" + cfg.labeler + "' is incompatible with model '" +
                          cfg.model_kind + "' (dense labeling is for unet/fcn only)");
  }
  if (!dense && cfg.labeler != "majority" && cfg.labeler != "last") {
    throw dh::ConfigError("unknown labeler '" + cfg.labeler + "'");
  }
  return cfg;
}

dh::LabeledSeries load_dataset(const RunConfig& cfg) {
  if (!cfg.csv_path.empty()) return dh::load_csv(cfg.csv_path, cfg.schema);
  return dh::synth_generate(dh::load_synthetic_spec(cfg.synthetic_spec_path));
}

void write_labels(const std::string& path, const std::vector<std::int32_t>& labels) {
  std::ofstream out(path);
  if (!out) throw dh::InputError("cannot write '" + path + "'");
  for (auto l : labels) out << l << '\n';
}

std::vector<std::int32_t> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dh::InputError("cannot open prediction file '" + path + "'");
  std::vector<std::int32_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = dh::detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    labels.push_back(static_cast<std::int32_t>(dh::detail::parse_int(t, line_no)));
  }
  if (labels.empty()) throw dh::InputError("no labels in '" + path + "'");
  return labels;
}

void write_origins(const std::string& path, const std::vector<dh::RawWindow>& windows,
                   std::size_t window, double overlap) {
  std::ofstream out(path);
  if (!out) throw dh::InputError("cannot write '" + path + "'");
  out << "# W=" << window << " overlap=" << overlap << '\n';
  for (const auto& w : windows) out << w.origin << '\n';
}

struct OriginsFile {
  std::size_t window = 0;
  double overlap = 0.0;
  std::vector<std::size_t> origins;
};

OriginsFile read_origins(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dh::InputError("cannot open origins file '" + path + "'");
  OriginsFile of;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = dh::detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto wpos = t.find("W=");
      const auto opos = t.find("overlap=");
      if (wpos == std::string::npos || opos == std::string::npos) {
        throw dh::FormatError("origins header must carry W= and overlap=");
      }
      of.window = static_cast<std::size_t>(
          dh::detail::parse_int(t.substr(wpos + 2, t.find(' ', wpos) - wpos - 2), line_no));
      of.overlap = dh::detail::parse_double(t.substr(opos + 8), line_no);
      have_header = true;
      continue;
    }
    of.origins.push_back(static_cast<std::size_t>(dh::detail::parse_int(t, line_no)));
  }
  if (!have_header) throw dh::FormatError("origins file is missing its '# W=...' header");
  return of;
}

void emit_json(const std::string& out_path, const json& j) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::ofstream out(out_path);
    if (!out) throw dh::InputError("cannot write '" + out_path + "'");
    out << j.dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& spec_path, const std::string& out_path,
              std::optional<std::uint64_t> seed_override) {
  dh::SyntheticSpec spec = dh::load_synthetic_spec(spec_path);
  if (seed_override) spec.seed = *seed_override;
  const dh::LabeledSeries series = dh::synth_generate(spec);
  dh::save_plain_csv(out_path, series);
  std::cout << "wrote " << series.length() << " samples, " << series.num_channels()
            << " channels, " << series.num_classes() << " classes to " << out_path << '\n';
  return 0;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed_override,
              const std::string& out_override) {
  RunConfig cfg = parse_run_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  if (!out_override.empty()) cfg.out_model = out_override;
  cfg.train.seed = cfg.seed;
  cfg.train.validate();

  const dh::LabeledSeries series = load_dataset(cfg);
  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::app);
    if (!log) throw dh::InputError("cannot open training log '" + cfg.log_path + "'");
  }
  auto log_line = [&](const json& j) {
    if (log.is_open()) log << j.dump() << '\n' << std::flush;
  };
  const std::size_t input_length = cfg.model_kind == "unet"  ? cfg.unet.subseq_length
                                   : cfg.model_kind == "fcn" ? cfg.fcn.subseq_length
                                                             : cfg.window;
  log_line({{"event", "start"},
            {"model", cfg.model_kind},
            {"learning_rate", cfg.train.learning_rate},
            {"batch_size", cfg.train.batch_size},
            {"epochs", cfg.train.epochs},
            {"subseq_length", input_length},
            {"test_fraction", cfg.train.test_fraction},
            {"seed", cfg.seed}});

  dh::TrainingLog tlog;
  if (cfg.model_kind == "unet") {
    cfg.unet.in_channels = series.num_channels();
    cfg.unet.num_classes = series.num_classes();
    cfg.unet.seed = cfg.seed;
    auto subseqs = dh::extract_subsequences(series, cfg.unet.subseq_length, 0.0);
    auto [train_set, test_set] = dh::split(subseqs, cfg.train.test_fraction, cfg.seed);
    dh::UNetModel model = dh::build_unet(cfg.unet);
    tlog = dh::fit(model, train_set, cfg.train);
    dh::save_unet(model, cfg.out_model);
  } else if (cfg.model_kind == "fcn") {
    cfg.fcn.in_channels = series.num_channels();
    cfg.fcn.num_classes = series.num_classes();
    cfg.fcn.seed = cfg.seed;
    auto subseqs = dh::extract_subsequences(series, cfg.fcn.subseq_length, 0.0);
    auto [train_set, test_set] = dh::split(subseqs, cfg.train.test_fraction, cfg.seed);
    dh::FcnModel model = dh::build_fcn(cfg.fcn);
    tlog = dh::fcn_fit(model, train_set, cfg.train);
    dh::save_fcn(model, cfg.out_model);
  } else {
    const auto windows = dh::window_segment(series, cfg.window, cfg.window_overlap);
    auto [train_set, test_set] = dh::split(windows, cfg.train.test_fraction, cfg.seed);
    const dh::WindowLabeler labeler =
        cfg.labeler == "last" ? dh::WindowLabeler::Last : dh::WindowLabeler::Majority;
    if (cfg.model_kind == "cnn") {
      cfg.cnn.window = cfg.window;
      cfg.cnn.in_channels = series.num_channels();
      cfg.cnn.num_classes = series.num_classes();
      cfg.cnn.seed = cfg.seed;
      dh::WindowedCnnModel model = dh::build_cnn(cfg.cnn);
      tlog = dh::cnn_train(model, train_set, labeler, cfg.train);
      dh::save_cnn(model, cfg.out_model);
    } else {
      dh::KnnIndex index = dh::knn_fit(train_set, labeler, cfg.knn_k, series.num_classes());
      dh::save_knn(index, cfg.out_model);
    }
  }
  for (const auto& e : tlog.epochs) {
    log_line({{"event", "epoch"},
              {"epoch", e.index},
              {"mean_loss", e.mean_loss},
              {"wall_ms", e.wall_ms}});
  }
  log_line({{"event", "done"},
            {"optimizer_steps", tlog.optimizer_steps},
            {"model_file", cfg.out_model}});
  if (!tlog.epochs.empty()) {
    std::cout << "final epoch mean loss " << tlog.epochs.back().mean_loss << '\n';
  }
  std::cout << "saved " << cfg.model_kind << " model to " << cfg.out_model << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& series_path,
                const std::string& out_path, const std::string& schema_name) {
  const dh::ModelContainer box = dh::load_model_container(model_path);
  const dh::LabeledSeries series = dh::load_csv(series_path, parse_schema(schema_name));
  switch (box.kind) {
    case dh::ModelKind::UNet: {
      const dh::UNetModel model = dh::unet_from_container(box);
      write_labels(out_path, dh::predict_dense(model, series));
      break;
    }
    case dh::ModelKind::Fcn: {
      const dh::FcnModel model = dh::fcn_from_container(box);
      write_labels(out_path, dh::fcn_predict_dense(model, series));
      break;
    }
    case dh::ModelKind::WindowedCnn: {
      const dh::WindowedCnnModel model = dh::cnn_from_container(box);
      const auto windows = dh::window_segment(series, model.config.window, 0.5);
      write_labels(out_path, dh::cnn_predict(model, windows));
      write_origins(out_path + ".origins", windows, model.config.window, 0.5);
      break;
    }
    case dh::ModelKind::Knn: {
      const dh::KnnIndex index = dh::knn_from_container(box);
      const auto windows = dh::window_segment(series, index.window, 0.5);
      write_labels(out_path, dh::knn_predict(index, windows));
      write_origins(out_path + ".origins", windows, index.window, 0.5);
      break;
    }
  }
  std::cout << "wrote predictions to " << out_path << '\n';
  return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& pred_path,
             const std::string& protocol, const std::string& schema_name,
             const std::string& origins_path, const std::string& out_path,
             std::optional<std::uint64_t> seed) {
  const dh::LabeledSeries series = dh::load_csv(truth_path, parse_schema(schema_name));
  const std::vector<std::int32_t> predicted = read_labels(pred_path);
  dh::EvalReport report;
  if (protocol == "dense") {
    if (predicted.size() != series.length()) {
      throw dh::InputError("dense protocol: " + std::to_string(predicted.size()) +
                           " predictions for " + std::to_string(series.length()) + " samples");
    }
    report = dh::evaluate_dense(series.labels, predicted, series.num_classes());
    report.model_kind = "dense";
  } else if (protocol == "window-unified") {
    const std::string opath = origins_path.empty() ? pred_path + ".origins" : origins_path;
    const OriginsFile origins = read_origins(opath);
    report = dh::evaluate_unified(series.labels, predicted, origins.origins, origins.window,
                                  origins.overlap, series.num_classes());
    report.model_kind = "window-unified";
  } else {
    throw dh::ConfigError("unknown protocol '" + protocol +
                          "' (expected dense or window-unified)");
  }
  if (seed) report.seed = static_cast<std::int64_t>(*seed);
  emit_json(out_path, dh::report_to_json(report));
  return 0;
}

int cmd_bench(const std::string& model_path, const std::string& series_path,
              const std::string& schema_name, std::optional<std::uint64_t> seed_opt,
              const std::string& out_path) {
  const std::uint64_t seed = seed_opt.value_or(0);
  const dh::ModelContainer box = dh::load_model_container(model_path);
  const dh::LabeledSeries series = dh::load_csv(series_path, parse_schema(schema_name));

  json j;
  j["model_kind"] = dh::model_kind_name(box.kind);
  j["seed"] = seed;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t samples = 0;
  if (box.kind == dh::ModelKind::UNet || box.kind == dh::ModelKind::Fcn) {
    const std::size_t n = box.config.at("subseq_length").get<std::size_t>();
    auto subseqs = dh::extract_subsequences(series, n, 0.0);
    auto [train_set, test_set] = dh::split(subseqs, 0.3, seed);
    if (box.kind == dh::ModelKind::UNet) {
      const dh::UNetModel model = dh::unet_from_container(box);
      for (const auto& s : test_set) {
        samples += dh::predict_dense(model, s.values).size();
      }
    } else {
      const dh::FcnModel model = dh::fcn_from_container(box);
      for (const auto& s : test_set) {
        samples += dh::fcn_predict_dense(model, s.values).size();
      }
    }
  } else {
    const std::size_t w = box.config.at("window").get<std::size_t>();
    auto windows = dh::window_segment(series, w, 0.5);
    auto [train_set, test_set] = dh::split(windows, 0.3, seed);
    if (box.kind == dh::ModelKind::WindowedCnn) {
      const dh::WindowedCnnModel model = dh::cnn_from_container(box);
      samples = dh::cnn_predict(model, test_set).size() * model.config.window;
    } else {
      const dh::KnnIndex index = dh::knn_from_container(box);
      samples = dh::knn_predict(index, test_set).size() * index.window;
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
  j["samples"] = samples;
  j["seconds"] = elapsed.count();
  emit_json(out_path, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense per-sample activity segmentation engine"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string out;
  app.add_option("--seed", seed, "Override the config seed")->group("Global");
  app.add_option("--out", out, "Override the output path")->group("Global");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic plain-CSV dataset");
  synth->fallthrough();
  std::string synth_spec;
  std::string synth_out;
  synth->add_option("spec", synth_spec, "Synthetic spec json")->required();
  synth->add_option("output", synth_out, "Output csv path");

  auto* train = app.add_subcommand("train", "Train the configured model");
  train->fallthrough();
  std::string train_config;
  train->add_option("--config", train_config, "Run config json")->required();

  auto* predict = app.add_subcommand("predict", "Predict labels for a series");
  predict->fallthrough();
  std::string pr_model, pr_series, pr_out, pr_schema = "plain";
  predict->add_option("model", pr_model, "Model file")->required();
  predict->add_option("series", pr_series, "Series csv")->required();
  predict->add_option("output", pr_out, "Output label file");
  predict->add_option("--schema", pr_schema, "Series schema: plain|wisdm");

  auto* eval = app.add_subcommand("eval", "Score predictions against a labeled series");
  eval->fallthrough();
  std::string ev_truth, ev_pred, ev_protocol = "dense", ev_schema = "plain", ev_origins;
  eval->add_option("truth", ev_truth, "Labeled series csv")->required();
  eval->add_option("prediction", ev_pred, "Predicted label file")->required();
  eval->add_option("--protocol", ev_protocol, "dense|window-unified");
  eval->add_option("--schema", ev_schema, "Series schema: plain|wisdm");
  eval->add_option("--origins", ev_origins, "Origins file (defaults to <prediction>.origins)");

  auto* bench = app.add_subcommand("bench", "Time prediction over the 30% test split");
  bench->fallthrough();
  std::string bn_model, bn_series, bn_schema = "plain";
  bench->add_option("model", bn_model, "Model file")->required();
  bench->add_option("series", bn_series, "Series csv")->required();
  bench->add_option("--schema", bn_schema, "Series schema: plain|wisdm");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      std::string target = !out.empty() ? out : synth_out;
      if (target.empty()) throw dh::ConfigError("synth needs an output path (or --out)");
      return cmd_synth(synth_spec, target, seed);
    }
    if (train->parsed()) return cmd_train(train_config, seed, out);
    if (predict->parsed()) {
      std::string target = !out.empty() ? out : pr_out;
      if (target.empty()) throw dh::ConfigError("predict needs an output path (or --out)");
      return cmd_predict(pr_model, pr_series, target, pr_schema);
    }
    if (eval->parsed()) {
      return cmd_eval(ev_truth, ev_pred, ev_protocol, ev_schema, ev_origins, out, seed);
    }
    if (bench->parsed()) return cmd_bench(bn_model, bn_series, bn_schema, seed, out);
  } catch (const dh::Error& e) {
    std::cerr << "error (" << dh::error_kind_name(e.kind()) << "): " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
