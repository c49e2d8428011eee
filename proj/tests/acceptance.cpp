// Acceptance suite: one pass/fail line per criterion, exit 0 only if every
// checked criterion holds. Invoke with the CLI binary path as argv[1] (used
// by the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "densehar/densehar.hpp"

namespace fs = std::filesystem;
using namespace densehar;

namespace {

int g_failures = 0;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void report(int number, const std::string& name, bool pass, const std::string& detail,
            bool skip = false) {
  const char* tag = skip ? "SKIP" : pass ? "PASS" : "FAIL";
  std::printf("[%s] criterion %d: %s — %s\n", tag, number, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass && !skip) ++g_failures;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

double projected_sum(const Tensor& out, const Tensor& proj) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data[i] * proj.data[i];
  return s;
}

// ---------------------------------------------------------------------------
// Criterion 1: finite-difference gradient suite, >= 20 random shapes per op.

double check_conv_shapes(Rng& rng, std::size_t trials) {
  double worst = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t b = 1 + rng.below(3);
    const std::size_t cin = 1 + rng.below(4);
    const std::size_t cout = 1 + rng.below(4);
    const std::size_t k = 1 + rng.below(5);
    const std::size_t stride = 1 + rng.below(2);
    const std::size_t pad = rng.below(3);
    const std::size_t lout = 1 + rng.below(9);
    const std::size_t padded = (lout - 1) * stride + k;
    if (padded < 2 * pad + 1) continue;
    const ConvSpec spec{k, stride, pad};
    Tensor input = random_tensor({b, cin, padded - 2 * pad}, rng);
    Tensor weights = random_tensor({cout, cin, k}, rng);
    Tensor bias = random_tensor({cout}, rng);
    Tensor proj = random_tensor({b, cout, lout}, rng);
    auto fwd = [&](const std::vector<Tensor>& in) {
      return projected_sum(conv1d_forward(in[0], in[1], in[2], spec), proj);
    };
    auto bwd = [&](const std::vector<Tensor>& in) {
      Conv1dGrads g = conv1d_backward(proj, in[0], in[1], spec);
      return std::vector<Tensor>{g.input, g.weights, g.bias};
    };
    worst = std::max(worst, grad_check(fwd, bwd, {input, weights, bias}, 1e-4).max_rel_err);
  }
  return worst;
}

double check_upconv_shapes(Rng& rng, std::size_t trials) {
  double worst = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t b = 1 + rng.below(3);
    const std::size_t cin = 1 + rng.below(4);
    const std::size_t cout = 1 + rng.below(4);
    const std::size_t len = 1 + rng.below(7);
    const std::size_t stride = 1 + rng.below(3);
    const std::size_t k = stride + rng.below(2);
    Tensor input = random_tensor({b, cin, len}, rng);
    Tensor weights = random_tensor({cin, cout, k}, rng);
    Tensor bias = random_tensor({cout}, rng);
    Tensor proj = random_tensor({b, cout, (len - 1) * stride + k}, rng);
    auto fwd = [&](const std::vector<Tensor>& in) {
      return projected_sum(upconv1d_forward(in[0], in[1], in[2], stride), proj);
    };
    auto bwd = [&](const std::vector<Tensor>& in) {
      Upconv1dGrads g = upconv1d_backward(proj, in[0], in[1], stride);
      return std::vector<Tensor>{g.input, g.weights, g.bias};
    };
    worst = std::max(worst, grad_check(fwd, bwd, {input, weights, bias}, 1e-4).max_rel_err);
  }
  return worst;
}

double check_relu_shapes(Rng& rng, std::size_t trials) {
  double worst = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    Tensor input({1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(12)});
    // keep activations away from the kink at 0
    for (double& v : input.data) {
      v = rng.uniform(0.05, 1.0) * (rng.below(2) ? 1.0 : -1.0);
    }
    Tensor proj = random_tensor(input.shape, rng);
    auto fwd = [&](const std::vector<Tensor>& in) { return projected_sum(relu(in[0]), proj); };
    auto bwd = [&](const std::vector<Tensor>& in) {
      return std::vector<Tensor>{relu_backward(proj, in[0])};
    };
    worst = std::max(worst, grad_check(fwd, bwd, {input}, 1e-4).max_rel_err);
  }
  return worst;
}

double check_maxpool_shapes(Rng& rng, std::size_t trials) {
  double worst = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    Tensor input({1 + rng.below(3), 1 + rng.below(4), 2 * (1 + rng.below(8))});
    // keep pair members apart so the finite-difference step cannot flip a tie
    const std::size_t pairs = input.size() / 2;
    for (std::size_t p = 0; p < pairs; ++p) {
      double a = rng.uniform(-1, 1);
      double b = rng.uniform(-1, 1);
      while (std::abs(a - b) < 1e-3) b = rng.uniform(-1, 1);
      input.data[2 * p] = a;
      input.data[2 * p + 1] = b;
    }
    Tensor proj({input.shape[0], input.shape[1], input.shape[2] / 2});
    for (double& v : proj.data) v = rng.uniform(-1, 1);
    auto fwd = [&](const std::vector<Tensor>& in) {
      return projected_sum(maxpool1d(in[0]).output, proj);
    };
    auto bwd = [&](const std::vector<Tensor>& in) {
      MaxPoolResult res = maxpool1d(in[0]);
      return std::vector<Tensor>{maxpool1d_backward(proj, res.argmax, in[0].shape[2])};
    };
    worst = std::max(worst, grad_check(fwd, bwd, {input}, 1e-4).max_rel_err);
  }
  return worst;
}

double check_softmax_shapes(Rng& rng, std::size_t trials) {
  double worst = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::size_t b = 1 + rng.below(3);
    const std::size_t nc = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(8);
    Tensor logits = random_tensor({b, nc, n}, rng, -2.0, 2.0);
    std::vector<std::int32_t> targets(b * n);
    for (auto& t : targets) t = static_cast<std::int32_t>(rng.below(nc));
    auto fwd = [&](const std::vector<Tensor>& in) {
      return softmax_cross_entropy(in[0], targets).loss;
    };
    auto bwd = [&](const std::vector<Tensor>& in) {
      return std::vector<Tensor>{softmax_cross_entropy(in[0], targets).grad_logits};
    };
    worst = std::max(worst, grad_check(fwd, bwd, {logits}, 1e-4).max_rel_err);
  }
  return worst;
}

void criterion_1() {
  const double t0 = now_s();
  Rng rng(101);
  const double worst_conv = check_conv_shapes(rng, 22);
  const double worst_upconv = check_upconv_shapes(rng, 22);
  const double worst_relu = check_relu_shapes(rng, 22);
  const double worst_pool = check_maxpool_shapes(rng, 22);
  const double worst_softmax = check_softmax_shapes(rng, 22);
  const double worst = std::max({worst_conv, worst_upconv, worst_relu, worst_pool,
                                 worst_softmax});
  const double elapsed = now_s() - t0;
  std::ostringstream detail;
  detail << "max rel err " << worst << " (conv " << worst_conv << ", upconv " << worst_upconv
         << ", relu " << worst_relu << ", maxpool " << worst_pool << ", softmax-ce "
         << worst_softmax << ") over 22 shapes each, " << elapsed << " s";
  report(1, "finite-difference gradient suite < 1e-4", worst < 1e-4 && elapsed < 60.0,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 2: forward kernels vs naive quadruple-loop references.

Tensor naive_conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                    std::size_t kernel, std::size_t stride, std::size_t padding) {
  const std::size_t batch = input.shape[0], cin = input.shape[1], len = input.shape[2];
  const std::size_t cout = weights.shape[0];
  const std::size_t lout = (len + 2 * padding - kernel) / stride + 1;
  Tensor out({batch, cout, lout});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t oc = 0; oc < cout; ++oc)
      for (std::size_t t = 0; t < lout; ++t) {
        double acc = bias.data[oc];
        for (std::size_t ic = 0; ic < cin; ++ic)
          for (std::size_t kk = 0; kk < kernel; ++kk) {
            const long pos = static_cast<long>(t * stride + kk) - static_cast<long>(padding);
            if (pos >= 0 && pos < static_cast<long>(len))
              acc += input.at(b, ic, static_cast<std::size_t>(pos)) * weights.at(oc, ic, kk);
          }
        out.at(b, oc, t) = acc;
      }
  return out;
}

Tensor naive_upconv1d(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      std::size_t stride) {
  const std::size_t batch = input.shape[0], cin = input.shape[1], len = input.shape[2];
  const std::size_t cout = weights.shape[1], kernel = weights.shape[2];
  const std::size_t lout = (len - 1) * stride + kernel;
  Tensor out({batch, cout, lout});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t t = 0; t < lout; ++t) out.at(b, co, t) = bias.data[co];
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t t = 0; t < len; ++t)
        for (std::size_t co = 0; co < cout; ++co)
          for (std::size_t kk = 0; kk < kernel; ++kk)
            out.at(b, co, t * stride + kk) += input.at(b, ci, t) * weights.at(ci, co, kk);
  return out;
}

void criterion_2() {
  const double t0 = now_s();
  Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t b = 1 + rng.below(3);
    const std::size_t cin = 1 + rng.below(5);
    const std::size_t cout = 1 + rng.below(5);
    const std::size_t k = 1 + rng.below(5);
    const std::size_t stride = 1 + rng.below(3);
    const std::size_t pad = rng.below(3);
    const std::size_t lout = 1 + rng.below(16);
    const std::size_t padded = (lout - 1) * stride + k;
    if (padded < 2 * pad + 1) continue;
    Tensor input = random_tensor({b, cin, padded - 2 * pad}, rng);
    Tensor weights = random_tensor({cout, cin, k}, rng);
    Tensor bias = random_tensor({cout}, rng);
    Tensor got = conv1d_forward(input, weights, bias, ConvSpec{k, stride, pad});
    Tensor want = naive_conv1d(input, weights, bias, k, stride, pad);
    for (std::size_t j = 0; j < got.size(); ++j) {
      worst = std::max(worst, std::abs(got.data[j] - want.data[j]));
    }
  }
  for (int i = 0; i < 100; ++i) {
    const std::size_t b = 1 + rng.below(3);
    const std::size_t cin = 1 + rng.below(5);
    const std::size_t cout = 1 + rng.below(5);
    const std::size_t len = 1 + rng.below(12);
    const std::size_t stride = 1 + rng.below(3);
    const std::size_t k = stride + rng.below(3);
    Tensor input = random_tensor({b, cin, len}, rng);
    Tensor weights = random_tensor({cin, cout, k}, rng);
    Tensor bias = random_tensor({cout}, rng);
    Tensor got = upconv1d_forward(input, weights, bias, stride);
    Tensor want = naive_upconv1d(input, weights, bias, stride);
    for (std::size_t j = 0; j < got.size(); ++j) {
      worst = std::max(worst, std::abs(got.data[j] - want.data[j]));
    }
  }
  const double elapsed = now_s() - t0;
  std::ostringstream detail;
  detail << "max abs deviation " << worst << " over 100 conv + 100 upconv cases, " << elapsed
         << " s";
  report(2, "kernel oracles within 1e-12 of naive references", worst < 1e-12 && elapsed < 30.0,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: architecture identity at reference defaults.

void criterion_3() {
  UNetConfig cfg;
  cfg.seed = 3;
  UNetModel model = build_unet(cfg);
  const bool layers_ok = model.conv_layer_count() == 28;
  Rng rng(303);
  Tensor out = model.forward(random_tensor({1, 3, 224}, rng));
  const bool shape_ok = out.shape == std::vector<std::size_t>{1, 6, 224};
  std::ostringstream detail;
  detail << "conv layers " << model.conv_layer_count() << ", forward [1,3,224] -> "
         << out.shape_string();
  report(3, "28 conv layers and length-preserving forward", layers_ok && shape_ok,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: metric arithmetic on the hand fixture.

void criterion_4() {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 3;
  cm.at(0, 1) = 1;
  cm.at(1, 0) = 1;
  cm.at(1, 1) = 5;
  const double acc = accuracy(cm);
  const auto prf = per_class_prf(cm);
  const double wf1 = weighted_f1(cm);
  const bool ok = std::abs(acc - 0.8) < 1e-12 && std::abs(prf[0].f1 - 0.75) < 1e-12 &&
                  std::abs(prf[1].f1 - 5.0 / 6.0) < 1e-12 && std::abs(wf1 - 0.8) < 1e-12;
  std::ostringstream detail;
  detail << "cm [[3,1],[1,5]]: acc " << acc << ", f1 {" << prf[0].f1 << ", " << prf[1].f1
         << "}, weighted f1 " << wf1;
  report(4, "metric exactness on the hand fixture", ok, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: unified protocol vs a brute-force reference.

std::vector<std::int32_t> brute_force_expansion(const std::vector<std::int32_t>& labels,
                                                const std::vector<std::size_t>& origins,
                                                std::size_t w) {
  // Direct transcription of the retention rule: a sample takes the label of
  // the (unique) even window covering it; past every even window's reach, the
  // final odd window labels its leftover suffix.
  std::size_t even_reach = 0;
  for (std::size_t i = 0; i < labels.size(); i += 2) even_reach = origins[i] + w;
  std::size_t total = even_reach;
  const bool has_final_odd = labels.size() % 2 == 0;
  if (has_final_odd) total = origins.back() + w;
  std::vector<std::int32_t> out;
  for (std::size_t t = 0; t < total; ++t) {
    std::int32_t label = -1;
    for (std::size_t i = 0; i < labels.size(); i += 2) {
      if (t >= origins[i] && t < origins[i] + w) {
        label = labels[i];
        break;
      }
    }
    if (label < 0 && has_final_odd && t >= even_reach && t >= origins.back() &&
        t < origins.back() + w) {
      label = labels.back();
    }
    out.push_back(label);
  }
  return out;
}

void criterion_5() {
  // 40-sample series, W=8, 50% overlap: 9 windows at origins 0,4,...,32.
  LabeledSeries series;
  series.sample_rate_hz = 10.0;
  series.class_names = {"a", "b", "c"};
  series.channels.assign(1, {});
  for (int t = 0; t < 40; ++t) {
    const std::int32_t cls = t < 12 ? 0 : t < 27 ? 1 : 2;
    series.labels.push_back(cls);
    series.channels[0].push_back(cls);
  }
  const std::size_t w = 8;
  const auto windows = window_segment(series, w, 0.5);
  std::vector<std::int32_t> labels;
  std::vector<std::size_t> origins;
  for (const auto& win : windows) {
    labels.push_back(label_window_majority(win.raw_labels));
    origins.push_back(win.origin);
  }
  const ExpandedPredictions got = expand_window_predictions(labels, origins, w, 0.5);
  const std::vector<std::int32_t> want = brute_force_expansion(labels, origins, w);
  bool ok = got.labels.size() == want.size() && got.labels.size() == 40;
  std::size_t first_mismatch = got.labels.size();
  if (ok) {
    for (std::size_t t = 0; t < want.size(); ++t) {
      if (got.labels[t] != want[t]) {
        ok = false;
        first_mismatch = t;
        break;
      }
    }
  }
  std::ostringstream detail;
  detail << windows.size() << " windows expanded to " << got.labels.size() << " samples, ";
  if (ok) {
    detail << "sample-for-sample match with brute force";
  } else {
    detail << "mismatch at sample " << first_mismatch;
  }
  report(5, "even-window expansion equals brute-force reference", ok, detail.str());
}

// ---------------------------------------------------------------------------
// Criteria 6/7: synthetic experiments (thresholds frozen from reference runs).

SyntheticSpec synthetic_task(std::size_t total, std::uint64_t seed, std::size_t seg_min,
                             std::size_t seg_max, double sigma) {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.channels = 3;
  spec.sample_rate_hz = 25.0;
  spec.segment_min = seg_min;
  spec.segment_max = seg_max;
  spec.total_length = total;
  spec.seed = seed;
  const double means[3] = {-2.0, 0.0, 2.0};
  for (int c = 0; c < 3; ++c) {
    SyntheticClass cls;
    cls.mean = {means[c], -means[c], 0.5 * means[c]};
    cls.amplitude = {0.5, 0.4, 0.3};
    cls.frequency_hz = {1.0 + c, 2.0, 3.0};
    cls.noise_sigma = sigma;
    spec.classes.push_back(cls);
  }
  return spec;
}

void criterion_6() {
  const double t0 = now_s();
  double mean_acc = 0.0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const LabeledSeries series =
        synth_generate(synthetic_task(224 * 40, 1000 + seed, 30, 120, 0.4));
    const auto subseqs = extract_subsequences(series, 224, 0.0);
    auto [train_set, test_set] = split(subseqs, 0.3, seed);
    UNetConfig cfg;  // reference defaults, three classes on this task
    cfg.num_classes = 3;
    cfg.seed = seed;
    UNetModel model = build_unet(cfg);
    TrainConfig tc;  // lr 0.001, batch 32, scaled to 30 epochs
    tc.epochs = 30;
    tc.seed = seed;
    fit(model, train_set, tc);
    std::size_t correct = 0, total = 0;
    for (const auto& s : test_set) {
      const auto labels = predict_dense(model, s.values);
      for (std::size_t t = 0; t < labels.size(); ++t) {
        correct += labels[t] == s.dense_labels[t];
        ++total;
      }
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(total);
    mean_acc += acc;
    per_seed << (seed > 1 ? ", " : "") << "seed " << seed << " " << acc;
  }
  mean_acc /= 3.0;
  const double elapsed = now_s() - t0;
  std::ostringstream detail;
  detail << "held-out accuracy mean " << mean_acc << " (" << per_seed.str() << "), " << elapsed
         << " s";
  report(6, "synthetic dense segmentation >= 0.95 in < 15 min",
         mean_acc >= 0.95 && elapsed < 900.0, detail.str());
}

void criterion_7() {
  const double t0 = now_s();
  double mean_unet = 0.0, mean_cnn = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const LabeledSeries train_series =
        synth_generate(synthetic_task(224 * 40, 2000 + seed, 16, 48, 0.4));
    const LabeledSeries eval_series =
        synth_generate(synthetic_task(224 * 12, 3000 + seed, 16, 48, 0.4));

    const auto subseqs = extract_subsequences(train_series, 224, 0.0);
    auto [utrain, utest] = split(subseqs, 0.3, seed);
    UNetConfig ucfg;
    ucfg.num_classes = 3;
    ucfg.seed = seed;
    UNetModel unet = build_unet(ucfg);
    TrainConfig tc;
    tc.epochs = 30;
    tc.seed = seed;
    fit(unet, utrain, tc);
    const auto dense = predict_dense(unet, eval_series.channels);
    mean_unet += evaluate_dense(eval_series.labels, dense, 3).accuracy;

    const auto windows = window_segment(train_series, 64, 0.5);
    auto [ctrain, ctest] = split(windows, 0.3, seed);
    CnnConfig ccfg;  // W=64, widths 32/64
    ccfg.num_classes = 3;
    ccfg.seed = seed;
    WindowedCnnModel cnn = build_cnn(ccfg);
    cnn_train(cnn, ctrain, WindowLabeler::Majority, tc);
    const auto eval_windows = window_segment(eval_series, 64, 0.5);
    std::vector<std::size_t> origins;
    for (const auto& w : eval_windows) origins.push_back(w.origin);
    const auto labels = cnn_predict(cnn, eval_windows);
    mean_cnn +=
        evaluate_unified(eval_series.labels, labels, origins, 64, 0.5, 3).accuracy;
  }
  mean_unet /= 3.0;
  mean_cnn /= 3.0;
  const double gap = mean_unet - mean_cnn;
  const double elapsed = now_s() - t0;
  std::ostringstream detail;
  detail << "segments 16-48 < W=64: unet " << mean_unet << " vs cnn-unified " << mean_cnn
         << ", gap " << gap << ", " << elapsed << " s";
  report(7, "unified-accuracy gap >= 0.05 on sub-window activities", gap >= 0.05, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI train determinism, byte-for-byte.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_9(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "densehar_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const nlohmann::json spec = {
      {"num_classes", 3},
      {"channels", 2},
      {"segment_min", 10},
      {"segment_max", 30},
      {"total_length", 768},
      {"seed", 6},
      {"classes",
       {{{"mean", {-2.0, 2.0}},
         {"amplitude", {0.5, 0.4}},
         {"frequency_hz", {1.0, 2.0}},
         {"noise_sigma", 0.3}},
        {{"mean", {0.0, 0.0}},
         {"amplitude", {0.5, 0.4}},
         {"frequency_hz", {2.0, 2.0}},
         {"noise_sigma", 0.3}},
        {{"mean", {2.0, -2.0}},
         {"amplitude", {0.5, 0.4}},
         {"frequency_hz", {3.0, 2.0}},
         {"noise_sigma", 0.3}}}}};
  std::ofstream(dir / "spec.json") << spec.dump();
  auto config = [&](const std::string& out) {
    return nlohmann::json{
        {"seed", 11},
        {"dataset", {{"synthetic", (dir / "spec.json").string()}}},
        {"model", "unet"},
        {"labeler", "dense"},
        {"unet", {{"base_features", 4}, {"levels", 3}, {"subseq_length", 64}}},
        {"train", {{"batch_size", 8}, {"epochs", 3}, {"test_fraction", 0.3}}},
        {"out_model", (dir / out).string()}};
  };
  std::ofstream(dir / "run_a.json") << config("a.dhm").dump();
  std::ofstream(dir / "run_b.json") << config("b.dhm").dump();
  const std::string quiet = " > " + (dir / "out.txt").string() + " 2>&1";
  const int ra =
      std::system((cli + " train --config " + (dir / "run_a.json").string() + quiet).c_str());
  const int rb =
      std::system((cli + " train --config " + (dir / "run_b.json").string() + quiet).c_str());
  bool ok = ra == 0 && rb == 0;
  std::string detail;
  if (!ok) {
    detail = "cli train exited nonzero";
  } else {
    const std::string a = slurp(dir / "a.dhm");
    const std::string b = slurp(dir / "b.dhm");
    ok = !a.empty() && a == b;
    std::ostringstream os;
    os << "two runs, " << a.size() << " byte model files, "
       << (ok ? "bit-identical" : "DIFFER");
    detail = os.str();
  }
  fs::remove_all(dir);
  report(9, "same config+seed trains to bit-identical model files", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const double t0 = now_s();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  report(8, "Table-1 score reproduction", true,
         "not reproducible at desk scale (full datasets, 100-epoch training, unpublished "
         "baseline configs); the README documents an optional extended WISDM run targeting "
         "accuracy >= 0.92, excluded from CI",
         /*skip=*/true);
  if (argc > 1) {
    criterion_9(argv[1]);
  } else {
    report(9, "same config+seed trains to bit-identical model files", false,
           "pass the CLI binary path as argv[1]");
  }
  std::printf("%s — %d failure(s), %.1f s total\n", g_failures == 0 ? "ACCEPTANCE PASSED"
                                                                    : "ACCEPTANCE FAILED",
              g_failures, now_s() - t0);
  return g_failures == 0 ? 0 : 1;
}
