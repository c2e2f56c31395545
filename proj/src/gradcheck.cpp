// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "delight/block.hpp"
#include "delight/data.hpp"
#include "delight/dextra.hpp"
#include "delight/group_linear.hpp"
#include "delight/model.hpp"
#include "delight/ops.hpp"

namespace delight {

bool GradcheckReport::passed() const {
  return std::all_of(groups.begin(), groups.end(), [&](const auto& g) { return g.max_rel_error < tolerance; });
}

double GradcheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& g : groups) worst = std::max(worst, g.max_rel_error);
  return worst;
}

std::string GradcheckReport::failing_groups() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& g : groups) {
    if (g.max_rel_error < tolerance) continue;
    out << (first ? "" : ", ") << g.name;
    first = false;
  }
  return out.str();
}

GradcheckReport gradcheck(const std::string& component, const std::function<Tensor()>& loss_fn,
                          const std::vector<NamedTensor>& wrt, const GradcheckOptions& options) {
  GradcheckReport report{component, options.tolerance, {}};
  if (wrt.empty()) return report;

  for (const auto& w : wrt) {
    Tensor t = w.tensor;
    t.set_requires_grad(true);
    t.zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(loss_fn());
  }
  for (const auto& w : wrt) {
    analytic.push_back(w.tensor.has_grad() ? std::vector<double>(w.tensor.grad().begin(), w.tensor.grad().end())
                                           : std::vector<double>(w.tensor.numel(), 0.0));
  }

  for (std::size_t i = 0; i < wrt.size(); ++i) {
    Tensor t = wrt[i].tensor;
    auto values = t.mutable_data();
    GradcheckGroup group{wrt[i].name, values.size(), 0.0, 0.0};
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double original = values[j];
      auto at = [&](double offset) {
        values[j] = original + offset;
        const double v = loss_fn().item();
        values[j] = original;
        return v;
      };
      const double h = options.step;
      const double numeric = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
      const double a = analytic[i][j];
      const double err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      group.max_abs_error = std::max(group.max_abs_error, err);
      group.max_rel_error = std::max(group.max_rel_error, err / denom);
    }
    report.groups.push_back(group);
  }
  return report;
}

// ---- component suite ----

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = uniform(rng, lo, hi);
  return Tensor(std::move(shape), std::move(values));
}

// Random linear functional sum(w * y) with fixed w.
struct Probe {
  Tensor weights;
  Tensor operator()(const Tensor& y) const { return sum(mul(y, weights)); }
};

Probe make_probe(const Shape& shape, Rng& rng) { return {random_tensor(shape, rng, -1.0, 1.0)}; }

std::vector<NamedTensor> store_tensors(const ParameterStore& store, const std::string& prefix = "") {
  std::vector<NamedTensor> out;
  for (const auto& e : store.entries()) out.push_back({prefix + e.name, e.value});
  return out;
}

void append_report(GradcheckReport& dst, const GradcheckReport& src, const std::string& prefix) {
  for (auto g : src.groups) {
    g.name = prefix + g.name;
    dst.groups.push_back(g);
  }
}

GradcheckReport check_primitives(const GradcheckOptions& opt, Rng& rng) {
  GradcheckReport all{"primitives", opt.tolerance, {}};
  auto run = [&](const std::string& name, const std::function<Tensor()>& fn, std::vector<NamedTensor> wrt) {
    append_report(all, gradcheck(name, fn, wrt, opt), name + ".");
  };

  {
    Tensor a = random_tensor({2, 3, 4}, rng), b = random_tensor({2, 4, 5}, rng), w = random_tensor({4, 5}, rng);
    auto pa = make_probe({2, 3, 5}, rng);
    run("matmul", [=] { return pa(matmul(a, b)); }, {{"a", a}, {"b", b}});
    run("matmul_shared", [=] { return pa(matmul(a, w)); }, {{"a", a}, {"b", w}});
  }
  {
    Tensor x = random_tensor({3, 4}, rng);
    auto p = make_probe({4, 3}, rng);
    run("transpose", [=] { return p(transpose_last(x)); }, {{"x", x}});
  }
  {
    Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4}, rng), c = random_tensor({3, 4}, rng);
    auto p = make_probe({3, 4}, rng);
    run("add", [=] { return p(add(a, b)); }, {{"a", a}, {"b", b}});
    run("mul", [=] { return p(mul(a, c)); }, {{"a", a}, {"b", c}});
    run("scale", [=] { return p(scale(a, -1.7)); }, {{"x", a}});
  }
  {
    Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 2}, rng);
    auto p = make_probe({2, 5}, rng);
    const std::array<std::size_t, 3> sizes{1, 3, 1};
    auto q = make_probe({2, 3}, rng);
    run("concat", [=] { return p(concat(std::array<Tensor, 2>{a, b}, 1)); }, {{"a", a}, {"b", b}});
    Tensor c = random_tensor({2, 5}, rng);
    run("split", [=] {
      auto parts = split(c, 1, sizes);
      return add(q(parts[1]), sum(mul(parts[0], parts[2])));
    }, {{"x", c}});
  }
  {
    Tensor x = random_tensor({3, 6}, rng);
    const std::vector<std::size_t> perm{4, 0, 5, 2, 1, 3};
    auto p = make_probe({3, 6}, rng);
    run("permute_features", [=] { return p(permute_features(x, perm)); }, {{"x", x}});
    run("gelu", [=] { return p(gelu(x)); }, {{"x", x}});
    run("softmax_last", [=] { return p(softmax(x, -1)); }, {{"x", x}});
    run("softmax_first", [=] { return p(softmax(x, 0)); }, {{"x", x}});
    Tensor gain = random_tensor({6}, rng), bias = random_tensor({6}, rng);
    run("layer_norm", [=] { return p(layer_norm(x, gain, bias)); }, {{"x", x}, {"gain", gain}, {"bias", bias}});
    Rng dropout_rng(7);
    run("dropout", [=]() mutable {
      Rng local = dropout_rng;  // same mask on every evaluation
      return p(dropout(x, 0.3, true, local));
    }, {{"x", x}});
  }
  {
    Tensor logits = random_tensor({4, 5}, rng);
    const std::vector<int> targets{1, 4, 0, 2};
    run("cross_entropy_smoothed", [=] { return cross_entropy_smoothed(logits, targets, 0.1, 0); }, {{"logits", logits}});
    Tensor table = random_tensor({5, 3}, rng);
    const std::vector<int> ids{1, 3, 3, 0};
    auto p = make_probe({2, 2, 3}, rng);
    run("embedding", [=] { return p(embedding(table, ids, {2, 2})); }, {{"table", table}});
  }
  return all;
}

GradcheckReport check_glt(const GradcheckOptions& opt, Rng& rng) {
  ParameterStore store;
  GroupLinear layer(store, "glt", 8, 8, 4, rng);
  Tensor x = random_tensor({3, 8}, rng);
  auto p = make_probe({3, 8}, rng);
  auto wrt = store_tensors(store);
  wrt.push_back({"x", x});
  return gradcheck("glt", [&] { return p(layer.forward(x)); }, wrt, opt);
}

GradcheckReport check_shuffle_mixer(const GradcheckOptions& opt, Rng& rng) {
  ParameterStore store;
  GroupLinear consumer(store, "consumer", 16, 8, 2, rng);
  Tensor x = random_tensor({3, 8}, rng), y = random_tensor({3, 8}, rng);
  auto p = make_probe({3, 8}, rng);
  auto wrt = store_tensors(store);
  wrt.push_back({"x", x});
  wrt.push_back({"y", y});
  return gradcheck("shuffle+mixer", [&] { return p(consumer.forward(input_mixer(x, feature_shuffle(y, 4), 2))); },
                   wrt, opt);
}

GradcheckReport check_dextra(const GradcheckOptions& opt, Rng& rng) {
  ParameterStore store;
  DextraConfig cfg{.input_dim = 32, .output_dim = 16, .depth = 4, .width_mult = 2.0, .max_groups = 4};
  Dextra unit(store, "dextra", cfg, rng);
  Tensor x = random_tensor({3, 32}, rng);
  auto p = make_probe({3, 16}, rng);
  auto wrt = store_tensors(store);
  wrt.push_back({"x", x});
  return gradcheck("dextra", [&] { return p(unit.forward(x)); }, wrt, opt);
}

GradcheckReport check_attention(const GradcheckOptions& opt, Rng& rng) {
  Tensor q = random_tensor({2, 4, 8}, rng), k = random_tensor({2, 5, 8}, rng), v = random_tensor({2, 5, 8}, rng);
  Tensor qc = random_tensor({2, 4, 8}, rng), kc = random_tensor({2, 4, 8}, rng), vc = random_tensor({2, 4, 8}, rng);
  auto p = make_probe({2, 4, 8}, rng);
  GradcheckReport report{"attention", opt.tolerance, {}};
  const AttentionMask padded{.causal = false, .key_lengths = {5, 3}};
  append_report(report, gradcheck("attention", [&] { return p(single_head_attention(q, k, v, padded)); },
                                  {{"q", q}, {"k", k}, {"v", v}}, opt), "padded.");
  const AttentionMask causal{.causal = true};
  append_report(report, gradcheck("attention", [&] { return p(single_head_attention(qc, kc, vc, causal)); },
                                  {{"q", qc}, {"k", kc}, {"v", vc}}, opt), "causal.");
  return report;
}

GradcheckReport check_light_ffn(const GradcheckOptions& opt, Rng& rng) {
  ParameterStore store;
  BlockConfig cfg{.model_dim = 16, .attn_dim = 8, .ffn_reduction = 4.0};
  LightFfn ffn(store, "ffn", cfg, rng);
  Tensor x = random_tensor({3, 16}, rng);
  auto p = make_probe({3, 16}, rng);
  auto wrt = store_tensors(store);
  wrt.push_back({"x", x});
  return gradcheck("light_ffn", [&] { return p(ffn.forward(x)); }, wrt, opt);
}

BlockConfig small_block() {
  return {.model_dim = 32, .attn_dim = 16, .depth = 4, .width_mult = 2.0, .ffn_reduction = 4.0, .max_groups = 2};
}

GradcheckReport check_encoder_block(const GradcheckOptions& opt, Rng& rng) {
  ParameterStore store;
  EncoderBlock block(store, "enc", small_block(), rng);
  Tensor x = random_tensor({2, 4, 32}, rng);
  auto p = make_probe({2, 4, 32}, rng);
  auto wrt = store_tensors(store);
  wrt.push_back({"x", x});
  const AttentionMask mask{.causal = false, .key_lengths = {4, 3}};
  return gradcheck("encoder_block", [&] { return p(block.forward(x, mask)); }, wrt, opt);
}

GradcheckReport check_decoder_block(const GradcheckOptions& opt, Rng& rng) {
  ParameterStore store;
  DecoderBlock block(store, "dec", small_block(), rng);
  Tensor x = random_tensor({2, 4, 32}, rng), enc = random_tensor({2, 5, 32}, rng);
  auto p = make_probe({2, 4, 32}, rng);
  auto wrt = store_tensors(store);
  wrt.push_back({"x", x});
  wrt.push_back({"enc_out", enc});
  const AttentionMask source{.causal = false, .key_lengths = {5, 3}};
  return gradcheck("decoder_block", [&] { return p(block.forward(x, enc, {.causal = true}, source)); }, wrt, opt);
}

GradcheckReport check_full_model(const GradcheckOptions& opt, std::uint64_t seed) {
  GradcheckReport report{"full_model", opt.tolerance, {}};
  ModelConfig cfg;
  cfg.vocab = 12;
  cfg.embed_dim = 16;
  cfg.model_dim = 32;
  cfg.scaling = {.min_depth = 2, .max_depth = 3, .width_mult = 2.0, .blocks = 2};
  cfg.max_positions = 16;
  cfg.seed = seed;

  cfg.task = TaskKind::lm;
  DelightModel lm(cfg);
  const std::vector<std::vector<int>> windows{{3, 5, 7, 4, 9, 11}, {10, 4, 4, 6, 8, 3}};
  const Batch lm_batch = make_lm_batch(windows);
  append_report(report, gradcheck("full_model", [&] { return lm.loss(lm_batch, 0.1); },
                                  store_tensors(lm.parameters()), opt), "lm.");

  cfg.task = TaskKind::seq2seq;
  DelightModel s2s(cfg);
  const std::vector<Seq2SeqExample> examples{{{3, 4, 5}, {3, 4, 5}}, {{6, 7, 8, 9, 10}, {6, 7, 8, 9, 10}}};
  const Batch s2s_batch = make_seq2seq_batch(examples);
  append_report(report, gradcheck("full_model", [&] { return s2s.loss(s2s_batch, 0.1); },
                                  store_tensors(s2s.parameters()), opt), "seq2seq.");
  return report;
}

}  // namespace

const std::vector<std::string>& gradcheck_components() {
  static const std::vector<std::string> names{"primitives",    "glt",           "shuffle+mixer", "dextra",
                                              "attention",     "light_ffn",     "encoder_block", "decoder_block",
                                              "full_model"};
  return names;
}

std::vector<GradcheckReport> run_gradcheck(const std::string& component, const GradcheckOptions& options,
                                           std::uint64_t seed) {
  const auto& names = gradcheck_components();
  if (component != "all" && std::find(names.begin(), names.end(), component) == names.end()) {
    throw std::invalid_argument("unknown gradcheck component: " + component);
  }
  std::vector<GradcheckReport> reports;
  for (const auto& name : names) {
    if (component != "all" && component != name) continue;
    Rng rng(seed);
    if (name == "primitives") reports.push_back(check_primitives(options, rng));
    if (name == "glt") reports.push_back(check_glt(options, rng));
    if (name == "shuffle+mixer") reports.push_back(check_shuffle_mixer(options, rng));
    if (name == "dextra") reports.push_back(check_dextra(options, rng));
    if (name == "attention") reports.push_back(check_attention(options, rng));
    if (name == "light_ffn") reports.push_back(check_light_ffn(options, rng));
    if (name == "encoder_block") reports.push_back(check_encoder_block(options, rng));
    if (name == "decoder_block") reports.push_back(check_decoder_block(options, rng));
    if (name == "full_model") reports.push_back(check_full_model(options, seed));
  }
  return reports;
}

}  // namespace delight
