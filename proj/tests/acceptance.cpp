// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "delight/accounting.hpp"
#include "delight/block.hpp"
#include "delight/checkpoint.hpp"
#include "delight/config.hpp"
#include "delight/dextra.hpp"
#include "delight/experiment.hpp"
#include "delight/gradcheck.hpp"
#include "delight/group_linear.hpp"
#include "delight/mac_counter.hpp"
#include "delight/model.hpp"
#include "delight/scaling.hpp"

using namespace delight;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << id << ' ' << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

template <class F>
void guarded(int id, const std::string& name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

class CpuTimer {
 public:
  double seconds() const { return static_cast<double>(std::clock() - start_) / CLOCKS_PER_SEC; }

 private:
  std::clock_t start_ = std::clock();
};

RunConfig config(const std::string& name) { return load_run_config(std::string(DELIGHT_CONFIG_DIR) + "/" + name); }

Tensor random_tensor(const Shape& shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return Tensor(shape, std::move(v));
}

void gradient_suite() {
  CpuTimer timer;
  const auto reports = run_gradcheck("all");
  const double secs = timer.seconds();
  bool ok = secs < 300.0;
  double worst = 0.0;
  std::string failing;
  for (const auto& r : reports) {
    worst = std::max(worst, r.max_rel_error());
    if (!r.passed()) {
      ok = false;
      failing += " " + r.component + "[" + r.failing_groups() + "]";
    }
  }
  report(1, "gradient_suite", ok && reports.size() == gradcheck_components().size(),
         std::to_string(reports.size()) + " components, max_rel_error=" + fmt(worst) + " (<1e-4), cpu=" +
             fmt(secs, 3) + "s (<300s)" + failing);
}

// Dense [d_in, d_out] block-diagonal matrix product, accumulated in long double.
void glt_oracle() {
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t g = std::size_t{1} << uniform_int(rng, 0, 5);
    const std::size_t gin = static_cast<std::size_t>(uniform_int(rng, 1, 20));
    const std::size_t gout = static_cast<std::size_t>(uniform_int(rng, 1, 20));
    const std::size_t rows = static_cast<std::size_t>(uniform_int(rng, 1, 8));
    const std::size_t d_in = g * gin, d_out = g * gout;
    const Tensor x = random_tensor({rows, d_in}, rng), w = random_tensor({g, gin, gout}, rng),
                 b = random_tensor({d_out}, rng);
    const Tensor y = group_linear(x, w, b);
    std::vector<double> dense(d_in * d_out, 0.0);
    for (std::size_t k = 0; k < g; ++k)
      for (std::size_t p = 0; p < gin; ++p)
        for (std::size_t q = 0; q < gout; ++q) dense[(k * gin + p) * d_out + k * gout + q] = w[(k * gin + p) * gout + q];
    double scale = 0.0, diff = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < d_out; ++j) {
        long double s = b[j];
        for (std::size_t i = 0; i < d_in; ++i) s += static_cast<long double>(x[r * d_in + i]) * dense[i * d_out + j];
        scale = std::max(scale, std::abs(static_cast<double>(s)));
        diff = std::max(diff, std::abs(y[r * d_out + j] - static_cast<double>(s)));
      }
    }
    worst = std::max(worst, diff / scale);
  }
  report(2, "glt_oracle", worst <= 1e-12, "100 configs, max normwise rel diff=" + fmt(worst) + " (<=1e-12)");
}

void group_schedule_check() {
  std::size_t bad = 0;
  for (std::size_t n = 2; n <= 12; ++n) {
    for (std::size_t gmax = 1; gmax <= 32; ++gmax) {
      const auto s = group_schedule(n, gmax);
      bool ok = s.size() == n && s.front() == 1 && s.back() == 1;
      for (std::size_t v : s) ok = ok && v >= 1 && v <= gmax;
      if (n % 2 == 0) ok = ok && std::equal(s.begin(), s.end(), s.rbegin());
      if (!ok) ++bad;
    }
  }
  const bool exact = group_schedule(8, 8) == std::vector<std::size_t>{1, 2, 4, 8, 8, 4, 2, 1};
  report(3, "group_schedule", bad == 0 && exact,
         std::to_string(11 * 32 - bad) + "/352 schedules valid, N=8 g_max=8 " + (exact ? "exact" : "WRONG"));
}

void scaling_endpoints() {
  bool ok = true;
  std::string detail;
  for (std::size_t nmax : {8u, 12u}) {
    const ScalingConfig cfg{.min_depth = 4, .max_depth = nmax, .width_mult = 2.0, .blocks = 0};
    const BlockPlan plan = blockwise_plan(cfg);
    const double last_w = 2.0 + static_cast<double>(nmax - 4) / 4.0;
    const bool here = plan.front().depth == 4 && plan.back().depth == nmax && plan.front().width_mult == 2.0 &&
                      plan.back().width_mult == last_w;
    ok = ok && here;
    detail += "N=4.." + std::to_string(nmax) + ": N^0=" + std::to_string(plan.front().depth) +
              " N^B-1=" + std::to_string(plan.back().depth) + " m_w^B-1=" + fmt(plan.back().width_mult) + "; ";
  }
  for (std::size_t n : {1u, 4u, 7u}) {
    const BlockPlan plan = blockwise_plan({.min_depth = n, .max_depth = n, .width_mult = 2.0, .blocks = 6});
    for (const auto& s : plan) ok = ok && s.depth == n && s.width_mult == 2.0;
  }
  report(4, "scaling_endpoints", ok, detail + "uniform plans constant");
}

void cost_formulas() {
  Rng rng(20);
  std::size_t matched = 0;
  for (int i = 0; i < 20; ++i) {
    ModelConfig cfg;
    cfg.task = i % 2 ? TaskKind::lm : TaskKind::seq2seq;
    cfg.vocab = static_cast<std::size_t>(uniform_int(rng, 8, 40));
    cfg.model_dim = 32 * static_cast<std::size_t>(uniform_int(rng, 1, 4));
    cfg.embed_dim = uniform_int(rng, 0, 2) ? cfg.model_dim : cfg.model_dim / 2;
    cfg.scaling.min_depth = static_cast<std::size_t>(uniform_int(rng, 2, 5));
    cfg.scaling.max_depth = cfg.scaling.min_depth + static_cast<std::size_t>(uniform_int(rng, 0, 3));
    cfg.scaling.width_mult = 1.0 + 0.5 * static_cast<double>(uniform_int(rng, 0, 5));
    cfg.scaling.blocks = static_cast<std::size_t>(uniform_int(rng, 1, 4));
    cfg.max_positions = 32;
    cfg.seed = rng();
    DelightModel model(cfg);
    std::vector<int> tokens(20);
    for (auto& t : tokens) t = static_cast<int>(uniform_int(rng, kFirstSymbol, static_cast<std::int64_t>(cfg.vocab)));
    MacCounter counter;
    {
      MacCounterScope scope(counter);
      if (cfg.task == TaskKind::lm) {
        Batch b;
        b.size = 1;
        b.target_len = tokens.size();
        b.target_in = tokens;
        b.target_out = tokens;
        (void)model.logits(b);
      } else {
        (void)model.greedy_decode(tokens, 20, false);
      }
    }
    if (counter.total() == model_cost(cfg, 20, 20).total_macs()) ++matched;
  }

  bool closed = true;
  for (std::size_t d : {16u, 32u, 64u, 128u}) {
    closed = closed && self_attention_macs(20, d) == 2 * d * 20 * 20;
    std::uint64_t sum = 0;
    for (std::size_t k = 1; k <= 20; ++k) sum += 2 * k * 20 * d;
    closed = closed && source_target_attention_macs(20, 20, d) == sum;
  }

  auto core = [&](std::size_t d) {
    const Tensor q = random_tensor({20, d}, rng), k = random_tensor({20, d}, rng), v = random_tensor({20, d}, rng);
    MacCounter counter;
    MacCounterScope scope(counter);
    (void)single_head_attention(q, k, v);
    return counter.total();
  };
  const std::uint64_t half = core(64), full = core(128);
  const bool ratio = 2 * half == full;
  report(5, "cost_formulas", matched == 20 && closed && ratio,
         std::to_string(matched) + "/20 models instrumented==analytical, closed forms " + (closed ? "exact" : "WRONG") +
             ", d_o=d_m/2 core ratio=" + fmt(static_cast<double>(half) / static_cast<double>(full)));
}

void ffn_reduction() {
  std::size_t bad = 0, checked = 0;
  Rng rng(6);
  for (std::size_t dm = 4; dm <= 1024; dm += 4) {
    ParameterStore store;
    const BlockConfig cfg{.model_dim = dm, .attn_dim = std::max<std::size_t>(1, dm / 2), .ffn_reduction = 4.0};
    LightFfn ffn(store, "ffn", cfg, rng);
    std::size_t weights = 0;
    for (const auto& e : store.entries())
      if (e.value.rank() >= 2) weights += e.value.numel();
    const std::size_t baseline = 2 * dm * (4 * dm);
    if (baseline != 16 * weights) ++bad;
    ++checked;
  }
  report(6, "ffn_reduction", bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                                           " widths with baseline/light weight ratio exactly 16");
}

void depth_formula() {
  bool ok = true;
  for (std::size_t lo = 1; lo <= 8; ++lo) {
    for (std::size_t hi = 1; hi <= 12; ++hi) {
      for (std::size_t blocks = 1; blocks <= 12; ++blocks) {
        const BlockPlan plan = blockwise_plan({.min_depth = lo, .max_depth = hi, .width_mult = 2.0, .blocks = blocks});
        std::size_t expect = 0;
        for (const auto& s : plan) expect += s.depth + 4;
        ok = ok && network_depth(plan) == expect;
      }
      ok = ok && baseline_transformer_depth(hi) == 4 * hi;
    }
  }
  report(7, "depth_formula", ok, "network_depth == sum(N^b+4) over 768 plans, baseline == 4B");
}

void copy_task() {
  const RunConfig cfg = config("copy.json");
  CpuTimer timer;
  DelightModel model(cfg.model);
  const TaskData data = make_task_data(cfg);
  const RunResult run = run_training(cfg, model, data, nullptr);
  const double secs = timer.seconds();
  const double acc = run.eval.token_accuracy.value_or(0.0);
  const bool ok = acc >= 0.99 && secs < 900.0 && cfg.train.steps <= 2000 && cfg.train.seed == 0 &&
                  cfg.model.vocab == 16 && cfg.model.model_dim == 64 && cfg.model.scaling.min_depth == 2 &&
                  cfg.model.scaling.max_depth == 4 && blockwise_plan(cfg.model.scaling).size() == 4;
  report(8, "copy_task", ok, "token_accuracy=" + fmt(acc) + " (>=0.99) after " + std::to_string(run.steps) +
                                 " steps, cpu=" + fmt(secs, 4) + "s (<900s)");
}

void char_lm() {
  const RunConfig cfg = config("char_lm.json");
  DelightModel model(cfg.model);
  const TaskData data = make_task_data(cfg);
  const RunResult run = run_training(cfg, model, data, nullptr);
  const double ppl = run.eval.perplexity, uni = run.eval.unigram_perplexity.value_or(0.0);
  report(9, "char_lm", ppl <= 0.8 * uni && cfg.train.steps <= 3000,
         "valid_ppl=" + fmt(ppl) + " unigram_ppl=" + fmt(uni) + " ratio=" + fmt(ppl / uni) + " (<=0.8) after " +
             std::to_string(run.steps) + " steps");
}

void ablations() {
  RunConfig base = config("ablation.json");
  std::vector<AblationRow> scaling;
  for (const auto& [name, cfg] : ablation_variants(base, "scaling")) scaling.push_back(run_ablation_variant("scaling", name, cfg));
  const AblationRow& blockwise = scaling.at(0);
  const AblationRow& uniform = scaling.at(1);
  const double gap = std::abs(static_cast<double>(blockwise.params) / static_cast<double>(uniform.params) - 1.0);
  report(10, "ablation_blockwise_vs_uniform", gap <= 0.05 && blockwise.valid_loss <= uniform.valid_loss,
         blockwise.variant + " loss=" + fmt(blockwise.valid_loss, 6) + " params=" + std::to_string(blockwise.params) +
             " vs " + uniform.variant + " loss=" + fmt(uniform.valid_loss, 6) +
             " params=" + std::to_string(uniform.params) + " (gap " + fmt(100 * gap, 3) + "% <=5%)");

  std::vector<AblationRow> shuffle;
  for (const auto& [name, cfg] : ablation_variants(base, "shuffle")) shuffle.push_back(run_ablation_variant("shuffle", name, cfg));
  const AblationRow& on = shuffle.at(0);
  const AblationRow& off = shuffle.at(1);
  report(10, "ablation_shuffle", on.valid_loss <= off.valid_loss,
         on.variant + " loss=" + fmt(on.valid_loss, 6) + " vs " + off.variant + " loss=" + fmt(off.valid_loss, 6));
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void determinism() {
  RunConfig cfg = config("copy.json");
  cfg.train.steps = 40;
  cfg.train.eval_every = 20;
  const fs::path dir = fs::temp_directory_path() / ("delight_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  for (const char* tag : {"a", "b"}) {
    DelightModel model(cfg.model);
    const TaskData data = make_task_data(cfg);
    std::ofstream metrics(dir / (std::string(tag) + ".jsonl"), std::ios::binary);
    const RunResult run = run_training(cfg, model, data, &metrics, false);
    save_checkpoint((dir / (std::string(tag) + ".bin")).string(),
                    make_checkpoint(model.parameters(), run.steps, config_hash(cfg), run_config_to_json(cfg).dump()));
  }
  const std::string ma = file_bytes(dir / "a.jsonl"), mb = file_bytes(dir / "b.jsonl");
  const std::string ca = file_bytes(dir / "a.bin"), cb = file_bytes(dir / "b.bin");
  fs::remove_all(dir);
  report(11, "determinism", !ma.empty() && !ca.empty() && ma == mb && ca == cb,
         "metrics " + std::to_string(ma.size()) + " bytes " + (ma == mb ? "identical" : "DIFFER") + ", checkpoint " +
             std::to_string(ca.size()) + " bytes " + (ca == cb ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  guarded(1, "gradient_suite", gradient_suite);
  guarded(2, "glt_oracle", glt_oracle);
  guarded(3, "group_schedule", group_schedule_check);
  guarded(4, "scaling_endpoints", scaling_endpoints);
  guarded(5, "cost_formulas", cost_formulas);
  guarded(6, "ffn_reduction", ffn_reduction);
  guarded(7, "depth_formula", depth_formula);
  guarded(11, "determinism", determinism);
  guarded(8, "copy_task", copy_task);
  guarded(9, "char_lm", char_lm);
  guarded(10, "ablations", ablations);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
