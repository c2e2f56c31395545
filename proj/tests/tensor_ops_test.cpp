// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "delight/ops.hpp"
#include "test_util.hpp"

namespace delight {
namespace {

using testing::random_tensor;

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(TensorTest, ShapeAndAccessors) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(-1), 3u);
  EXPECT_EQ(t.dim(0), 2u);
  EXPECT_EQ(shape_string(t.shape()), "[2,3]");
  EXPECT_THROW(t.dim(2), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(t.item(), DimensionError);
  EXPECT_DOUBLE_EQ(Tensor::scalar(4.0).item(), 4.0);
}

TEST(TensorTest, ParameterStoreRejectsDuplicates) {
  ParameterStore store;
  store.add("w", {2}, {1, 2});
  EXPECT_THROW(store.add("w", {1}, {0}), std::invalid_argument);
  EXPECT_TRUE(store.get("w").requires_grad());
  EXPECT_EQ(store.numel(), 2u);
  EXPECT_EQ(store.find("missing"), nullptr);
}

TEST(OpsTest, MatmulMatchesHandComputation) {
  Tensor a({2, 2}, {1, 2, 3, 4}), b({2, 2}, {5, 6, 7, 8});
  EXPECT_EQ(values(matmul(a, b)), (std::vector<double>{19, 22, 43, 50}));
  EXPECT_THROW(matmul(a, Tensor::zeros({3, 2})), DimensionError);
}

TEST(OpsTest, SharedMatrixBroadcastsOverBatch) {
  Rng rng(1);
  Tensor a = random_tensor({3, 2, 4}, rng), w = random_tensor({4, 5}, rng);
  const Tensor batched = matmul(a, w);
  ASSERT_EQ(batched.shape(), (Shape{3, 2, 5}));
  for (std::size_t b = 0; b < 3; ++b) {
    Tensor slice({2, 4}, {a.data().begin() + b * 8, a.data().begin() + (b + 1) * 8});
    const Tensor ref = matmul(slice, w);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(batched[b * 10 + i], ref[i]);
  }
}

TEST(OpsTest, AddBroadcastsSuffixOnly) {
  Tensor a({2, 2}, {1, 2, 3, 4}), b({2}, {10, 20});
  EXPECT_EQ(values(add(a, b)), (std::vector<double>{11, 22, 13, 24}));
  EXPECT_THROW(add(a, Tensor::zeros({3})), DimensionError);
}

TEST(OpsTest, ConcatSplitRoundTrip) {
  Rng rng(2);
  Tensor x = random_tensor({2, 3, 5}, rng);
  const std::vector<std::size_t> sizes{2, 3};
  const auto parts = split(x, -1, sizes);
  ASSERT_EQ(parts[1].shape(), (Shape{2, 3, 3}));
  EXPECT_EQ(values(concat(parts, -1)), values(x));
  const std::vector<std::size_t> bad{2, 2};
  EXPECT_THROW(split(x, -1, bad), DimensionError);
}

TEST(OpsTest, PermuteFeaturesValidatesBijection) {
  Tensor x({1, 3}, {10, 20, 30});
  const std::vector<std::size_t> perm{2, 0, 1};
  EXPECT_EQ(values(permute_features(x, perm)), (std::vector<double>{30, 10, 20}));
  const auto inv = invert_permutation(perm);
  EXPECT_EQ(values(permute_features(permute_features(x, perm), inv)), values(x));
  const std::vector<std::size_t> dup{0, 0, 1};
  EXPECT_THROW(permute_features(x, dup), std::invalid_argument);
}

TEST(OpsTest, GeluIsExactErfForm) {
  Tensor x({3}, {-1.0, 0.0, 2.0});
  const Tensor y = gelu(x);
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = x[i];
    EXPECT_NEAR(y[i], 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)), 1e-15);
  }
}

TEST(OpsTest, LayerNormNormalizesLastAxis) {
  Rng rng(3);
  Tensor x = random_tensor({4, 8}, rng, -3.0, 5.0);
  const Tensor y = layer_norm(x, Tensor::full({8}, 1.0), Tensor::zeros({8}));
  for (std::size_t r = 0; r < 4; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 8; ++c) mean += y[r * 8 + c] / 8.0;
    for (std::size_t c = 0; c < 8; ++c) var += (y[r * 8 + c] - mean) * (y[r * 8 + c] - mean) / 8.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}

TEST(OpsTest, SoftmaxAlongInnerAxis) {
  Rng rng(4);
  Tensor x = random_tensor({2, 3, 4}, rng);
  const Tensor y = softmax(x, 1);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t c = 0; c < 4; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < 3; ++r) s += y[b * 12 + r * 4 + c];
      EXPECT_NEAR(s, 1.0, 1e-14);
    }
  }
}

TEST(OpsTest, DropoutIdentityWhenDisabledAndScaledWhenActive) {
  Rng rng(5);
  Tensor x = Tensor::full({1000}, 1.0);
  EXPECT_EQ(values(dropout(x, 0.0, true, rng)), values(x));
  EXPECT_EQ(values(dropout(x, 0.5, false, rng)), values(x));
  const Tensor y = dropout(x, 0.5, true, rng);
  std::size_t kept = 0;
  for (double v : y.data()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    kept += v != 0.0;
  }
  EXPECT_GT(kept, 400u);
  EXPECT_LT(kept, 600u);
}

double smoothed_entropy(std::size_t vocab, double eps) {
  const double gold = 1.0 - eps, other = eps / static_cast<double>(vocab - 1);
  double h = -gold * std::log(gold);
  if (other > 0) h -= static_cast<double>(vocab - 1) * other * std::log(other);
  return h;
}

TEST(OpsTest, SmoothedCrossEntropyMatchesDefinition) {
  Tensor logits({2, 3}, {1.0, 2.0, 0.5, -1.0, 0.0, 3.0});
  const std::vector<int> targets{1, 2};
  const double eps = 0.1;
  const double loss = cross_entropy_smoothed(logits, targets, eps).item();
  double expect = 0.0;
  for (std::size_t r = 0; r < 2; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += std::exp(logits[r * 3 + c]);
    for (std::size_t c = 0; c < 3; ++c) {
      const double q = static_cast<int>(c) == targets[r] ? 1.0 - eps : eps / 2.0;
      expect -= q * (logits[r * 3 + c] - std::log(z)) / 2.0;
    }
  }
  EXPECT_NEAR(loss, expect, 1e-14);
}

TEST(OpsTest, SmoothedCrossEntropyBoundedByTargetEntropy) {
  Rng rng(6);
  const std::size_t vocab = 7;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits = random_tensor({5, vocab}, rng, -4.0, 4.0);
    std::vector<int> targets(5);
    for (auto& t : targets) t = static_cast<int>(uniform_int(rng, 0, vocab));
    EXPECT_GE(cross_entropy_smoothed(logits, targets, 0.1).item(), smoothed_entropy(vocab, 0.1) - 1e-12);
  }
}

TEST(OpsTest, CrossEntropyIgnoresPadRows) {
  Tensor logits({2, 3}, {1.0, 2.0, 0.5, 9.0, -9.0, 3.0});
  const std::vector<int> with_pad{1, 0}, single{1};
  Tensor first({1, 3}, {1.0, 2.0, 0.5});
  EXPECT_DOUBLE_EQ(cross_entropy_smoothed(logits, with_pad, 0.1, 0).item(),
                   cross_entropy_smoothed(first, single, 0.1, 0).item());
}

TEST(OpsTest, EmbeddingGathersRows) {
  Tensor table({3, 2}, {0, 0, 1, 2, 3, 4});
  const std::vector<int> ids{2, 1, 2};
  const Tensor e = embedding(table, ids, {3});
  EXPECT_EQ(e.shape(), (Shape{3, 2}));
  EXPECT_EQ(values(e), (std::vector<double>{3, 4, 1, 2, 3, 4}));
  const std::vector<int> bad{5};
  EXPECT_THROW(embedding(table, bad, {1}), std::out_of_range);
}

TEST(TapeTest, ReplayIsBitIdentical) {
  auto run = [] {
    Rng rng(11);
    Tensor a = random_tensor({3, 4}, rng).set_requires_grad(true);
    Tensor b = random_tensor({4, 2}, rng).set_requires_grad(true);
    Tape tape;
    TapeScope scope(tape);
    const Tensor loss = sum(mul(softmax(matmul(a, b)), gelu(matmul(a, b))));
    tape.backward(loss);
    std::vector<double> out{loss.item()};
    out.insert(out.end(), a.grad().begin(), a.grad().end());
    out.insert(out.end(), b.grad().begin(), b.grad().end());
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(TapeTest, NoRecordingWithoutTapeOrGradients) {
  Tensor a({2}, {1, 2});
  Tape tape;
  {
    TapeScope scope(tape);
    (void)sum(a);
  }
  EXPECT_EQ(tape.size(), 0u);
  a.set_requires_grad(true);
  (void)sum(a);
  EXPECT_EQ(tape.size(), 0u);
}

TEST(TapeTest, GradientsAccumulateAcrossUses) {
  Tensor a = Tensor({2}, {1.0, 3.0}).set_requires_grad(true);
  Tape tape;
  TapeScope scope(tape);
  tape.backward(sum(mul(a, a)));
  EXPECT_EQ(values(Tensor({2}, {a.grad().begin(), a.grad().end()})), (std::vector<double>{2.0, 6.0}));
}

}  // namespace
}  // namespace delight
