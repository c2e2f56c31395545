// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numeric>

#include "delight/dextra.hpp"
#include "delight/group_linear.hpp"
#include "delight/ops.hpp"
#include "test_util.hpp"

namespace delight {
namespace {

using testing::random_tensor;

TEST(GroupScheduleTest, EightLayersEightGroups) {
  EXPECT_EQ(group_schedule(8, 8), (std::vector<std::size_t>{1, 2, 4, 8, 8, 4, 2, 1}));
}

TEST(GroupScheduleTest, PropertiesOverGrid) {
  for (std::size_t n = 2; n <= 12; ++n) {
    for (std::size_t gmax = 1; gmax <= 32; ++gmax) {
      const auto g = group_schedule(n, gmax);
      ASSERT_EQ(g.size(), n);
      EXPECT_EQ(g.front(), 1u);
      EXPECT_EQ(g.back(), 1u);
      for (std::size_t l = 0; l < n; ++l) {
        EXPECT_LE(g[l], gmax);
        EXPECT_EQ(g[l], g[n - 1 - l]) << "N=" << n << " gmax=" << gmax;
      }
      const std::size_t half = (n + 1) / 2;
      for (std::size_t l = 1; l <= half; ++l) {
        EXPECT_EQ(g[l - 1], std::min<std::size_t>(std::size_t{1} << (l - 1), gmax));
      }
    }
  }
}

TEST(GroupScheduleTest, OddDepthPeaksInTheMiddle) {
  EXPECT_EQ(group_schedule(5, 8), (std::vector<std::size_t>{1, 2, 4, 2, 1}));
  EXPECT_EQ(group_schedule(3, 1), (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_THROW(group_schedule(1, 4), ConfigError);
}

TEST(DextraConfigTest, MaxGroupsRule) {
  for (auto [dm, g] : {std::pair<std::size_t, std::size_t>{32, 1}, {33, 2}, {64, 2}, {128, 4}, {256, 8}, {640, 20}}) {
    DextraConfig cfg{.input_dim = dm, .output_dim = dm / 2};
    EXPECT_EQ(cfg.resolved_max_groups(), g) << dm;
  }
}

TEST(WidthScheduleTest, InvariantsForReferenceConfigs) {
  for (std::size_t dm : {128u, 256u, 384u, 512u, 640u}) {
    for (std::size_t n = 3; n <= 12; ++n) {
      for (double mw : {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
        const DextraConfig cfg{.input_dim = dm, .output_dim = dm / 2, .depth = n, .width_mult = mw};
        const auto plan = plan_dextra(cfg);
        ASSERT_EQ(plan.size(), n);
        EXPECT_EQ(plan.back().out_dim, dm / 2);
        EXPECT_EQ(plan.front().in_dim, dm);
        EXPECT_FALSE(plan.front().mixer);
        for (std::size_t l = 0; l < n; ++l) {
          const auto& s = plan[l];
          EXPECT_EQ(s.in_dim % s.groups, 0u);
          EXPECT_EQ(s.out_dim % s.groups, 0u);
          if (l > 0) {
            EXPECT_TRUE(s.mixer);
            EXPECT_EQ(s.in_dim, dm + plan[l - 1].out_dim);
            EXPECT_EQ(plan[l - 1].out_dim % s.groups, 0u);
          }
        }
        const std::size_t peak = (n + 1) / 2 - 1;
        const std::size_t widest = std::max_element(plan.begin(), plan.end(), [](auto& a, auto& b) {
                                     return a.out_dim < b.out_dim;
                                   })->out_dim;
        EXPECT_EQ(plan[peak].out_dim, widest);
        EXPECT_NEAR(static_cast<double>(plan[peak].out_dim), mw * static_cast<double>(dm),
                    static_cast<double>(std::lcm(plan[peak].groups, plan[peak + 1].groups)));
      }
    }
  }
}

TEST(WidthScheduleTest, IndivisibleModelDimListsOffendingGroups) {
  const DextraConfig cfg{.input_dim = 36, .output_dim = 18, .depth = 8, .width_mult = 2.0, .max_groups = 8};
  try {
    plan_dextra(cfg);
    FAIL() << "expected a configuration error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(" 8"), std::string::npos) << msg;
  }
}

// Forward pass rebuilt from the layer weights: GLT, then GELU, shuffle and
// group-wise mixing with the block input before every later layer.
Tensor reference_forward(const Dextra& d, const Tensor& x) {
  const auto& plan = d.plan();
  const auto& layers = d.layers();
  Tensor y = group_linear(x, layers[0].weight(), layers[0].bias());
  for (std::size_t l = 1; l < plan.size(); ++l) {
    const std::size_t gp = plan[l - 1].groups, g = plan[l].groups;
    Tensor h = gelu(y);
    Tensor mixed;
    if (gp == 1 || g == 1) {
      const std::array<Tensor, 2> parts{h, x};
      mixed = concat(parts, -1);
    } else {
      if (d.config().shuffle) h = permute_features(h, shuffle_permutation(h.dim(-1), gp));
      mixed = permute_features(concat(std::array<Tensor, 2>{h, x}, -1), mixer_permutation(x.dim(-1), h.dim(-1), g));
    }
    y = group_linear(mixed, layers[l].weight(), layers[l].bias());
  }
  return y;
}

TEST(DextraTest, ForwardShapeParametersAndComposition) {
  Rng rng(9);
  for (bool shuffle : {true, false}) {
    for (std::size_t n : {2u, 3u, 4u, 6u, 8u}) {
      ParameterStore store;
      const DextraConfig cfg{.input_dim = 128, .output_dim = 64, .depth = n, .width_mult = 2.0, .shuffle = shuffle};
      Dextra d(store, "dextra", cfg, rng);
      const Tensor x = random_tensor({2, 3, 128}, rng);
      const Tensor y = d.forward(x);
      EXPECT_EQ(y.shape(), (Shape{2, 3, 64}));
      std::size_t expect = 0;
      for (const auto& l : d.plan()) expect += l.in_dim * l.out_dim / l.groups + l.out_dim;
      EXPECT_EQ(d.parameter_count(), expect);
      EXPECT_EQ(store.numel(), expect);
      EXPECT_LT(testing::max_abs_diff(y.data(), reference_forward(d, x).data()), 1e-12);
    }
  }
}

TEST(DextraTest, ShuffleChangesOutputOnlyWithAdjacentGroupedLayers) {
  auto run = [](bool shuffle, std::size_t n) {
    Rng rng(5);
    ParameterStore store;
    Dextra d(store, "d", {.input_dim = 128, .output_dim = 64, .depth = n, .width_mult = 2.0, .shuffle = shuffle}, rng);
    Rng xr(6);
    const Tensor y = d.forward(random_tensor({1, 2, 128}, xr));
    return std::vector<double>(y.data().begin(), y.data().end());
  };
  EXPECT_EQ(run(true, 3), run(false, 3));  // groups 1,2,1
  EXPECT_NE(run(true, 4), run(false, 4));  // groups 1,2,2,1
}

TEST(DextraTest, RejectsWrongInputWidth) {
  Rng rng(1);
  ParameterStore store;
  Dextra d(store, "d", {.input_dim = 64, .output_dim = 32, .depth = 4, .width_mult = 2.0}, rng);
  EXPECT_THROW(d.forward(random_tensor({1, 63}, rng)), DimensionError);
}

}  // namespace
}  // namespace delight
