// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delight/accounting.hpp"
#include "delight/dextra.hpp"
#include "delight/model.hpp"

namespace delight {

struct PlanRow {
  std::size_t block = 0;
  std::size_t depth = 0;
  double width_mult = 0.0;
  std::uint64_t params = 0;  // every stack's block b together
  std::uint64_t macs = 0;
};

struct LayerRow {
  std::size_t block = 0;
  LayerSpec layer;
  std::uint64_t params = 0;
};

struct DepthRow {
  std::string network;
  std::size_t blocks = 0;
  std::size_t depth = 0;
};

struct Analysis {
  std::vector<PlanRow> plan;
  std::vector<LayerRow> layers;
  CostReport cost;
  std::vector<DepthRow> depth;

  /// Four CSV tables separated by blank lines, each preceded by "# name":
  ///   plan:   b,N_b,m_w_b,params_b,macs_b
  ///   dextra: b,l,in,out,g,params
  ///   cost:   component,block,params,macs
  ///   depth:  network,blocks,depth
  std::string to_csv() const;
  std::string to_json() const;
};

Analysis analyze_model(const ModelConfig& cfg, std::size_t n, std::size_t m);

}  // namespace delight
