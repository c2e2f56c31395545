// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/analysis.hpp"

#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "delight/scaling.hpp"

namespace delight {

namespace {

std::string fixed6(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6) << v;
  return out.str();
}

}  // namespace

Analysis analyze_model(const ModelConfig& cfg, std::size_t n, std::size_t m) {
  cfg.validate();
  Analysis a;
  a.cost = model_cost(cfg, n, m);
  const BlockPlan plan = blockwise_plan(cfg.scaling);
  const std::vector<std::string> stacks =
      cfg.task == TaskKind::lm ? std::vector<std::string>{"lm"} : std::vector<std::string>{"enc", "dec"};

  for (std::size_t b = 0; b < plan.size(); ++b) {
    PlanRow row{b, plan[b].depth, plan[b].width_mult};
    for (const auto& s : stacks) {
      const CostEntry t = a.cost.block_total(s + std::to_string(b));
      row.params += t.params;
      row.macs += t.macs;
    }
    a.plan.push_back(row);
    for (const auto& l : plan_dextra(cfg.block_config(plan[b]).dextra())) {
      a.layers.push_back({b, l, glt_params(l.in_dim, l.out_dim, l.groups)});
    }
  }

  const std::size_t blocks = plan.size();
  if (cfg.task == TaskKind::lm) {
    a.depth.push_back({"delight", blocks, network_depth(plan)});
  } else {
    a.depth.push_back({"delight_encoder", blocks, network_depth(plan)});
    a.depth.push_back({"delight_decoder", blocks, network_depth(plan, true)});
  }
  a.depth.push_back({"transformer", blocks, baseline_transformer_depth(blocks)});
  return a;
}

std::string Analysis::to_csv() const {
  std::ostringstream out;
  out << "# plan\nb,N_b,m_w_b,params_b,macs_b\n";
  for (const auto& r : plan) {
    out << r.block << ',' << r.depth << ',' << fixed6(r.width_mult) << ',' << r.params << ',' << r.macs << '\n';
  }
  out << "\n# dextra\nb,l,in,out,g,params\n";
  for (const auto& r : layers) {
    out << r.block << ',' << r.layer.index << ',' << r.layer.in_dim << ',' << r.layer.out_dim << ','
        << r.layer.groups << ',' << r.params << '\n';
  }
  out << "\n# cost\n" << cost.to_csv();
  out << "\n# depth\nnetwork,blocks,depth\n";
  for (const auto& r : depth) out << r.network << ',' << r.blocks << ',' << r.depth << '\n';
  return out.str();
}

std::string Analysis::to_json() const {
  nlohmann::ordered_json j;
  j["plan"] = nlohmann::ordered_json::array();
  for (const auto& r : plan) {
    j["plan"].push_back({{"b", r.block}, {"N_b", r.depth}, {"m_w_b", r.width_mult}, {"params_b", r.params},
                         {"macs_b", r.macs}});
  }
  j["dextra"] = nlohmann::ordered_json::array();
  for (const auto& r : layers) {
    j["dextra"].push_back({{"b", r.block}, {"l", r.layer.index}, {"in", r.layer.in_dim}, {"out", r.layer.out_dim},
                           {"g", r.layer.groups}, {"params", r.params}});
  }
  j["cost"] = nlohmann::ordered_json::parse(cost.to_json());
  j["depth"] = nlohmann::ordered_json::array();
  for (const auto& r : depth) j["depth"].push_back({{"network", r.network}, {"blocks", r.blocks}, {"depth", r.depth}});
  return j.dump(2) + "\n";
}

}  // namespace delight
