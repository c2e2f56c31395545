// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/mac_counter.hpp"

namespace delight {

namespace {
thread_local MacCounter* g_counter = nullptr;
}

MacCounterScope::MacCounterScope(MacCounter& counter) : previous_(g_counter) { g_counter = &counter; }
MacCounterScope::~MacCounterScope() { g_counter = previous_; }

void count_macs(const std::string& tag, std::uint64_t macs) {
  if (g_counter != nullptr) g_counter->add(tag, macs);
}

}  // namespace delight
