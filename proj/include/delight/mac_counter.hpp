// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace delight {

/// Tally of fused multiply-adds executed by forward ops, split by op tag.
class MacCounter {
 public:
  void add(const std::string& tag, std::uint64_t macs) {
    by_tag_[tag] += macs;
    total_ += macs;
  }
  std::uint64_t total() const { return total_; }
  std::uint64_t tagged(const std::string& tag) const {
    auto it = by_tag_.find(tag);
    return it == by_tag_.end() ? 0 : it->second;
  }
  const std::map<std::string, std::uint64_t>& by_tag() const { return by_tag_; }

 private:
  std::map<std::string, std::uint64_t> by_tag_;
  std::uint64_t total_ = 0;
};

/// Routes MAC counts of ops run on this thread into `counter` while alive.
class MacCounterScope {
 public:
  explicit MacCounterScope(MacCounter& counter);
  ~MacCounterScope();
  MacCounterScope(const MacCounterScope&) = delete;
  MacCounterScope& operator=(const MacCounterScope&) = delete;

 private:
  MacCounter* previous_;
};

/// No-op unless a MacCounterScope is active on the calling thread.
void count_macs(const std::string& tag, std::uint64_t macs);

}  // namespace delight
