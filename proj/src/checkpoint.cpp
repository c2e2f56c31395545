// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace delight {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const std::string& s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::uint64_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void need(std::uint64_t n) const {
    if (n > buf_.size() - pos_) throw CheckpointError(path_ + ": truncated checkpoint");
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(path + ": cannot open for writing");
  Writer w(out);
  w.bytes("DLGT");
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint64_t>(ckpt.step);
  w.pod<std::uint64_t>(ckpt.config_hash);
  w.pod<std::uint64_t>(ckpt.config_json.size());
  w.bytes(ckpt.config_json);
  w.pod<std::uint64_t>(ckpt.tensors.size());
  for (const auto& t : ckpt.tensors) {
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) w.pod<std::uint64_t>(d);
    for (double v : t.value.data()) w.pod<double>(v);
  }
  if (!out) throw CheckpointError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path + ": cannot open checkpoint");
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}), path);
  if (r.bytes(4) != "DLGT") throw CheckpointError(path + ": not a checkpoint (bad magic)");
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.step = r.pod<std::uint64_t>();
  ckpt.config_hash = r.pod<std::uint64_t>();
  ckpt.config_json = r.bytes(r.pod<std::uint64_t>());
  const auto count = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.bytes(r.pod<std::uint32_t>());
    Shape shape(r.pod<std::uint32_t>());
    for (auto& d : shape) d = r.pod<std::uint64_t>();
    const std::size_t n = shape_numel(shape);
    r.need(n * sizeof(double));
    std::vector<double> values(n);
    for (auto& v : values) v = r.pod<double>();
    ckpt.tensors.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (!r.done()) throw CheckpointError(path + ": trailing bytes after checkpoint");
  return ckpt;
}

Checkpoint make_checkpoint(const ParameterStore& store, std::uint64_t step, std::uint64_t config_hash,
                           std::string config_json) {
  Checkpoint ckpt{step, config_hash, std::move(config_json), {}};
  for (const auto& e : store.entries()) {
    ckpt.tensors.push_back({e.name, Tensor(e.value.shape(), {e.value.data().begin(), e.value.data().end()})});
  }
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, ParameterStore& store) {
  if (ckpt.tensors.size() != store.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors, model has " +
                          std::to_string(store.size()));
  }
  for (const auto& t : ckpt.tensors) {
    const Tensor* p = store.find(t.name);
    if (!p) throw CheckpointError("checkpoint tensor " + t.name + " has no matching parameter");
    if (p->shape() != t.value.shape()) {
      throw CheckpointError(t.name + ": shape " + shape_string(t.value.shape()) + " does not match " +
                            shape_string(p->shape()));
    }
    Tensor dst = *p;
    std::ranges::copy(t.value.data(), dst.mutable_data().begin());
  }
}

}  // namespace delight
