// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "delight/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "delight/dextra.hpp"

namespace delight {

namespace {

Seq2SeqExample random_copy(Rng& rng, std::size_t vocab, std::size_t min_len, std::size_t max_len) {
  const auto len = static_cast<std::size_t>(
      uniform_int(rng, static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len) + 1));
  Seq2SeqExample ex;
  for (std::size_t i = 0; i < len; ++i) {
    ex.source.push_back(static_cast<int>(uniform_int(rng, kFirstSymbol, static_cast<std::int64_t>(vocab))));
  }
  ex.target = ex.source;
  return ex;
}

void check_copy_args(std::size_t vocab, std::size_t min_len, std::size_t max_len) {
  if (vocab < 4) throw ConfigError("copy task needs vocab >= 4");
  if (min_len == 0 || min_len > max_len) throw ConfigError("copy task needs 1 <= min_len <= max_len");
}

// Fisher-Yates with the portable integer draw.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i)));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace

std::vector<Seq2SeqExample> make_copy_dataset(std::size_t vocab, std::size_t min_len, std::size_t max_len,
                                              std::size_t size, std::uint64_t seed) {
  check_copy_args(vocab, min_len, max_len);
  Rng rng(seed);
  std::vector<Seq2SeqExample> out;
  out.reserve(size);
  for (std::size_t i = 0; i < size; ++i) out.push_back(random_copy(rng, vocab, min_len, max_len));
  return out;
}

std::vector<Seq2SeqExample> make_heldout_copy_dataset(std::size_t vocab, std::size_t min_len, std::size_t max_len,
                                                      std::size_t size, std::uint64_t seed,
                                                      std::span<const Seq2SeqExample> exclude) {
  check_copy_args(vocab, min_len, max_len);
  std::set<std::vector<int>> seen;
  for (const auto& e : exclude) seen.insert(e.source);
  Rng rng(seed);
  std::vector<Seq2SeqExample> out;
  std::size_t attempts = 0;
  while (out.size() < size) {
    if (++attempts > 100 * size + 1000) throw ConfigError("cannot draw enough unseen copy sequences");
    auto ex = random_copy(rng, vocab, min_len, max_len);
    if (seen.insert(ex.source).second) out.push_back(std::move(ex));
  }
  return out;
}

Batch make_seq2seq_batch(std::span<const Seq2SeqExample> examples) {
  Batch b;
  b.size = examples.size();
  for (const auto& e : examples) {
    b.source_len = std::max(b.source_len, e.source.size());
    b.target_len = std::max(b.target_len, e.target.size() + 1);
  }
  b.source.assign(b.size * b.source_len, kPad);
  b.target_in.assign(b.size * b.target_len, kPad);
  b.target_out.assign(b.size * b.target_len, kPad);
  for (std::size_t i = 0; i < b.size; ++i) {
    const auto& e = examples[i];
    std::copy(e.source.begin(), e.source.end(), b.source.begin() + static_cast<std::ptrdiff_t>(i * b.source_len));
    b.source_lengths.push_back(e.source.size());
    int* in = b.target_in.data() + i * b.target_len;
    int* out = b.target_out.data() + i * b.target_len;
    in[0] = kBos;
    for (std::size_t t = 0; t < e.target.size(); ++t) {
      in[t + 1] = e.target[t];
      out[t] = e.target[t];
    }
    out[e.target.size()] = kEos;
  }
  return b;
}

// ---- char LM ----

CharVocabulary::CharVocabulary(std::string_view text) {
  std::set<char> distinct(text.begin(), text.end());
  symbols_.assign(distinct.begin(), distinct.end());
}

int CharVocabulary::id(char c) const {
  const auto pos = symbols_.find(c);
  if (pos == std::string::npos) throw std::out_of_range(std::string("character not in vocabulary: ") + c);
  return kFirstSymbol + static_cast<int>(pos);
}

char CharVocabulary::symbol(int id) const {
  if (id < kFirstSymbol || static_cast<std::size_t>(id) >= size()) throw std::out_of_range("not a symbol id");
  return symbols_[static_cast<std::size_t>(id - kFirstSymbol)];
}

CharLmDataset make_char_lm_dataset(std::string_view text, std::size_t context, std::uint64_t seed,
                                   double valid_fraction) {
  if (context == 0) throw ConfigError("char LM context must be positive");
  if (valid_fraction <= 0.0 || valid_fraction >= 1.0) throw ConfigError("validation fraction must lie in (0, 1)");
  CharLmDataset data{CharVocabulary(text), context, {}, {}, {}, {}};
  const auto split =
      text.size() - static_cast<std::size_t>(std::floor(static_cast<double>(text.size()) * valid_fraction));
  for (std::size_t i = 0; i < text.size(); ++i) {
    (i < split ? data.train_tokens : data.valid_tokens).push_back(data.vocab.id(text[i]));
  }
  const std::size_t window = context + 1;
  if (data.train_tokens.size() < window || data.valid_tokens.size() < window) {
    throw ConfigError("text too short for context " + std::to_string(context));
  }
  for (std::size_t s = 0; s + window <= data.train_tokens.size(); ++s) {
    data.train_windows.emplace_back(data.train_tokens.begin() + static_cast<std::ptrdiff_t>(s),
                                    data.train_tokens.begin() + static_cast<std::ptrdiff_t>(s + window));
  }
  for (std::size_t s = 0; s + window <= data.valid_tokens.size(); s += context) {
    data.valid_windows.emplace_back(data.valid_tokens.begin() + static_cast<std::ptrdiff_t>(s),
                                    data.valid_tokens.begin() + static_cast<std::ptrdiff_t>(s + window));
  }
  Rng rng(seed);
  shuffle_in_place(data.train_windows, rng);
  return data;
}

Batch make_lm_batch(std::span<const std::vector<int>> windows) {
  Batch b;
  b.size = windows.size();
  b.target_len = windows.empty() ? 0 : windows.front().size() - 1;
  for (const auto& w : windows) {
    if (w.size() != b.target_len + 1) throw DimensionError("LM windows must share one length");
    b.target_in.insert(b.target_in.end(), w.begin(), w.end() - 1);
    b.target_out.insert(b.target_out.end(), w.begin() + 1, w.end());
  }
  return b;
}

double unigram_perplexity(const CharLmDataset& data) {
  const std::size_t symbols = data.vocab.symbols().size();
  std::vector<double> counts(symbols, 1.0);
  for (int t : data.train_tokens) counts[static_cast<std::size_t>(t - kFirstSymbol)] += 1.0;
  const double total = static_cast<double>(data.train_tokens.size() + symbols);
  // Score exactly the positions the model is scored on.
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& w : data.valid_windows) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      nll -= std::log(counts[static_cast<std::size_t>(w[i] - kFirstSymbol)] / total);
      ++n;
    }
  }
  return std::exp(nll / static_cast<double>(n));
}

}  // namespace delight
