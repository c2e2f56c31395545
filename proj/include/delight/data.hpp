// Copyright 2026 The delight-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "delight/model.hpp"
#include "delight/random.hpp"

// Deterministic toy tasks. Ids 0..2 are reserved for pad/BOS/EOS.
namespace delight {

struct Seq2SeqExample {
  std::vector<int> source;
  std::vector<int> target;
};

/// Copy task: targets equal sources; symbols drawn uniformly from [3, vocab),
/// lengths uniformly from [min_len, max_len].
std::vector<Seq2SeqExample> make_copy_dataset(std::size_t vocab, std::size_t min_len, std::size_t max_len,
                                              std::size_t size, std::uint64_t seed);

/// Copy examples whose sources do not occur in `exclude`.
std::vector<Seq2SeqExample> make_heldout_copy_dataset(std::size_t vocab, std::size_t min_len, std::size_t max_len,
                                                      std::size_t size, std::uint64_t seed,
                                                      std::span<const Seq2SeqExample> exclude);

/// target_in = [BOS, target...], target_out = [target..., EOS], padded.
Batch make_seq2seq_batch(std::span<const Seq2SeqExample> examples);

class CharVocabulary {
 public:
  explicit CharVocabulary(std::string_view text);
  int id(char c) const;
  char symbol(int id) const;
  std::size_t size() const { return kFirstSymbol + symbols_.size(); }
  const std::string& symbols() const { return symbols_; }

 private:
  std::string symbols_;  // sorted distinct characters
};

struct CharLmDataset {
  CharVocabulary vocab;
  std::size_t context = 0;
  std::vector<int> train_tokens;
  std::vector<int> valid_tokens;
  /// Windows of context + 1 tokens; inputs are the first `context`, targets the last `context`.
  std::vector<std::vector<int>> train_windows;  // every start offset, shuffled
  std::vector<std::vector<int>> valid_windows;  // non-overlapping
};

/// Splits `text` into a leading training part and a trailing validation part
/// (valid_fraction of the characters) and cuts both into windows.
CharLmDataset make_char_lm_dataset(std::string_view text, std::size_t context, std::uint64_t seed,
                                   double valid_fraction = 0.1);

Batch make_lm_batch(std::span<const std::vector<int>> windows);

/// Perplexity of the validation targets under the add-one smoothed unigram
/// distribution of the training tokens.
double unigram_perplexity(const CharLmDataset& data);

/// Public-domain English prose shipped with the library.
std::string_view bundled_text();

}  // namespace delight
