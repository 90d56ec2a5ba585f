#pragma once

#include "drcl/common.hpp"

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drcl::tsmm {

/// Lowercased word pieces of `text`. Whitespace and ASCII punctuation both
/// separate words; punctuation itself is dropped.
std::vector<std::string> split_words(std::string_view text);

class Vocab {
 public:
  static constexpr int kOov = 0;
  static constexpr int kPad = 1;

  Vocab() = default;

  /// Words seen at least `min_freq` times get ids from 2 upward, most frequent
  /// first, ties broken lexicographically.
  static Vocab build(std::span<const std::string> corpus, int min_freq = 1, int max_seq_len = 64);

  /// Ids of the words of `text`, cut to max_seq_len. Empty text gives {kOov}.
  std::vector<int> tokenize(std::string_view text) const;

  int size() const noexcept { return static_cast<int>(words_.size()); }
  int max_seq_len() const noexcept { return max_seq_len_; }
  int min_freq() const noexcept { return min_freq_; }
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  /// kOov for unknown words.
  int id(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
  int min_freq_ = 1;
  int max_seq_len_ = 64;
};

/// n x (|V| - 2) term-frequency rows, each summing to 1 (OOV and pad dropped;
/// rows with no known word stay zero).
MatrixX bag_of_words(std::span<const std::string> texts, const Vocab& vocab);

}  // namespace drcl::tsmm
