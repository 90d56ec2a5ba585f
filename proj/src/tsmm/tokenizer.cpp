#include "drcl/tsmm/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace drcl::tsmm {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isspace(ch) || std::ispunct(ch)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocab Vocab::build(std::span<const std::string> corpus, int min_freq, int max_seq_len) {
  if (min_freq < 1) throw ValidationError("vocab: min_freq must be >= 1");
  if (max_seq_len < 1) throw ValidationError("vocab: max_seq_len must be >= 1");
  std::map<std::string, int> counts;
  for (const auto& text : corpus) {
    for (auto& w : split_words(text)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, int>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_freq) kept.emplace_back(w, c);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab v;
  v.min_freq_ = min_freq;
  v.max_seq_len_ = max_seq_len;
  v.words_ = {"<oov>", "<pad>"};
  for (auto& [w, c] : kept) {
    v.ids_.emplace(w, static_cast<int>(v.words_.size()));
    v.words_.push_back(std::move(w));
  }
  return v;
}

int Vocab::id(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kOov : it->second;
}

std::vector<int> Vocab::tokenize(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : split_words(text)) {
    if (static_cast<int>(ids.size()) == max_seq_len_) break;
    ids.push_back(id(w));
  }
  if (ids.empty()) ids.push_back(kOov);
  return ids;
}

MatrixX bag_of_words(std::span<const std::string> texts, const Vocab& vocab) {
  const auto width = std::max(vocab.size() - 2, 0);
  MatrixX out = MatrixX::Zero(static_cast<Eigen::Index>(texts.size()), width);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (const auto& w : split_words(texts[i])) {
      const int id = vocab.id(w);
      if (id >= 2) out(row, id - 2) += 1.0;
    }
    const double total = out.row(row).sum();
    if (total > 0) out.row(row) /= total;
  }
  return out;
}

}  // namespace drcl::tsmm
