#include "drcl/tag/synthetic.hpp"

#include "drcl/rng.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace drcl::tag {
namespace {

template <typename T>
T parse_as(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  T out{};
  in >> out;
  if (value.empty() || in.fail() || !in.eof()) {
    throw ValidationError("synthetic spec: cannot parse " + key + " = '" + value + "'");
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::string cell;
  std::istringstream in(value);
  while (std::getline(in, cell, ',')) {
    const auto first = cell.find_first_not_of(' ');
    const auto last = cell.find_last_not_of(' ');
    out.push_back(parse_as<T>(key, first == std::string::npos ? "" : cell.substr(first, last - first + 1)));
  }
  return out;
}

}  // namespace

int SyntheticSpec::node_count() const {
  return std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
}

void SyntheticSpec::validate() const {
  if (block_sizes.empty()) throw ValidationError("synthetic spec: block_sizes is empty");
  if (static_cast<int>(block_sizes.size()) != k) {
    throw ValidationError("synthetic spec: k = " + std::to_string(k) + " but " +
                          std::to_string(block_sizes.size()) + " block sizes given");
  }
  for (int size : block_sizes) {
    if (size <= 0) throw ValidationError("synthetic spec: block sizes must be positive");
  }
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(p_in) || !in_unit(p_out)) {
    throw ValidationError("synthetic spec: p_in and p_out must lie in [0,1]");
  }
  if (!in_unit(noise_ratio)) throw ValidationError("synthetic spec: noise_ratio must lie in [0,1]");
  if (vocab_per_block < 1) throw ValidationError("synthetic spec: vocab_per_block must be >= 1");
  if (text_len_min < 1 || text_len_max < text_len_min) {
    throw ValidationError("synthetic spec: text_len needs 1 <= min <= max");
  }
}

SyntheticSpec synthetic_spec_from(const std::map<std::string, std::string>& values) {
  SyntheticSpec spec;
  bool sizes_given = false;
  for (const auto& [key, value] : values) {
    if (key == "k") spec.k = parse_as<int>(key, value);
    else if (key == "block_sizes") {
      spec.block_sizes = parse_list<int>(key, value);
      sizes_given = true;
    } else if (key == "p_in") spec.p_in = parse_as<double>(key, value);
    else if (key == "p_out") spec.p_out = parse_as<double>(key, value);
    else if (key == "vocab_per_block") spec.vocab_per_block = parse_as<int>(key, value);
    else if (key == "noise_ratio") spec.noise_ratio = parse_as<double>(key, value);
    else if (key == "text_len") {
      const auto range = parse_list<int>(key, value);
      if (range.size() != 2) throw ValidationError("synthetic spec: text_len needs 'min,max'");
      spec.text_len_min = range[0];
      spec.text_len_max = range[1];
    } else if (key == "seed") spec.seed = parse_as<std::uint64_t>(key, value);
    else throw ValidationError("synthetic spec: unknown key '" + key + "'");
  }
  if (!sizes_given && values.count("k")) {
    spec.block_sizes.assign(static_cast<std::size_t>(std::max(spec.k, 0)), 100);
  }
  spec.validate();
  return spec;
}

std::string to_key_values(const SyntheticSpec& spec) {
  std::ostringstream out;
  out << "k = " << spec.k << '\n' << "block_sizes = ";
  for (std::size_t i = 0; i < spec.block_sizes.size(); ++i) out << (i ? "," : "") << spec.block_sizes[i];
  out << '\n'
      << "p_in = " << format_real(spec.p_in) << '\n'
      << "p_out = " << format_real(spec.p_out) << '\n'
      << "vocab_per_block = " << spec.vocab_per_block << '\n'
      << "noise_ratio = " << format_real(spec.noise_ratio) << '\n'
      << "text_len = " << spec.text_len_min << ',' << spec.text_len_max << '\n'
      << "seed = " << spec.seed << '\n';
  return out.str();
}

std::string block_token(int block, int word) {
  return "b" + std::to_string(block) + "w" + std::to_string(word);
}

std::string noise_token(int word) { return "noise" + std::to_string(word); }

TextAttributedGraph generate_sbm_tag(const SyntheticSpec& spec) {
  spec.validate();
  const int n = spec.node_count();
  std::vector<int> block(static_cast<std::size_t>(n));
  for (int b = 0, next = 0; b < spec.k; ++b) {
    for (int j = 0; j < spec.block_sizes[b]; ++j) block[next++] = b;
  }

  SeededRng edge_rng(derive_seed(spec.seed, 0));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = block[i] == block[j] ? spec.p_in : spec.p_out;
      if (edge_rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }

  SeededRng text_rng(derive_seed(spec.seed, 1));
  std::vector<std::string> texts;
  texts.reserve(static_cast<std::size_t>(n));
  const auto span = static_cast<std::uint64_t>(spec.text_len_max - spec.text_len_min + 1);
  for (int i = 0; i < n; ++i) {
    const int len = spec.text_len_min + static_cast<int>(text_rng.below(span));
    const int noisy = static_cast<int>(std::lround(spec.noise_ratio * len));
    std::vector<char> is_noise(static_cast<std::size_t>(len), 0);
    std::fill(is_noise.begin(), is_noise.begin() + noisy, 1);
    text_rng.shuffle(std::span<char>(is_noise));
    std::string text;
    for (int t = 0; t < len; ++t) {
      const int word = static_cast<int>(text_rng.below(static_cast<std::uint64_t>(spec.vocab_per_block)));
      if (t) text += ' ';
      text += is_noise[t] ? noise_token(word) : block_token(block[i], word);
    }
    texts.push_back(std::move(text));
  }

  return TextAttributedGraph::build(n, std::move(edges), std::move(texts), std::nullopt,
                                    LabelVector(block, spec.k));
}

}  // namespace drcl::tag
