#pragma once

#include "drcl/tag/graph.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace drcl::tag {

/// Planted-partition graph with block-specific text.
struct SyntheticSpec {
  int k = 3;
  std::vector<int> block_sizes{100, 100, 100};
  double p_in = 0.1;
  double p_out = 0.005;
  /// Tokens unique to each block. The shared noise pool has the same size.
  int vocab_per_block = 40;
  /// Fraction of each text drawn from the shared pool.
  double noise_ratio = 0.2;
  int text_len_min = 20;
  int text_len_max = 40;
  std::uint64_t seed = 1;

  int node_count() const;
  void validate() const;
};

/// Parses the flat `key = value` form. Keys: k, block_sizes (comma list),
/// p_in, p_out, vocab_per_block, noise_ratio, text_len (`min,max`), seed.
SyntheticSpec synthetic_spec_from(const std::map<std::string, std::string>& values);
std::string to_key_values(const SyntheticSpec& spec);

/// Token naming used by the generator: block b word j is "b<b>w<j>",
/// shared word j is "noise<j>".
std::string block_token(int block, int word);
std::string noise_token(int word);

/// Samples a stochastic block model with texts and planted truth labels.
/// Equal specs produce identical graphs.
TextAttributedGraph generate_sbm_tag(const SyntheticSpec& spec);

}  // namespace drcl::tag
