#pragma once

#include "drcl/cycle/drcl.hpp"
#include "drcl/tag/io.hpp"
#include "drcl/tag/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace drcl::cli {

/// Everything a config file can set. Keys are the field names with a
/// section prefix: `drcl.`, `gcn.`, `tsmm.`, `synthetic.` or `data.`
/// (`data.nodes`, `data.edges`). Seeds are not configurable here; they come
/// from the command line.
struct CliConfig {
  cycle::DrclConfig drcl;
  tag::SyntheticSpec synthetic;
  /// Graph files; when absent the synthetic spec is used.
  std::optional<std::filesystem::path> nodes_path;
  std::optional<std::filesystem::path> edges_path;
};

/// Relative data paths are resolved against `base_dir`.
CliConfig parse_config(const std::map<std::string, std::string>& values,
                       const std::filesystem::path& base_dir = {});
CliConfig load_config(const std::filesystem::path& path);

/// Sets every seed in the config from the one command-line seed.
void apply_seed(CliConfig& config, std::uint64_t seed);

/// Flat echo of every effective setting, sorted by key.
std::map<std::string, std::string> echo(const CliConfig& config);

/// The graph named by the config: the data files, else a generated instance.
tag::TextAttributedGraph load_input_graph(const CliConfig& config);

}  // namespace drcl::cli
