#pragma once

#include "drcl/tag/graph.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace drcl::tag {

struct LoadedGraph {
  TextAttributedGraph graph;
  EdgeCleanup cleanup;
};

/// Reads a graph from a nodes file and an edges file.
///
/// Nodes file: one tab-separated record per line,
///   `id<TAB>text[<TAB>label[<TAB>f1,f2,...]]`
/// An empty label field leaves the node unlabeled. Node ids are remapped to
/// 0..n-1 in file order; the originals are kept in `original_ids()`.
///
/// Edges file: `src<TAB>dst` per line using the node file's ids. Blank lines
/// and text after `#` are ignored.
LoadedGraph load_graph(const std::filesystem::path& nodes_path,
                       const std::filesystem::path& edges_path);
LoadedGraph read_graph(std::istream& nodes, std::istream& edges);

/// Writes the two files `load_graph` reads. Ids are the original ids when
/// present, otherwise the dense indices.
void write_graph(const TextAttributedGraph& graph, std::ostream& nodes, std::ostream& edges);
void save_graph(const TextAttributedGraph& graph, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path);

/// Flat `key = value` file. Blank lines and `#` comments are skipped.
/// Duplicate keys are rejected.
std::map<std::string, std::string> read_key_values(std::istream& in);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace drcl::tag
