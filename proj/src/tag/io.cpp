#include "drcl/tag/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace drcl::tag {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_int(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

double parse_real(const std::string& raw, std::size_t line_no) {
  const std::string s = trim(raw);
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  double v = 0;
  in >> v;
  if (s.empty() || in.fail() || !in.eof()) throw ParseError("bad number '" + s + "'", line_no);
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

}  // namespace

LoadedGraph read_graph(std::istream& nodes, std::istream& edges) {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  std::vector<std::string> raw_labels;
  std::vector<std::vector<double>> feature_rows;
  std::unordered_map<std::string, int> index;
  std::size_t feature_lines = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(nodes, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 4) {
      throw ParseError("node record needs 2 to 4 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const std::string id = trim(fields[0]);
    if (id.empty()) throw ParseError("empty node id", line_no);
    if (!index.emplace(id, static_cast<int>(ids.size())).second) {
      throw ParseError("duplicate node id '" + id + "'", line_no);
    }
    ids.push_back(id);
    texts.push_back(fields[1]);
    raw_labels.push_back(fields.size() > 2 ? trim(fields[2]) : std::string{});

    std::vector<double> row;
    if (fields.size() > 3 && !trim(fields[3]).empty()) {
      for (const auto& cell : split(fields[3], ',')) row.push_back(parse_real(cell, line_no));
      ++feature_lines;
      if (!feature_rows.empty() && !feature_rows.front().empty() &&
          row.size() != feature_rows.front().size()) {
        throw ParseError("feature width " + std::to_string(row.size()) + " differs from " +
                             std::to_string(feature_rows.front().size()),
                         line_no);
      }
    }
    feature_rows.push_back(std::move(row));
  }

  const int n = static_cast<int>(ids.size());
  if (feature_lines != 0 && feature_lines != ids.size()) {
    throw ValidationError("numeric features must be given for every node or for none");
  }

  std::optional<MatrixX> features;
  if (feature_lines != 0) {
    MatrixX x(n, static_cast<Eigen::Index>(feature_rows.front().size()));
    for (int i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < feature_rows[i].size(); ++j) x(i, j) = feature_rows[i][j];
    }
    features = std::move(x);
  }

  // Integer labels keep their numeric order, anything else sorts as text.
  std::optional<LabelVector> truth;
  if (std::any_of(raw_labels.begin(), raw_labels.end(), [](auto& s) { return !s.empty(); })) {
    bool all_int = true;
    std::set<long long> int_values;
    std::set<std::string> str_values;
    for (const auto& s : raw_labels) {
      if (s.empty()) continue;
      long long v = 0;
      if (parse_int(s, v)) int_values.insert(v);
      else all_int = false;
      str_values.insert(s);
    }
    std::vector<int> labels(static_cast<std::size_t>(n), kUnassigned);
    for (int i = 0; i < n; ++i) {
      const auto& s = raw_labels[i];
      if (s.empty()) continue;
      if (all_int) {
        long long v = 0;
        parse_int(s, v);
        labels[i] = static_cast<int>(std::distance(int_values.begin(), int_values.find(v)));
      } else {
        labels[i] = static_cast<int>(std::distance(str_values.begin(), str_values.find(s)));
      }
    }
    const int k = static_cast<int>(all_int ? int_values.size() : str_values.size());
    truth = LabelVector(std::move(labels), k);
  }

  std::vector<Edge> raw_edges;
  line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto fields = split(trim(line), '\t');
    if (fields.size() != 2) {
      throw ParseError("edge record needs exactly 2 tab-separated fields", line_no);
    }
    int ends[2];
    for (int side = 0; side < 2; ++side) {
      const auto it = index.find(trim(fields[side]));
      if (it == index.end()) {
        throw ValidationError("edge references unknown node '" + trim(fields[side]) +
                              "' (line " + std::to_string(line_no) + ")");
      }
      ends[side] = it->second;
    }
    raw_edges.emplace_back(ends[0], ends[1]);
  }

  EdgeCleanup cleanup;
  auto graph = TextAttributedGraph::build(n, std::move(raw_edges), std::move(texts),
                                          std::move(features), std::move(truth), &cleanup);
  graph.set_original_ids(std::move(ids));
  return {std::move(graph), cleanup};
}

LoadedGraph load_graph(const std::filesystem::path& nodes_path,
                       const std::filesystem::path& edges_path) {
  auto nodes = open_or_throw(nodes_path);
  auto edges = open_or_throw(edges_path);
  return read_graph(nodes, edges);
}

void write_graph(const TextAttributedGraph& graph, std::ostream& nodes, std::ostream& edges) {
  const auto id_of = [&](int i) {
    return graph.original_ids().empty() ? std::to_string(i) : graph.original_ids()[i];
  };
  std::ostringstream buf;
  for (int i = 0; i < graph.node_count(); ++i) {
    buf << id_of(i) << '\t' << graph.texts()[i];
    const bool has_label = graph.truth() && (*graph.truth())[i] >= 0;
    if (has_label || graph.features()) {
      buf << '\t';
      if (has_label) buf << (*graph.truth())[i];
    }
    if (graph.features()) {
      buf << '\t';
      const auto& x = *graph.features();
      for (Eigen::Index j = 0; j < x.cols(); ++j) buf << (j ? "," : "") << format_real(x(i, j));
    }
    buf << '\n';
  }
  nodes << buf.str();
  for (auto [u, v] : graph.edges()) edges << id_of(u) << '\t' << id_of(v) << '\n';
}

void save_graph(const TextAttributedGraph& graph, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path) {
  std::ofstream nodes(nodes_path, std::ios::binary);
  std::ofstream edges(edges_path, std::ios::binary);
  if (!nodes) throw ValidationError("cannot write " + nodes_path.string());
  if (!edges) throw ValidationError("cannot write " + edges_path.string());
  write_graph(graph, nodes, edges);
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!out.emplace(key, value).second) throw ParseError("duplicate key '" + key + "'", line_no);
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_key_values(in);
}

}  // namespace drcl::tag
