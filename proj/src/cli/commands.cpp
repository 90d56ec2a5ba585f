#include "drcl/cli/commands.hpp"

#include "drcl/cli/config.hpp"
#include "drcl/cli/report_io.hpp"
#include "drcl/eval/mcdm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace drcl::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "seed for every random stream")->required();
}

CliConfig resolve(const Common& c) {
  CliConfig config = c.config_path.empty() ? CliConfig{} : load_config(c.config_path);
  apply_seed(config, c.seed);
  return config;
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) out << text;
  else write_text(path, text);
}

std::vector<int> read_labels(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      labels.push_back(std::stoi(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(line);
    } catch (const std::logic_error&) {
      throw ParseError(path + ": expected an integer label, got '" + line + "'", line_no);
    }
  }
  return labels;
}

MatrixX read_matrix_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string c;
    while (std::getline(cells, c, ',')) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::logic_error&) {
        throw ParseError(path + ": bad number '" + c + "'", line_no);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path + ": ragged row", line_no);
    }
    rows.push_back(std::move(row));
  }
  MatrixX m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Json metric_json(const eval::MetricSet& m) {
  const auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"dbi", m.dbi}, {"di", m.di},       {"q", m.q},        {"nmi", opt(m.nmi)},
              {"acc", opt(m.acc)}, {"f1", opt(m.f1)}, {"ari", opt(m.ari)}};
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::logic_error&) {
      throw ValidationError("--fractions: bad number '" + part + "'");
    }
  }
  if (out.empty()) throw ValidationError("--fractions: empty list");
  return out;
}

const char* kRunFooter =
    "\nThe --csv summary has one row per epoch with columns:\n"
    "  epoch,proto_source,k,loss_gcn,loss_gcn_scaled,loss_tsmm,loss_total,final_staged_acc,\n"
    "  dbi,di,q,nmi,acc,f1,ari,agreement\n"
    "Empty cells mean the value does not apply (no ground truth, no text stage).";

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Community detection on text-attributed graphs by alternating a graph module and a "
               "text module.",
               "drcl"};
  app.require_subcommand(1);

  Common common;
  std::string out_path;
  std::string csv_path;
  std::string nodes_out;
  std::string edges_out;
  bool timings = false;

  auto* generate = app.add_subcommand("generate", "Write a synthetic block-model graph with texts");
  add_common(generate, common);
  generate->add_option("--nodes", nodes_out, "nodes file to write")->required();
  generate->add_option("--edges", edges_out, "edges file to write")->required();

  auto* warm = app.add_subcommand("warmstart", "Louvain plus size filter; prints the summary as JSON");
  add_common(warm, common);
  warm->add_option("--out", out_path, "write JSON here instead of stdout");

  auto* run = app.add_subcommand("run", "Full refinement cycle");
  add_common(run, common);
  run->add_option("--out", out_path, "report JSON (stdout when omitted)");
  run->add_option("--csv", csv_path, "per-epoch CSV summary");
  run->add_flag("--timings", timings, "include wall-clock per stage (breaks byte-identical reports)");
  run->footer(kRunFooter);

  std::string variant;
  auto* ablate = app.add_subcommand("ablate", "Run one ablation");
  add_common(ablate, common);
  ablate->add_option("--variant", variant, "no-tsmm or no-gcn")
      ->required()
      ->check(CLI::IsMember({"no-tsmm", "no-gcn"}));
  ablate->add_option("--out", out_path, "report JSON (stdout when omitted)");
  ablate->add_option("--csv", csv_path, "CSV summary");
  ablate->add_flag("--timings", timings, "include wall-clock per stage");
  ablate->footer(kRunFooter);

  std::string fractions = "0.1,0.3,0.5";
  bool with_pseudo = false;
  auto* supervise = app.add_subcommand("supervise", "Train the text module on true-label fractions");
  add_common(supervise, common);
  supervise->add_option("--fractions", fractions, "comma-separated fractions in (0, 1]")->capture_default_str();
  supervise->add_flag("--with-pseudo", with_pseudo, "also score a full pseudo-label run on the same split");
  supervise->add_option("--out", out_path, "report JSON (stdout when omitted)");
  supervise->add_option("--csv", csv_path, "CSV with columns supervision,fraction,labels_used,acc,f1,ari");

  std::string nodes_in;
  std::string edges_in;
  std::string labels_in;
  std::string embedding_in;
  auto* metrics = app.add_subcommand("metrics", "Score a labeling of a graph; prints JSON");
  metrics->add_option("--nodes", nodes_in, "nodes file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--edges", edges_in, "edges file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--labels", labels_in, "one integer label per node, in node order")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--embedding", embedding_in,
                      "CSV of node vectors for DBI/DI (default: node features or bag of words)")
      ->check(CLI::ExistingFile);
  metrics->add_option("--out", out_path, "write JSON here instead of stdout");

  std::string table_in;
  std::string correlation = "pearson";
  auto* rank = app.add_subcommand("rank", "CRITIC weights and TOPSIS ranking of a decision table");
  rank->add_option("--table", table_in, "CSV; header cells end in + (benefit) or - (cost)")
      ->required()
      ->check(CLI::ExistingFile);
  rank->add_option("--correlation", correlation, "pearson or spearman")
      ->capture_default_str()
      ->check(CLI::IsMember({"pearson", "spearman"}));
  rank->add_option("--out", out_path, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failed->help();
    return 1;
  }

  try {
    if (generate->parsed()) {
      const auto config = resolve(common);
      tag::save_graph(tag::generate_sbm_tag(config.synthetic), nodes_out, edges_out);
    } else if (warm->parsed()) {
      const auto config = resolve(common);
      const auto graph = load_input_graph(config);
      const auto ws = cycle::warm_start(graph, config.drcl);
      Json j;
      j["louvain_communities"] = ws.louvain.labels.k;
      j["pass_modularity"] = ws.louvain.pass_modularity;
      j["sizes"] = ws.filter.stats.sizes;
      j["mu"] = ws.filter.stats.mu;
      j["sigma"] = ws.filter.stats.sigma;
      j["threshold"] = ws.filter.stats.threshold;
      j["k"] = ws.filter.proto.k();
      j["labels"] = ws.filter.labels.labels;
      j["warnings"] = ws.filter.warnings;
      emit(out, out_path, j.dump(2) + "\n");
    } else if (run->parsed() || ablate->parsed()) {
      auto config = resolve(common);
      config.drcl.timings = timings;
      const auto graph = load_input_graph(config);
      cycle::RunReport report;
      if (run->parsed()) report = cycle::run_drcl(graph, config.drcl).report;
      else if (variant == "no-tsmm") report = cycle::ablate_without_tsmm(graph, config.drcl);
      else report = cycle::ablate_without_gcn(graph, config.drcl);
      report.config = echo(config);
      emit(out, out_path, emit_json(report));
      if (!csv_path.empty()) write_text(csv_path, emit_csv(report));
    } else if (supervise->parsed()) {
      const auto config = resolve(common);
      const auto graph = load_input_graph(config);
      std::optional<cycle::DrclResult> pseudo;
      if (with_pseudo) pseudo = cycle::run_drcl(graph, config.drcl);
      auto report = cycle::supervision_comparison(graph, parse_fractions(fractions), config.drcl,
                                                  pseudo ? &*pseudo : nullptr);
      report.config = echo(config);
      emit(out, out_path, emit_json(report));
      if (!csv_path.empty()) write_text(csv_path, emit_csv(report));
    } else if (metrics->parsed()) {
      const auto loaded = tag::load_graph(nodes_in, edges_in);
      const auto labels = read_labels(labels_in);
      if (static_cast<int>(labels.size()) != loaded.graph.node_count()) {
        throw ValidationError(labels_in + ": " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(loaded.graph.node_count()) + " nodes");
      }
      const MatrixX embedding = embedding_in.empty()
                                    ? cycle::input_features(loaded.graph, cycle::DrclConfig{})
                                    : read_matrix_csv(embedding_in);
      if (embedding.rows() != loaded.graph.node_count()) {
        throw ValidationError("embedding rows do not match the node count");
      }
      const auto m = eval::evaluate_partition(loaded.graph, embedding, labels, loaded.graph.truth());
      emit(out, out_path, metric_json(m).dump(2) + "\n");
    } else if (rank->parsed()) {
      std::ifstream in(table_in);
      const auto table = eval::sanitize(eval::parse_decision_csv(in));
      const auto weights = eval::critic_weights(
          table.matrix, correlation == "spearman" ? eval::Correlation::Spearman : eval::Correlation::Pearson);
      const auto result = eval::topsis_rank(table.matrix, weights);
      Json j;
      j["criteria"] = table.matrix.criteria;
      j["weights"] = std::vector<double>(result.weights.data(), result.weights.data() + result.weights.size());
      Json alts = Json::array();
      for (std::size_t i = 0; i < table.matrix.alternatives.size(); ++i) {
        alts.push_back(Json{{"name", table.matrix.alternatives[i]},
                            {"closeness", result.closeness[static_cast<Eigen::Index>(i)]},
                            {"rank", result.ranks[i]}});
      }
      j["alternatives"] = std::move(alts);
      j["log"] = table.log;
      emit(out, out_path, j.dump(2) + "\n");
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace drcl::cli
