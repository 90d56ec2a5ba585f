#include <doctest.h>

#include "drcl/cli/commands.hpp"
#include "drcl/cli/config.hpp"
#include "drcl/cli/report_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace drcl;
using namespace drcl::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "drcl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("drcl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kTinyConfig =
    "drcl.epochs = 2\n"
    "gcn.steps = 10\n"
    "gcn.hidden_dim = 8\n"
    "tsmm.d_model = 8\n"
    "tsmm.state_dim = 2\n"
    "tsmm.layers = 1\n"
    "synthetic.k = 2\n"
    "synthetic.block_sizes = 15,15\n"
    "synthetic.p_in = 0.4\n"
    "synthetic.p_out = 0.02\n"
    "synthetic.text_len = 5,10\n";

cycle::RunReport sample_report() {
  cycle::RunReport r;
  r.config = {{"drcl.epochs", "1"}, {"gcn.delta", "30"}};
  r.warm_start.louvain_communities = 3;
  r.warm_start.pass_modularity = {0.25, 0.4};
  r.warm_start.sizes = {4, 4, 1};
  r.warm_start.mu = 3.0;
  r.warm_start.sigma = 1.4142135623730951;
  r.warm_start.threshold = 3.7071067811865475;
  r.warm_start.k = 2;
  r.warm_start.dropped_nodes = 1;
  cycle::EpochRecord e;
  e.epoch = 0;
  e.proto_source = "structural";
  e.k = 2;
  e.loss_gcn = -0.41;
  e.loss_gcn_scaled = -0.00041;
  e.loss_tsmm = 0.6931471805599453;
  e.loss_total = 0.6927371805599453;
  e.staged_acc = {0.5, 0.75, 1.0};
  e.metrics.dbi = 0.3;
  e.metrics.di = 2.0;
  e.metrics.q = 0.4;
  e.metrics.nmi = 1.0;
  e.metrics.acc = 1.0;
  e.agreement = 0.875;
  r.epochs = {e, e};
  r.epochs[1].epoch = 1;
  r.epochs[1].loss_tsmm.reset();
  r.epochs[1].loss_total.reset();
  r.final_metrics = e.metrics;
  r.final_y_c = {0, 0, 1, 1, -1};
  r.final_y_t = {0, 0, 1, 1, 1};
  r.warnings = {"something odd"};
  r.timings = {{"warm_start", 0.125}};
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config({{"drcl.epochs", "3"}, {"gcn.delta", "2.5"}, {"tsmm.input_lag", "true"},
                               {"synthetic.k", "2"}, {"synthetic.block_sizes", "4,5"}});
  CHECK(c.drcl.epochs == 3);
  CHECK(c.drcl.gcn.delta == 2.5);
  CHECK(c.drcl.tsmm.input_lag);
  CHECK(c.synthetic.block_sizes == std::vector<int>{4, 5});
  CHECK_FALSE(c.nodes_path.has_value());

  CHECK_THROWS_AS(parse_config({{"drcl.epochz", "3"}}), ValidationError);
  CHECK_THROWS_AS(parse_config({{"gcn.seed", "3"}}), ValidationError);
  CHECK_THROWS_AS(parse_config({{"synthetic.seed", "3"}}), ValidationError);
  CHECK_THROWS_AS(parse_config({{"drcl.epochs", "three"}}), ValidationError);
  CHECK_THROWS_AS(parse_config({{"drcl.reinit_gcn", "maybe"}}), ValidationError);
  CHECK_THROWS_AS(parse_config({{"data.nodes", "n.tsv"}}), ValidationError);
  CHECK_THROWS_AS(parse_config({{"data.nodes", "n"}, {"data.edges", "e"}, {"synthetic.k", "2"}}),
                  ValidationError);

  const auto d = parse_config({{"data.nodes", "n.tsv"}, {"data.edges", "e.tsv"}}, "/base");
  CHECK(*d.nodes_path == fs::path("/base/n.tsv"));
}

TEST_CASE("one seed drives every stream and the echo is complete") {
  CliConfig c;
  apply_seed(c, 17);
  CHECK(c.drcl.seed == 17);
  CHECK(c.synthetic.seed == 17);
  const auto e = echo(c);
  CHECK(e.at("drcl.epochs") == "20");
  CHECK(e.count("tsmm.lr") == 1);
  CHECK(e.count("synthetic.p_in") == 1);
  CHECK(e.count("gcn.delta") == 1);
  CHECK(e.at("seed") == "17");
  auto without_seed = e;
  without_seed.erase("seed");
  CHECK(parse_config(without_seed).drcl.gcn.delta == c.drcl.gcn.delta);
  CHECK_THROWS_AS(parse_config(e), ValidationError);
}

TEST_CASE("run reports round-trip through JSON") {
  const auto r = sample_report();
  const std::string json = emit_json(r);
  CHECK(parse_run_report(json) == r);
  CHECK(emit_json(parse_run_report(json)) == json);
  CHECK(json.find("null") != std::string::npos);
  CHECK_THROWS_AS(parse_run_report("{"), ValidationError);
}

TEST_CASE("supervision reports round-trip through JSON") {
  cycle::SupervisionReport s;
  s.test_nodes = 90;
  s.rows = {{"truth", 0.1, 21, 0.9, 0.88, 0.7}, {"pseudo", 1.0, 210, 1.0, 1.0, 1.0}};
  s.config = {{"tsmm.lr", "0.003"}};
  CHECK(parse_supervision_report(emit_json(s)) == s);
  const std::string csv = emit_csv(s);
  CHECK(csv.substr(0, csv.find('\n')) == kSupervisionCsvHeader);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("epoch CSV has the fixed header and one row per epoch") {
  const auto r = sample_report();
  const std::string csv = emit_csv(r);
  CHECK(csv.substr(0, csv.find('\n')) == kEpochCsvHeader);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("\n0,structural,2,") != std::string::npos);

  cycle::RunReport kmeans;
  kmeans.kind = "ablate-no-gcn";
  kmeans.final_metrics = r.final_metrics;
  const std::string one = emit_csv(kmeans);
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
  CHECK(one.find("\nfinal,") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto missing = invoke({"run", "--config", "/nonexistent/c.cfg", "--seed", "1"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/c.cfg") != std::string::npos);

  CHECK(invoke({"run", "--seed", "1", "--bogus"}).code == 1);
  CHECK(invoke({"run"}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("supervise") != std::string::npos);

  const auto dir = scratch("codes");
  put(dir / "bad.cfg", "drcl.epochs = 2\ngcn.seed = 4\n");
  const auto bad = invoke({"run", "--config", (dir / "bad.cfg").string(), "--seed", "1"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("--seed") != std::string::npos);
}

TEST_CASE("rank prints TOPSIS ranks") {
  const auto dir = scratch("rank");
  put(dir / "t.csv", "method,acc+,time-\nA,0.9,1\nB,0.5,4\n");
  const auto r = invoke({"rank", "--table", (dir / "t.csv").string()});
  REQUIRE(r.code == 0);
  const auto at_a = r.out.find("\"A\"");
  const auto at_b = r.out.find("\"B\"");
  REQUIRE(at_a != std::string::npos);
  REQUIRE(at_b != std::string::npos);
  CHECK(r.out.find("\"rank\": 1", at_a) < at_b);
  CHECK(r.out.find("\"rank\": 2", at_b) != std::string::npos);
}

TEST_CASE("generate, warmstart and metrics agree with each other") {
  const auto dir = scratch("pipeline");
  put(dir / "c.cfg", kTinyConfig);
  const auto cfg = (dir / "c.cfg").string();
  REQUIRE(invoke({"generate", "--config", cfg, "--seed", "3", "--nodes", (dir / "n.tsv").string(),
                  "--edges", (dir / "e.tsv").string()})
              .code == 0);
  const auto loaded = tag::load_graph(dir / "n.tsv", dir / "e.tsv");
  CHECK(loaded.graph.node_count() == 30);

  const auto ws = invoke({"warmstart", "--config", cfg, "--seed", "3"});
  CHECK(ws.code == 0);
  CHECK(ws.out.find("\"threshold\"") != std::string::npos);

  std::string labels;
  for (int v = 0; v < 30; ++v) labels += std::to_string(loaded.graph.truth()->labels[v]) + "\n";
  put(dir / "y.txt", labels);
  const auto m = invoke({"metrics", "--nodes", (dir / "n.tsv").string(), "--edges", (dir / "e.tsv").string(),
                         "--labels", (dir / "y.txt").string()});
  CHECK(m.code == 0);
  CHECK(m.out.find("\"acc\": 1.0") != std::string::npos);

  put(dir / "short.txt", "0\n1\n");
  CHECK(invoke({"metrics", "--nodes", (dir / "n.tsv").string(), "--edges", (dir / "e.tsv").string(),
                "--labels", (dir / "short.txt").string()})
            .code == 1);
}

TEST_CASE("runs are byte-identical for the same seed") {
  const auto dir = scratch("determinism");
  put(dir / "c.cfg", kTinyConfig);
  const auto cfg = (dir / "c.cfg").string();
  auto go = [&](const std::string& tag) {
    return invoke({"run", "--config", cfg, "--seed", "7", "--out", (dir / (tag + ".json")).string(), "--csv",
                   (dir / (tag + ".csv")).string()})
        .code;
  };
  REQUIRE(go("a") == 0);
  REQUIRE(go("b") == 0);
  CHECK(read_text(dir / "a.json") == read_text(dir / "b.json"));
  CHECK(read_text(dir / "a.csv") == read_text(dir / "b.csv"));
  const auto report = parse_run_report(read_text(dir / "a.json"));
  CHECK(report.epochs.size() == 2);
  CHECK(report.config.at("seed") == "7");

  const auto other = invoke({"run", "--config", cfg, "--seed", "8"});
  CHECK(other.code == 0);
  CHECK(other.out != read_text(dir / "a.json"));
}
