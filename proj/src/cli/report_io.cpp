#include "drcl/cli/report_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace drcl::cli {
namespace {

using Json = nlohmann::ordered_json;

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> get_opt(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

Json metrics_json(const eval::MetricSet& m) {
  Json j;
  j["dbi"] = m.dbi;
  j["di"] = m.di;
  j["q"] = m.q;
  j["nmi"] = opt(m.nmi);
  j["acc"] = opt(m.acc);
  j["f1"] = opt(m.f1);
  j["ari"] = opt(m.ari);
  return j;
}

eval::MetricSet metrics_from(const Json& j) {
  eval::MetricSet m;
  m.dbi = j.at("dbi").get<double>();
  m.di = j.at("di").get<double>();
  m.q = j.at("q").get<double>();
  m.nmi = get_opt(j, "nmi");
  m.acc = get_opt(j, "acc");
  m.f1 = get_opt(j, "f1");
  m.ari = get_opt(j, "ari");
  return m;
}

Json config_json(const std::map<std::string, std::string>& config) {
  Json j = Json::object();
  for (const auto& [k, v] : config) j[k] = v;
  return j;
}

std::map<std::string, std::string> config_from(const Json& j) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
  return out;
}

template <typename T>
T parse_checked(std::string_view text, const char* what, T (*convert)(const Json&)) {
  try {
    const Json j = Json::parse(text);
    const int version = j.at("schema_version").get<int>();
    if (version != cycle::kReportSchemaVersion) {
      throw ValidationError(std::string(what) + ": schema version " + std::to_string(version) +
                            " is not " + std::to_string(cycle::kReportSchemaVersion));
    }
    return convert(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

cycle::RunReport run_report_from(const Json& j) {
  cycle::RunReport r;
  r.schema_version = j.at("schema_version").get<int>();
  r.kind = j.at("kind").get<std::string>();
  r.config = config_from(j.at("config"));
  const auto& ws = j.at("warm_start");
  r.warm_start.louvain_communities = ws.at("louvain_communities").get<int>();
  r.warm_start.pass_modularity = ws.at("pass_modularity").get<std::vector<double>>();
  r.warm_start.sizes = ws.at("sizes").get<std::vector<int>>();
  r.warm_start.mu = ws.at("mu").get<double>();
  r.warm_start.sigma = ws.at("sigma").get<double>();
  r.warm_start.threshold = ws.at("threshold").get<double>();
  r.warm_start.k = ws.at("k").get<int>();
  r.warm_start.dropped_nodes = ws.at("dropped_nodes").get<int>();
  for (const auto& e : j.at("epochs")) {
    cycle::EpochRecord rec;
    rec.epoch = e.at("epoch").get<int>();
    rec.proto_source = e.at("proto_source").get<std::string>();
    rec.k = e.at("k").get<int>();
    rec.loss_gcn = get_opt(e, "loss_gcn");
    rec.loss_gcn_scaled = get_opt(e, "loss_gcn_scaled");
    rec.loss_tsmm = get_opt(e, "loss_tsmm");
    rec.loss_total = get_opt(e, "loss_total");
    rec.staged_acc = e.at("staged_acc").get<std::vector<double>>();
    rec.metrics = metrics_from(e.at("metrics"));
    rec.agreement = get_opt(e, "agreement");
    r.epochs.push_back(std::move(rec));
  }
  if (!j.at("final_metrics").is_null()) r.final_metrics = metrics_from(j.at("final_metrics"));
  r.final_y_c = j.at("final_y_c").get<std::vector<int>>();
  r.final_y_t = j.at("final_y_t").get<std::vector<int>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (j.contains("timings")) {
    for (const auto& t : j.at("timings")) {
      r.timings.push_back({t.at("stage").get<std::string>(), t.at("seconds").get<double>()});
    }
  }
  return r;
}

cycle::SupervisionReport supervision_from(const Json& j) {
  cycle::SupervisionReport r;
  r.schema_version = j.at("schema_version").get<int>();
  r.config = config_from(j.at("config"));
  r.test_nodes = j.at("test_nodes").get<int>();
  for (const auto& row : j.at("rows")) {
    r.rows.push_back({row.at("supervision").get<std::string>(), row.at("fraction").get<double>(),
                      row.at("labels_used").get<int>(), row.at("acc").get<double>(),
                      row.at("f1").get<double>(), row.at("ari").get<double>()});
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return {};
  std::ostringstream out;
  out.precision(10);
  out << *v;
  return out.str();
}

std::string cell(double v) { return cell(std::optional<double>(v)); }

void metric_cells(std::ostringstream& out, const eval::MetricSet& m) {
  out << cell(m.dbi) << ',' << cell(m.di) << ',' << cell(m.q) << ',' << cell(m.nmi) << ','
      << cell(m.acc) << ',' << cell(m.f1) << ',' << cell(m.ari);
}

}  // namespace

std::string emit_json(const cycle::RunReport& r) {
  Json j;
  j["schema_version"] = r.schema_version;
  j["kind"] = r.kind;
  j["config"] = config_json(r.config);
  Json ws;
  ws["louvain_communities"] = r.warm_start.louvain_communities;
  ws["pass_modularity"] = r.warm_start.pass_modularity;
  ws["sizes"] = r.warm_start.sizes;
  ws["mu"] = r.warm_start.mu;
  ws["sigma"] = r.warm_start.sigma;
  ws["threshold"] = r.warm_start.threshold;
  ws["k"] = r.warm_start.k;
  ws["dropped_nodes"] = r.warm_start.dropped_nodes;
  j["warm_start"] = ws;
  Json epochs = Json::array();
  for (const auto& e : r.epochs) {
    Json ej;
    ej["epoch"] = e.epoch;
    ej["proto_source"] = e.proto_source;
    ej["k"] = e.k;
    ej["loss_gcn"] = opt(e.loss_gcn);
    ej["loss_gcn_scaled"] = opt(e.loss_gcn_scaled);
    ej["loss_tsmm"] = opt(e.loss_tsmm);
    ej["loss_total"] = opt(e.loss_total);
    ej["staged_acc"] = e.staged_acc;
    ej["metrics"] = metrics_json(e.metrics);
    ej["agreement"] = opt(e.agreement);
    epochs.push_back(std::move(ej));
  }
  j["epochs"] = std::move(epochs);
  j["final_metrics"] = r.final_metrics ? metrics_json(*r.final_metrics) : Json(nullptr);
  j["final_y_c"] = r.final_y_c;
  j["final_y_t"] = r.final_y_t;
  j["warnings"] = r.warnings;
  if (!r.timings.empty()) {
    Json t = Json::array();
    for (const auto& s : r.timings) t.push_back(Json{{"stage", s.stage}, {"seconds", s.seconds}});
    j["timings"] = std::move(t);
  }
  return j.dump(2) + "\n";
}

cycle::RunReport parse_run_report(std::string_view json) {
  return parse_checked<cycle::RunReport>(json, "run report", &run_report_from);
}

std::string emit_json(const cycle::SupervisionReport& r) {
  Json j;
  j["schema_version"] = r.schema_version;
  j["kind"] = "supervise";
  j["config"] = config_json(r.config);
  j["test_nodes"] = r.test_nodes;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"supervision", row.supervision},
                        {"fraction", row.fraction},
                        {"labels_used", row.labels_used},
                        {"acc", row.acc},
                        {"f1", row.f1},
                        {"ari", row.ari}});
  }
  j["rows"] = std::move(rows);
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

cycle::SupervisionReport parse_supervision_report(std::string_view json) {
  return parse_checked<cycle::SupervisionReport>(json, "supervision report", &supervision_from);
}

std::string emit_csv(const cycle::RunReport& r) {
  std::ostringstream out;
  out << kEpochCsvHeader << '\n';
  for (const auto& e : r.epochs) {
    out << e.epoch << ',' << e.proto_source << ',' << e.k << ',' << cell(e.loss_gcn) << ','
        << cell(e.loss_gcn_scaled) << ',' << cell(e.loss_tsmm) << ',' << cell(e.loss_total) << ','
        << (e.staged_acc.empty() ? std::string() : cell(e.staged_acc.back())) << ',';
    metric_cells(out, e.metrics);
    out << ',' << cell(e.agreement) << '\n';
  }
  if (r.epochs.empty() && r.final_metrics) {
    out << "final,," << r.warm_start.k << ",,,,,,";
    metric_cells(out, *r.final_metrics);
    out << ",\n";
  }
  return out.str();
}

std::string emit_csv(const cycle::SupervisionReport& r) {
  std::ostringstream out;
  out << kSupervisionCsvHeader << '\n';
  for (const auto& row : r.rows) {
    out << row.supervision << ',' << cell(row.fraction) << ',' << row.labels_used << ','
        << cell(row.acc) << ',' << cell(row.f1) << ',' << cell(row.ari) << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace drcl::cli
