#include "drcl/cli/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace drcl::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("config: " + key + " expects an integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  double out = 0.0;
  in >> out;
  if (!in || !in.eof()) {
    throw ValidationError("config: " + key + " expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config: " + key + " expects true or false, got '" + value + "'");
}

std::string fmt(double v) { return format_real(v); }

std::string fmt(bool v) { return v ? "true" : "false"; }

/// One settable field: parse into the config, print back out.
struct Field {
  std::function<void(CliConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const CliConfig&)> get;
};

template <typename T>
Field int_field(T CliConfig::*section, int T::*member) {
  return {[=](CliConfig& c, const std::string& k, const std::string& v) {
            (c.*section).*member = parse_int(k, v);
          },
          [=](const CliConfig& c) { return std::to_string((c.*section).*member); }};
}

template <typename T>
Field double_field(T CliConfig::*section, double T::*member) {
  return {[=](CliConfig& c, const std::string& k, const std::string& v) {
            (c.*section).*member = parse_double(k, v);
          },
          [=](const CliConfig& c) { return fmt((c.*section).*member); }};
}

template <typename T>
Field bool_field(T CliConfig::*section, bool T::*member) {
  return {[=](CliConfig& c, const std::string& k, const std::string& v) {
            (c.*section).*member = parse_bool(k, v);
          },
          [=](const CliConfig& c) { return fmt((c.*section).*member); }};
}

cycle::DrclConfig CliConfig::*const kDrcl = &CliConfig::drcl;

template <typename T>
Field gcn_field(T gcn::GcnConfig::*member) {
  return {[=](CliConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_same_v<T, int>) c.drcl.gcn.*member = parse_int(k, v);
            else c.drcl.gcn.*member = parse_double(k, v);
          },
          [=](const CliConfig& c) {
            if constexpr (std::is_same_v<T, int>) return std::to_string(c.drcl.gcn.*member);
            else return fmt(c.drcl.gcn.*member);
          }};
}

template <typename T>
Field tsmm_field(T tsmm::TsmmConfig::*member) {
  return {[=](CliConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_same_v<T, int>) c.drcl.tsmm.*member = parse_int(k, v);
            else if constexpr (std::is_same_v<T, bool>) c.drcl.tsmm.*member = parse_bool(k, v);
            else c.drcl.tsmm.*member = parse_double(k, v);
          },
          [=](const CliConfig& c) {
            if constexpr (std::is_same_v<T, int>) return std::to_string(c.drcl.tsmm.*member);
            else return fmt(c.drcl.tsmm.*member);
          }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"drcl.epochs", int_field(kDrcl, &cycle::DrclConfig::epochs)},
      {"drcl.switch_epoch", int_field(kDrcl, &cycle::DrclConfig::switch_epoch)},
      {"drcl.lambda", double_field(kDrcl, &cycle::DrclConfig::lambda)},
      {"drcl.reinit_gcn", bool_field(kDrcl, &cycle::DrclConfig::reinit_gcn)},
      {"drcl.warm_tsmm", bool_field(kDrcl, &cycle::DrclConfig::warm_tsmm)},
      {"gcn.delta", gcn_field(&gcn::GcnConfig::delta)},
      {"gcn.similarity_sign", gcn_field(&gcn::GcnConfig::similarity_sign)},
      {"gcn.hidden_dim", gcn_field(&gcn::GcnConfig::hidden_dim)},
      {"gcn.layers", gcn_field(&gcn::GcnConfig::layers)},
      {"gcn.steps", gcn_field(&gcn::GcnConfig::steps)},
      {"gcn.lr", gcn_field(&gcn::GcnConfig::lr)},
      {"gcn.weight_decay", gcn_field(&gcn::GcnConfig::weight_decay)},
      {"gcn.metrics_every", gcn_field(&gcn::GcnConfig::metrics_every)},
      {"tsmm.lr", tsmm_field(&tsmm::TsmmConfig::lr)},
      {"tsmm.warmup_ratio", tsmm_field(&tsmm::TsmmConfig::warmup_ratio)},
      {"tsmm.train_fraction", tsmm_field(&tsmm::TsmmConfig::train_fraction)},
      {"tsmm.eval_stages", tsmm_field(&tsmm::TsmmConfig::eval_stages)},
      {"tsmm.passes", tsmm_field(&tsmm::TsmmConfig::passes)},
      {"tsmm.d_model", tsmm_field(&tsmm::TsmmConfig::d_model)},
      {"tsmm.state_dim", tsmm_field(&tsmm::TsmmConfig::state_dim)},
      {"tsmm.layers", tsmm_field(&tsmm::TsmmConfig::layers)},
      {"tsmm.batch_size", tsmm_field(&tsmm::TsmmConfig::batch_size)},
      {"tsmm.weight_decay", tsmm_field(&tsmm::TsmmConfig::weight_decay)},
      {"tsmm.min_freq", tsmm_field(&tsmm::TsmmConfig::min_freq)},
      {"tsmm.max_seq_len", tsmm_field(&tsmm::TsmmConfig::max_seq_len)},
      {"tsmm.input_lag", tsmm_field(&tsmm::TsmmConfig::input_lag)},
      {"tsmm.selective_bc", tsmm_field(&tsmm::TsmmConfig::selective_bc)},
  };
  return table;
}

}  // namespace

CliConfig parse_config(const std::map<std::string, std::string>& values,
                       const std::filesystem::path& base_dir) {
  CliConfig config;
  std::map<std::string, std::string> synthetic;
  for (const auto& [raw_key, raw_value] : values) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key.ends_with(".seed") || key == "seed") {
      throw ValidationError("config: " + key + " is not allowed; pass --seed on the command line");
    }
    if (key.starts_with("synthetic.")) {
      synthetic[key.substr(10)] = value;
    } else if (key == "data.nodes" || key == "data.edges") {
      std::filesystem::path p(value);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      (key == "data.nodes" ? config.nodes_path : config.edges_path) = p;
    } else if (const auto it = fields().find(key); it != fields().end()) {
      it->second.set(config, key, value);
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  if (config.nodes_path.has_value() != config.edges_path.has_value()) {
    throw ValidationError("config: data.nodes and data.edges must be given together");
  }
  if (!synthetic.empty()) {
    if (config.nodes_path) throw ValidationError("config: give either data.* or synthetic.* keys, not both");
    config.synthetic = tag::synthetic_spec_from(synthetic);
  }
  config.drcl.validate();
  return config;
}

CliConfig load_config(const std::filesystem::path& path) {
  return parse_config(tag::read_key_values(path), path.parent_path());
}

void apply_seed(CliConfig& config, std::uint64_t seed) {
  config.drcl.seed = seed;
  config.drcl.gcn.seed = seed;
  config.drcl.tsmm.seed = seed;
  config.synthetic.seed = seed;
}

std::map<std::string, std::string> echo(const CliConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(config);
  out["seed"] = std::to_string(config.drcl.seed);
  if (config.nodes_path) {
    out["data.nodes"] = config.nodes_path->string();
    out["data.edges"] = config.edges_path->string();
  } else {
    std::istringstream in(tag::to_key_values(config.synthetic));
    for (const auto& [k, v] : tag::read_key_values(in)) {
      if (k != "seed") out["synthetic." + k] = v;
    }
  }
  return out;
}

tag::TextAttributedGraph load_input_graph(const CliConfig& config) {
  if (config.nodes_path) return tag::load_graph(*config.nodes_path, *config.edges_path).graph;
  return tag::generate_sbm_tag(config.synthetic);
}

}  // namespace drcl::cli
