#include "kgicu/config.hpp"

#include <fstream>
#include <sstream>

#include "kgicu/errors.hpp"

namespace kgicu {

GnnKind parse_gnn_kind(const std::string& name) {
  if (name == "gcn") return GnnKind::Gcn;
  if (name == "attention" || name == "gat") return GnnKind::Attention;
  if (name == "sample-aggregate" || name == "graphsage" || name == "sage")
    return GnnKind::SampleAggregate;
  throw ConfigError("unknown GNN layer kind '" + name +
                    "' (gcn|attention|sample-aggregate)");
}

AggregateMode parse_aggregate_mode(const std::string& name) {
  if (name == "sum") return AggregateMode::Sum;
  if (name == "mean") return AggregateMode::Mean;
  if (name == "max") return AggregateMode::Max;
  throw ConfigError("unknown aggregation mode '" + name + "' (sum|mean|max)");
}

TaskKind parse_task(const std::string& name) {
  if (name == "mortality") return TaskKind::Mortality;
  if (name == "decomp" || name == "decompensation") return TaskKind::Decompensation;
  if (name == "pheno" || name == "phenotyping") return TaskKind::Phenotyping;
  throw ConfigError("unknown task '" + name + "' (mortality|decomp|pheno)");
}

TrainConfig TrainConfig::defaults_for(TaskKind task) {
  TrainConfig config;
  config.task = task;
  config.epochs = task == TaskKind::Phenotyping ? 40 : 20;
  return config;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (embed_dim == 0) throw ConfigError("embed_dim must be >= 1");
  if (hidden_size == 0) throw ConfigError("hidden_size must be >= 1");
  if (!(extraction_threshold > 0.0 && extraction_threshold <= 1.0))
    throw ConfigError("extraction_threshold must be in (0, 1]");
  if (use_gnn && !use_ft)
    throw ConfigError("use_gnn without use_ft is not a valid ablation rung");
  if (use_kg && !use_gnn)
    throw ConfigError("use_kg requires use_gnn");
  if (use_gnn && gnn_depth == 0)
    throw ConfigError("use_gnn with gnn_depth 0 is contradictory");
  if (vsn_connectivity == VsnConnectivity::Grouped && vsn_groups.empty())
    throw ConfigError("grouped VS-N connectivity requires vsn_groups");
}

std::string TrainConfig::to_key_value_text() const {
  std::ostringstream out;
  out << "task = " << to_string(task) << '\n'
      << "batch_size = " << batch_size << '\n'
      << "epochs = " << epochs << '\n'
      << "learning_rate = " << learning_rate << '\n'
      << "gnn_depth = " << gnn_depth << '\n'
      << "layer_kind = " << to_string(layer_kind) << '\n'
      << "aggregation = " << to_string(aggregation) << '\n'
      << "max_kg_nodes = " << max_kg_nodes << '\n'
      << "use_ft = " << (use_ft ? "true" : "false") << '\n'
      << "use_gnn = " << (use_gnn ? "true" : "false") << '\n'
      << "use_text = " << (use_text ? "true" : "false") << '\n'
      << "use_kg = " << (use_kg ? "true" : "false") << '\n'
      << "seed = " << seed << '\n'
      << "embed_dim = " << embed_dim << '\n'
      << "hidden_size = " << hidden_size << '\n'
      << "extraction_threshold = " << extraction_threshold << '\n'
      << "embed_seed = " << embed_seed << '\n'
      << "vsn_connectivity = "
      << (vsn_connectivity == VsnConnectivity::Full ? "full" : "grouped")
      << '\n';
  if (!vsn_groups.empty()) {
    out << "vsn_groups = ";
    bool first = true;
    for (auto [feature, group] : vsn_groups) {
      if (!first) out << ',';
      out << feature << ':' << group;
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + value);
}

std::map<int, int> parse_groups(const std::string& value) {
  std::map<int, int> groups;
  std::istringstream in(value);
  std::string pair;
  while (std::getline(in, pair, ',')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos)
      throw ConfigError("config: vsn_groups expects feature:group pairs");
    groups[std::stoi(pair.substr(0, colon))] =
        std::stoi(pair.substr(colon + 1));
  }
  return groups;
}

}  // namespace

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig config;
  bool epochs_set = false;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "task") config.task = parse_task(value);
      else if (key == "batch_size") config.batch_size = std::stoull(value);
      else if (key == "epochs") { config.epochs = std::stoull(value); epochs_set = true; }
      else if (key == "learning_rate") config.learning_rate = std::stod(value);
      else if (key == "gnn_depth") config.gnn_depth = std::stoull(value);
      else if (key == "layer_kind") config.layer_kind = parse_gnn_kind(value);
      else if (key == "aggregation")
        config.aggregation = parse_aggregate_mode(value);
      else if (key == "max_kg_nodes") config.max_kg_nodes = std::stoull(value);
      else if (key == "use_ft") config.use_ft = parse_bool(key, value);
      else if (key == "use_gnn") config.use_gnn = parse_bool(key, value);
      else if (key == "use_text") config.use_text = parse_bool(key, value);
      else if (key == "use_kg") config.use_kg = parse_bool(key, value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "embed_dim") config.embed_dim = std::stoull(value);
      else if (key == "hidden_size") config.hidden_size = std::stoull(value);
      else if (key == "extraction_threshold")
        config.extraction_threshold = std::stod(value);
      else if (key == "embed_seed") config.embed_seed = std::stoull(value);
      else if (key == "vsn_connectivity")
        config.vsn_connectivity = value == "grouped" ? VsnConnectivity::Grouped
                                                     : VsnConnectivity::Full;
      else if (key == "vsn_groups") config.vsn_groups = parse_groups(value);
      else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError("config: bad value for '" + key + "': " + value);
    } catch (const std::out_of_range&) {
      throw ConfigError("config: value out of range for '" + key + "'");
    }
  }
  if (!epochs_set && config.task == TaskKind::Phenotyping) config.epochs = 40;
  config.validate();
  return config;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace kgicu
