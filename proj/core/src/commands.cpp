#include "kgicu/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kgicu/checkpoint.hpp"
#include "kgicu/errors.hpp"
#include "kgicu/experiments.hpp"
#include "kgicu/svg.hpp"
#include "kgicu/synthetic.hpp"
#include "kgicu/train.hpp"

namespace kgicu::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct Bundle {
  Dataset dataset;
  Vocabulary vocabulary;
  ConceptEdgeSet edges;
  PreparedData prepared;
};

Bundle load_bundle(const std::string& data_dir, const TrainConfig& config) {
  Bundle bundle;
  bundle.dataset = load_dataset(data_dir, config.task);
  bundle.vocabulary =
      Vocabulary::load_tsv((fs::path(data_dir) / "vocab.tsv").string());
  bundle.edges =
      load_ontology_edges((fs::path(data_dir) / "edges.tsv").string());
  bundle.prepared = prepare_data(bundle.dataset, bundle.vocabulary,
                                 bundle.edges, config);
  return bundle;
}

void report_rejections(const Dataset& dataset, bool quiet) {
  if (quiet || dataset.rejected.empty()) return;
  std::cout << "rejected " << dataset.rejected.size() << " episode(s):\n";
  for (const RejectedEpisode& r : dataset.rejected)
    std::cout << "  " << r.patient_id << ":" << r.episode_index << "  "
              << r.reason << "\n";
}

Model restore_model(const Checkpoint& ckpt, size_t n_vitals,
                    const TrainConfig& config) {
  Model model(config, n_vitals);
  model.init_params();
  model.params().load_values(ckpt.params);
  return model;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

void print_report(const std::string& prefix, const MetricReport& report) {
  std::cout << prefix << "  auprc " << format_metric(report.auprc)
            << "  auroc " << format_metric(report.auroc) << "  macro_auc "
            << format_metric(report.macro_auc) << "  micro_auc "
            << format_metric(report.micro_auc) << "  (" << report.positives
            << " pos / " << report.negatives << " neg)\n";
}

json role_to_json(const NodeRole& role, const Vocabulary* vocab) {
  switch (role.kind) {
    case NodeRole::Kind::Vital:
      return {{"kind", "vital"}, {"index", role.vital_index}};
    case NodeRole::Kind::Text:
      return {{"kind", "text"}};
    case NodeRole::Kind::Kg: {
      json j = {{"kind", "kg"}, {"concept_id", role.concept_id}};
      if (vocab != nullptr)
        if (const ConceptEntry* entry = vocab->find(role.concept_id))
          j["term"] = entry->canonical_term;
      return j;
    }
  }
  throw ContractError("unknown node role");
}

json record_to_json(const AttentionRecord& record, const Vocabulary* vocab) {
  json roles = json::array();
  for (const NodeRole& role : record.roles)
    roles.push_back(role_to_json(role, vocab));
  return {{"timestep", record.timestep},
          {"layer", record.layer},
          {"n", record.n},
          {"alpha", record.alpha},
          {"roles", std::move(roles)}};
}

AttentionRecord record_from_json(const json& j) {
  AttentionRecord record;
  record.timestep = j.at("timestep").get<size_t>();
  record.layer = j.at("layer").get<size_t>();
  record.n = j.at("n").get<size_t>();
  record.alpha = j.at("alpha").get<std::vector<double>>();
  if (record.alpha.size() != record.n * record.n)
    throw DataError("attention record: alpha size does not match n*n");
  for (const json& jr : j.at("roles")) {
    const std::string kind = jr.at("kind").get<std::string>();
    if (kind == "vital")
      record.roles.push_back(NodeRole::vital(jr.at("index").get<int>()));
    else if (kind == "text")
      record.roles.push_back(NodeRole::text());
    else if (kind == "kg")
      record.roles.push_back(
          NodeRole::kg(jr.at("concept_id").get<std::string>()));
    else
      throw DataError("attention record: unknown role kind '" + kind + "'");
  }
  return record;
}

// The checkpoint's config is authoritative for everything the model needs.
TrainConfig config_from_checkpoint(const Checkpoint& ckpt) {
  return TrainConfig::parse(ckpt.config_text);
}

}  // namespace

void gen_synth(const GenSynthOptions& options) {
  SyntheticSpec spec;
  if (!options.spec_path.empty()) spec = SyntheticSpec::load(options.spec_path);
  SyntheticData data = generate_synthetic(spec);
  write_synthetic(data, options.out_dir);
  write_text_file((fs::path(options.out_dir) / "synth_spec.txt").string(),
                  spec.to_key_value_text());
  std::cout << "wrote " << data.episodes.size() << " episodes, "
            << data.vocabulary.size() << " concepts, "
            << data.ontology_edges.size() << " ontology edges to "
            << options.out_dir << "\n";
}

void build_kg(const BuildKgOptions& options) {
  Vocabulary vocab = Vocabulary::load_tsv(options.vocab_path);
  ConceptEdgeSet edges = load_ontology_edges(options.edges_path);
  auto episodes = read_episodes_jsonl(
      (fs::path(options.episodes_dir) / "episodes.jsonl").string());

  ConceptMatcher matcher(vocab, options.threshold);
  std::vector<std::set<std::string>> concept_sets;
  for (Episode& episode : episodes) {
    Episode prepped = preprocess_notes(std::move(episode));
    for (const auto& [step, notes] : prepped.notes_by_step) {
      auto counts = matcher.extract_counts(prepped.note_texts_at(step));
      if (counts.empty()) continue;
      std::set<std::string> ids;
      for (const auto& [id, count] : counts) ids.insert(id);
      concept_sets.push_back(std::move(ids));
    }
  }

  SeededEmbeddingProvider provider(options.embed_dim, options.embed_seed);
  GlobalKnowledgeGraph graph = build_global_kg(concept_sets, edges, provider);

  json j;
  j["embedding_dim"] = graph.embedding_dim;
  j["nodes"] = graph.nodes;
  json edge_list = json::array();
  for (const ConceptEdge& e : graph.edges)
    edge_list.push_back({e.first, e.second});
  j["edges"] = std::move(edge_list);
  json embeddings = json::object();
  for (const auto& [id, vec] : graph.embeddings) embeddings[id] = vec;
  j["embeddings"] = std::move(embeddings);
  write_text_file(options.out_path, j.dump(2) + "\n");
  std::cout << "global knowledge graph: " << graph.nodes.size() << " nodes, "
            << graph.edges.size() << " edges -> " << options.out_path << "\n";
}

void train_command(const TrainOptions& options) {
  const TaskKind task = parse_task(options.task);
  TrainConfig config;
  if (!options.config_path.empty()) {
    const std::string text = read_text_file(options.config_path);
    // The CLI task must agree with an explicit task in the config file.
    TrainConfig from_file = TrainConfig::parse(text);
    bool file_sets_task = false;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto pos = line.find_first_not_of(" \t");
      if (pos != std::string::npos && line.compare(pos, 4, "task") == 0)
        file_sets_task = true;
    }
    if (file_sets_task && from_file.task != task)
      throw ConfigError("--task disagrees with the task in " +
                        options.config_path);
    config = from_file;
    config.task = task;
  } else {
    config = TrainConfig::defaults_for(task);
  }
  config.validate();

  Bundle bundle = load_bundle(options.data_dir, config);
  report_rejections(bundle.dataset, options.quiet);
  if (!options.quiet)
    std::cout << "training on " << bundle.dataset.train_indices.size()
              << " episodes (val " << bundle.dataset.val_indices.size()
              << ", test " << bundle.dataset.test_indices.size() << ")\n";

  TrainHooks hooks;
  if (!options.quiet) {
    hooks.on_epoch = [&](const EpochStats& stats) {
      std::cout << "epoch " << stats.epoch << "/" << config.epochs
                << "  loss " << stats.train_loss << "  val_auprc "
                << format_metric(stats.validation.auprc) << "  val_auroc "
                << format_metric(stats.validation.auroc) << "  val_macro "
                << format_metric(stats.validation.macro_auc) << "\n";
    };
  }
  TrainResult result = train(bundle.prepared, config, hooks);

  save_checkpoint(options.out_ckpt, config.to_key_value_text(), result.params);
  write_text_file(options.out_ckpt + ".history.csv",
                  history_to_csv(result.history));
  if (!options.quiet)
    std::cout << "checkpoint (best epoch " << result.best_epoch << ") -> "
              << options.out_ckpt << "\n";
}

void evaluate_command(const EvaluateOptions& options) {
  Checkpoint ckpt = load_checkpoint(options.ckpt_path);
  TrainConfig config = config_from_checkpoint(ckpt);
  Bundle bundle = load_bundle(options.data_dir, config);
  report_rejections(bundle.dataset, options.quiet);
  Model model = restore_model(ckpt, bundle.dataset.n_vitals, config);

  const SplitKind split = parse_split(options.split);
  MetricReport report =
      evaluate_model(model, bundle.prepared, bundle.dataset.split(split));
  print_report(std::string(to_string(config.task)) + " " + options.split,
               report);
  if (!options.out_csv.empty()) {
    write_text_file(options.out_csv,
                    metrics_csv_header() +
                        metrics_csv_row(to_string(config.task), options.split,
                                        config.seed, report));
  }
}

void mask_sweep_command(const MaskSweepOptions& options) {
  if (options.ratios.empty())
    throw ConfigError("mask-sweep: no ratios given");
  for (double r : options.ratios)
    if (r < 0.0 || r > 1.0)
      throw ConfigError("mask-sweep: ratios must be in [0, 1]");
  if (options.n_seeds == 0) throw ConfigError("mask-sweep: --seeds must be >= 1");

  Checkpoint ckpt = load_checkpoint(options.ckpt_path);
  TrainConfig config = config_from_checkpoint(ckpt);
  Bundle bundle = load_bundle(options.data_dir, config);
  report_rejections(bundle.dataset, options.quiet);
  Model model = restore_model(ckpt, bundle.dataset.n_vitals, config);

  std::vector<uint64_t> seeds;
  for (size_t s = 1; s <= options.n_seeds; ++s) seeds.push_back(s);
  auto rows = missing_sweep(model, bundle.prepared,
                            bundle.dataset.test_indices, options.ratios, seeds);

  std::string csv = metrics_csv_header();
  char ratio_buf[32];
  for (const SweepRow& row : rows) {
    std::snprintf(ratio_buf, sizeof(ratio_buf), "%g", row.ratio);
    if (row.error.empty()) {
      csv += metrics_csv_row(to_string(config.task), ratio_buf, row.seed,
                             row.metrics);
    } else {
      csv += metrics_csv_row(to_string(config.task), ratio_buf, row.seed, {});
      if (!options.quiet)
        std::cerr << "ratio " << row.ratio << " seed " << row.seed
                  << " failed: " << row.error << "\n";
    }
  }
  if (!options.out_csv.empty()) write_text_file(options.out_csv, csv);

  for (const SweepSummary& s : summarize_sweep(rows)) {
    std::printf("ratio %.2f  auroc %.4f +/- %.4f  auprc %.4f +/- %.4f  (%zu runs)\n",
                s.ratio, s.auroc_mean, s.auroc_std, s.auprc_mean, s.auprc_std,
                s.runs);
  }
}

void ablate_command(const AblateOptions& options) {
  TrainConfig config = options.config_path.empty()
                           ? TrainConfig::defaults_for(parse_task(options.task))
                           : TrainConfig::load(options.config_path);
  // The suite toggles the modality flags itself; the base config provides
  // everything else.
  Bundle bundle = load_bundle(options.data_dir, config);
  report_rejections(bundle.dataset, options.quiet);

  auto rows = ablation_suite(bundle.prepared, config, options.n_seeds);
  std::string csv = metrics_csv_header();
  for (const AblationRow& row : rows) {
    csv += metrics_csv_row(to_string(config.task), row.rung, row.seed,
                           row.metrics);
    if (!row.error.empty() && !options.quiet)
      std::cerr << "rung " << row.rung << " seed " << row.seed
                << " failed: " << row.error << "\n";
  }
  if (!options.out_csv.empty()) write_text_file(options.out_csv, csv);

  for (const AblationRung& rung : ablation_ladder()) {
    std::vector<double> auprcs, aurocs;
    for (const AblationRow& row : rows)
      if (row.rung == rung.name && row.error.empty()) {
        if (row.metrics.auprc) auprcs.push_back(*row.metrics.auprc);
        if (row.metrics.auroc) aurocs.push_back(*row.metrics.auroc);
      }
    auto mean_std = [](const std::vector<double>& v) {
      if (v.empty()) return std::pair<double, double>{0.0, 0.0};
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double stddev =
          v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      return std::pair<double, double>{mean, stddev};
    };
    auto [ap_mean, ap_std] = mean_std(auprcs);
    auto [ar_mean, ar_std] = mean_std(aurocs);
    std::printf("%-28s  auprc %.4f +/- %.4f  auroc %.4f +/- %.4f\n",
                rung.name.c_str(), ap_mean, ap_std, ar_mean, ar_std);
  }
}

void explain_command(const ExplainOptions& options) {
  Checkpoint ckpt = load_checkpoint(options.ckpt_path);
  TrainConfig config = config_from_checkpoint(ckpt);
  Bundle bundle = load_bundle(options.data_dir, config);
  Model model = restore_model(ckpt, bundle.dataset.n_vitals, config);

  std::string patient_id = options.episode_id;
  int episode_index = -1;  // any
  if (const auto colon = patient_id.find(':'); colon != std::string::npos) {
    episode_index = std::stoi(patient_id.substr(colon + 1));
    patient_id.resize(colon);
  }
  const PreparedEpisode* target = nullptr;
  for (size_t i = 0; i < bundle.dataset.episodes.size(); ++i) {
    const Episode& e = bundle.dataset.episodes[i];
    if (e.patient_id == patient_id &&
        (episode_index < 0 || e.episode_index == episode_index)) {
      target = &bundle.prepared.episodes[i];
      break;
    }
  }
  if (target == nullptr)
    throw DataError("episode '" + options.episode_id + "' not found");

  AttentionSummary summary = attention_report(model, *target);
  fs::create_directories(options.out_dir);

  json top = json::array();
  for (const ConceptAttention& c : summary.top_concepts) {
    json entry = {{"concept_id", c.concept_id},
                  {"mean_mass", c.mean_mass},
                  {"records_present", c.records_present}};
    if (const ConceptEntry* vocab_entry = bundle.vocabulary.find(c.concept_id))
      entry["term"] = vocab_entry->canonical_term;
    top.push_back(std::move(entry));
  }
  json summary_json = {{"episode", options.episode_id},
                       {"task", to_string(config.task)},
                       {"top_concepts", std::move(top)},
                       {"n_heatmaps", summary.heatmaps.size()}};
  write_text_file((fs::path(options.out_dir) / "attention_summary.json").string(),
                  summary_json.dump(2) + "\n");

  std::string heatmaps;
  for (const AttentionRecord& record : summary.heatmaps)
    heatmaps += record_to_json(record, &bundle.vocabulary).dump() + "\n";
  write_text_file((fs::path(options.out_dir) / "heatmaps.jsonl").string(),
                  heatmaps);

  std::string trace = "step,probability,label\n";
  char buf[64];
  for (size_t t = 0; t < summary.probability_trace.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,", t,
                  summary.probability_trace[t]);
    trace += buf;
    if (t < summary.step_labels.size())
      trace += std::to_string(summary.step_labels[t]);
    trace += '\n';
  }
  write_text_file((fs::path(options.out_dir) / "trace.csv").string(), trace);

  if (!options.quiet) {
    std::cout << "wrote attention_summary.json, heatmaps.jsonl, trace.csv to "
              << options.out_dir << "\n";
    for (const ConceptAttention& c : summary.top_concepts) {
      const ConceptEntry* entry = bundle.vocabulary.find(c.concept_id);
      std::cout << "  " << c.concept_id << "  mass "
                << format_metric(c.mean_mass) << "  "
                << (entry ? entry->canonical_term : "?") << "\n";
    }
  }
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else if (c != '\r') {
        cell.push_back(c);
      }
    }
    cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

void plot_metrics_csv(const std::vector<std::vector<std::string>>& rows,
                      const std::string& out_path) {
  // Columns: task, rung_or_ratio, seed, auprc, auroc, macro_auc, micro_auc.
  struct Group {
    std::vector<double> auprc, auroc;
  };
  std::map<double, Group> by_x;
  std::map<std::string, double> rung_order;  // categorical fallback
  bool numeric_x = true;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    if (cells.size() < 7) throw DataError("metrics csv: short row");
    double x;
    try {
      size_t used = 0;
      x = std::stod(cells[1], &used);
      if (used != cells[1].size()) numeric_x = false;
    } catch (...) {
      numeric_x = false;
    }
    if (!numeric_x) {
      if (!rung_order.count(cells[1]))
        rung_order[cells[1]] = static_cast<double>(rung_order.size());
      x = rung_order[cells[1]];
    }
    Group& g = by_x[x];
    auto push = [](std::vector<double>& v, const std::string& s) {
      if (s != "nan" && !s.empty()) v.push_back(std::stod(s));
    };
    push(g.auprc, cells[3]);
    push(g.auroc, cells[4]);
  }
  auto series_of = [&](const char* label,
                       std::vector<double> Group::*member,
                       const char* color) {
    svg::Series s;
    s.label = label;
    s.color = color;
    for (auto& [x, g] : by_x) {
      const std::vector<double>& values = g.*member;
      if (values.empty()) continue;
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      s.x.push_back(x);
      s.y.push_back(mean);
      s.y_std.push_back(values.size() > 1
                            ? std::sqrt(var / static_cast<double>(values.size() - 1))
                            : 0.0);
    }
    return s;
  };
  std::vector<svg::Series> series;
  svg::Series auroc_series = series_of("auroc", &Group::auroc, "#2ca02c");
  svg::Series auprc_series = series_of("auprc", &Group::auprc, "#1f77b4");
  if (!auroc_series.x.empty()) series.push_back(auroc_series);
  if (!auprc_series.x.empty()) series.push_back(auprc_series);
  if (series.empty()) throw DataError("metrics csv: no plottable values");
  write_text_file(out_path,
                  svg::line_chart("metrics (mean +/- std)",
                                  numeric_x ? "missing ratio" : "rung index",
                                  "score", series));
}

void plot_trace_csv(const std::vector<std::vector<std::string>>& rows,
                    const std::string& out_path) {
  svg::Series prob, label;
  prob.label = "predicted probability";
  prob.color = "#ff7f0e";
  label.label = "ground truth";
  label.color = "#1f77b4";
  label.step = true;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& cells = rows[i];
    if (cells.size() < 2) continue;
    const double step = std::stod(cells[0]);
    prob.x.push_back(step);
    prob.y.push_back(std::stod(cells[1]));
    if (cells.size() >= 3 && !cells[2].empty()) {
      label.x.push_back(step);
      label.y.push_back(std::stod(cells[2]));
    }
  }
  std::vector<svg::Series> series = {prob};
  if (!label.x.empty()) series.push_back(label);
  write_text_file(out_path, svg::line_chart("per-step prediction trace",
                                            "hour", "probability", series));
}

void plot_heatmaps_jsonl(const std::string& in_path,
                         const std::optional<size_t>& timestep,
                         const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw DataError("cannot open " + in_path);
  std::vector<AttentionRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& err) {
      throw DataError(in_path + ":" + std::to_string(line_no) + ": " +
                      err.what());
    }
  }
  if (records.empty()) throw DataError(in_path + ": no attention records");
  size_t chosen = timestep.value_or(records.back().timestep);
  std::vector<AttentionRecord> at_step;
  for (const AttentionRecord& r : records)
    if (r.timestep == chosen) at_step.push_back(r);
  if (at_step.empty())
    throw DataError("no attention records at timestep " +
                    std::to_string(chosen));
  write_text_file(out_path,
                  svg::attention_heatmaps(
                      "attention at timestep " + std::to_string(chosen),
                      at_step));
}

}  // namespace

void plot_command(const PlotOptions& options) {
  if (options.out_path.size() < 4 ||
      options.out_path.substr(options.out_path.size() - 4) != ".svg")
    throw ConfigError("plot: only .svg output is supported");

  std::ifstream probe(options.in_path);
  if (!probe) throw DataError("cannot open " + options.in_path);
  std::string first_line;
  std::getline(probe, first_line);
  probe.close();

  if (!first_line.empty() && first_line[0] == '{') {
    plot_heatmaps_jsonl(options.in_path, options.timestep, options.out_path);
  } else if (first_line.rfind("task,", 0) == 0) {
    plot_metrics_csv(read_csv(options.in_path), options.out_path);
  } else if (first_line.rfind("step,", 0) == 0) {
    plot_trace_csv(read_csv(options.in_path), options.out_path);
  } else {
    throw DataError("plot: unrecognized input format in " + options.in_path);
  }
  std::cout << "wrote " << options.out_path << "\n";
}

}  // namespace kgicu::commands
