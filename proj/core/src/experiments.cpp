#include "kgicu/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "kgicu/errors.hpp"

namespace kgicu {

Dataset mask_vitals(const Dataset& dataset, double ratio, uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0)
    throw ContractError("mask_vitals: ratio must be in [0, 1]");
  Dataset masked = dataset;
  for (Episode& episode : masked.episodes)
    episode.vitals_missing = masked_missing_bits(episode, ratio, seed);
  return masked;
}

std::vector<SweepRow> missing_sweep(const Model& model,
                                    const PreparedData& prepared,
                                    const std::vector<size_t>& test_indices,
                                    const std::vector<double>& ratios,
                                    const std::vector<uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    for (uint64_t seed : seeds) {
      SweepRow row;
      row.ratio = ratio;
      row.seed = seed;
      try {
        row.metrics =
            evaluate_model(model, prepared, test_indices, ratio, seed);
      } catch (const Error& err) {
        row.error = err.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::map<double, std::vector<const SweepRow*>> by_ratio;
  for (const SweepRow& row : rows)
    if (row.error.empty()) by_ratio[row.ratio].push_back(&row);
  std::vector<SweepSummary> summaries;
  for (const auto& [ratio, group] : by_ratio) {
    SweepSummary s;
    s.ratio = ratio;
    s.runs = group.size();
    auto stats = [&](auto getter, double& mean, double& stddev) {
      double sum = 0.0;
      for (const SweepRow* row : group) sum += getter(*row);
      mean = sum / static_cast<double>(group.size());
      double var = 0.0;
      for (const SweepRow* row : group) {
        const double d = getter(*row) - mean;
        var += d * d;
      }
      stddev = group.size() > 1
                   ? std::sqrt(var / static_cast<double>(group.size() - 1))
                   : 0.0;
    };
    stats([](const SweepRow& r) { return r.metrics.auroc.value_or(0.0); },
          s.auroc_mean, s.auroc_std);
    stats([](const SweepRow& r) { return r.metrics.auprc.value_or(0.0); },
          s.auprc_mean, s.auprc_std);
    summaries.push_back(s);
  }
  return summaries;
}

const std::vector<AblationRung>& ablation_ladder() {
  static const std::vector<AblationRung> ladder = {
      {"lstm_vitals", false, false, false, false},
      {"lstm_ft_vitals", true, false, false, false},
      {"lstm_ft_gnn_vitals", true, true, false, false},
      {"lstm_vitals_text", false, false, true, false},
      {"lstm_ft_vitals_text", true, false, true, false},
      {"lstm_ft_gnn_vitals_text", true, true, true, false},
      {"lstm_ft_gnn_vitals_text_kg", true, true, true, true},
  };
  return ladder;
}

std::vector<AblationRow> ablation_suite(const PreparedData& prepared,
                                        const TrainConfig& base_config,
                                        size_t n_seeds) {
  std::vector<AblationRow> rows;
  for (const AblationRung& rung : ablation_ladder()) {
    for (size_t s = 0; s < n_seeds; ++s) {
      AblationRow row;
      row.rung = rung.name;
      row.seed = base_config.seed + s;
      try {
        TrainConfig config = base_config;
        config.use_ft = rung.use_ft;
        config.use_gnn = rung.use_gnn;
        config.use_text = rung.use_text;
        config.use_kg = rung.use_kg;
        if (!rung.use_gnn) config.gnn_depth = 0;
        config.seed = row.seed;
        config.validate();
        TrainResult trained = train(prepared, config);
        Model model(config, prepared.dataset->n_vitals);
        model.init_params();
        model.params().load_values(trained.params);
        row.metrics = evaluate_model(model, prepared,
                                     prepared.dataset->test_indices);
      } catch (const Error& err) {
        row.error = err.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string metrics_csv_header() {
  return "task,rung_or_ratio,seed,auprc,auroc,macro_auc,micro_auc\n";
}

std::string metrics_csv_row(const std::string& task,
                            const std::string& rung_or_ratio, uint64_t seed,
                            const MetricReport& metrics) {
  char buffer[64];
  auto cell = [&](const std::optional<double>& v) -> std::string {
    if (!v) return "nan";
    std::snprintf(buffer, sizeof(buffer), "%.17g", *v);
    return buffer;
  };
  std::string row = task + ',' + rung_or_ratio + ',';
  std::snprintf(buffer, sizeof(buffer), "%llu",
                static_cast<unsigned long long>(seed));
  row += buffer;
  row += ',' + cell(metrics.auprc) + ',' + cell(metrics.auroc) + ',' +
         cell(metrics.macro_auc) + ',' + cell(metrics.micro_auc) + '\n';
  return row;
}

AttentionSummary attention_report(const Model& model,
                                  const PreparedEpisode& episode,
                                  size_t top_k) {
  if (model.config().layer_kind != GnnKind::Attention || !model.config().use_gnn)
    throw EvalError(
        "attention report requires layer_kind = attention; re-run with an "
        "attention-kind model");

  AttentionSummary summary;
  NoGradGuard guard;
  Model::Output output = model.forward(episode, /*collect_attention=*/true);
  summary.heatmaps = std::move(output.attention);

  // Per-step probability probe from the trained head. Decompensation
  // already emits one probability per step; for the other binary task the
  // probe applies the head at every hidden state.
  if (model.config().task == TaskKind::Decompensation) {
    for (const Tensor& p : output.probs)
      summary.probability_trace.push_back(p.item());
    if (episode.source->labels.decompensation)
      summary.step_labels = *episode.source->labels.decompensation;
  } else if (model.config().task == TaskKind::Mortality) {
    // Re-run as an online probe over the full stay.
    TrainConfig probe_config = model.config();
    probe_config.task = TaskKind::Decompensation;
    Model probe(probe_config, model.n_vitals());
    probe.init_params();
    probe.params().load_values(model.params());
    Model::Output probe_out = probe.forward(episode);
    for (const Tensor& p : probe_out.probs)
      summary.probability_trace.push_back(p.item());
    if (episode.source->labels.mortality)
      summary.step_labels.assign(summary.probability_trace.size(),
                                 *episode.source->labels.mortality);
  }

  // Mean attention mass received per concept across the records where the
  // concept's node exists.
  std::map<std::string, std::pair<double, size_t>> mass;  // id -> (sum, count)
  for (const AttentionRecord& record : summary.heatmaps) {
    for (size_t v = 0; v < record.n; ++v) {
      if (record.roles[v].kind != NodeRole::Kind::Kg) continue;
      double column = 0.0;
      for (size_t u = 0; u < record.n; ++u) column += record.at(u, v);
      auto& entry = mass[record.roles[v].concept_id];
      entry.first += column;
      entry.second += 1;
    }
  }
  for (const auto& [id, entry] : mass) {
    ConceptAttention c;
    c.concept_id = id;
    c.mean_mass = entry.first / static_cast<double>(entry.second);
    c.records_present = entry.second;
    summary.top_concepts.push_back(std::move(c));
  }
  std::sort(summary.top_concepts.begin(), summary.top_concepts.end(),
            [](const ConceptAttention& a, const ConceptAttention& b) {
              if (a.mean_mass != b.mean_mass) return a.mean_mass > b.mean_mass;
              return a.concept_id < b.concept_id;
            });
  if (summary.top_concepts.size() > top_k)
    summary.top_concepts.resize(top_k);
  return summary;
}

}  // namespace kgicu
