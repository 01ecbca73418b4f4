#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kgicu/train.hpp"

namespace kgicu {

// Copy of the dataset with each (timestep, channel) vital entry
// independently marked missing with probability `ratio`. Notes, concepts
// and labels are untouched; the input dataset is not modified.
Dataset mask_vitals(const Dataset& dataset, double ratio, uint64_t seed);

struct SweepRow {
  double ratio = 0.0;
  uint64_t seed = 0;
  MetricReport metrics;
  std::string error;  // nonempty when the metrics could not be computed
};

struct SweepSummary {
  double ratio = 0.0;
  double auroc_mean = 0.0, auroc_std = 0.0;
  double auprc_mean = 0.0, auprc_std = 0.0;
  size_t runs = 0;
};

// Evaluates the frozen model on the test split at every (ratio, seed)
// combination. Metric failures are recorded per row; the sweep continues.
std::vector<SweepRow> missing_sweep(const Model& model,
                                    const PreparedData& prepared,
                                    const std::vector<size_t>& test_indices,
                                    const std::vector<double>& ratios,
                                    const std::vector<uint64_t>& seeds);

std::vector<SweepSummary> summarize_sweep(const std::vector<SweepRow>& rows);

// The component ladder: seven rungs from plain recurrence on raw vitals to
// the full knowledge-enhanced model.
struct AblationRung {
  std::string name;
  bool use_ft = false, use_gnn = false, use_text = false, use_kg = false;
};

const std::vector<AblationRung>& ablation_ladder();

struct AblationRow {
  std::string rung;
  uint64_t seed = 0;
  MetricReport metrics;  // test-split metrics of the selected checkpoint
  std::string error;
};

// Trains and evaluates every rung with shared seeds (base_config.seed + i
// for i in [0, n_seeds)). Per-rung failures are recorded and the suite
// continues.
std::vector<AblationRow> ablation_suite(const PreparedData& prepared,
                                        const TrainConfig& base_config,
                                        size_t n_seeds = 5);

// Long-format CSV shared by evaluate / mask-sweep / ablate outputs:
// task, rung_or_ratio, seed, auprc, auroc, macro_auc, micro_auc.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& task,
                            const std::string& rung_or_ratio, uint64_t seed,
                            const MetricReport& metrics);

// Interpretability report for one episode under an attention-kind model.
struct ConceptAttention {
  std::string concept_id;
  std::string term;
  double mean_mass = 0.0;   // mean column attention mass where present
  size_t records_present = 0;
};

struct AttentionSummary {
  std::vector<ConceptAttention> top_concepts;  // sorted descending, k <= 10
  std::vector<AttentionRecord> heatmaps;       // one per (timestep, layer)
  std::vector<double> probability_trace;       // per-step probe of the head
  std::vector<int> step_labels;                // aligned labels (may be empty)
};

// Runs the model over the episode collecting attention records. Requires
// the attention layer kind. The per-concept score is the column sum of
// attention mass received by the concept's node, averaged over the
// (timestep, layer) records where the node is present.
AttentionSummary attention_report(const Model& model,
                                  const PreparedEpisode& episode,
                                  size_t top_k = 10);

}  // namespace kgicu
