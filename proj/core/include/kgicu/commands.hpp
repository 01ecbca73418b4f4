#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kgicu::commands {

// Implementations behind the CLI verbs. Every function throws kgicu errors
// on failure; the CLI maps ConfigError/DataError/EvalError to exit code 2
// and everything else to 1.

struct GenSynthOptions {
  std::string spec_path;  // empty -> built-in defaults
  std::string out_dir;
};
void gen_synth(const GenSynthOptions& options);

struct BuildKgOptions {
  std::string vocab_path;
  std::string edges_path;
  std::string episodes_dir;
  std::string out_path;  // JSON graph dump
  double threshold = 0.8;
  size_t embed_dim = 64;
  uint64_t embed_seed = 42;
};
void build_kg(const BuildKgOptions& options);

struct TrainOptions {
  std::string task;         // mortality|decomp|pheno
  std::string config_path;  // optional key=value file
  std::string data_dir;
  std::string out_ckpt;
  bool quiet = false;
};
// Writes the checkpoint and <out_ckpt>.history.csv.
void train_command(const TrainOptions& options);

struct EvaluateOptions {
  std::string ckpt_path;
  std::string data_dir;
  std::string split = "test";
  std::string out_csv;  // optional metrics CSV
  bool quiet = false;
};
void evaluate_command(const EvaluateOptions& options);

struct MaskSweepOptions {
  std::string ckpt_path;
  std::string data_dir;
  std::vector<double> ratios;
  size_t n_seeds = 5;
  std::string out_csv;
  bool quiet = false;
};
// Long-format CSV per (ratio, seed); the per-ratio mean +/- std table goes
// to stdout.
void mask_sweep_command(const MaskSweepOptions& options);

struct AblateOptions {
  std::string config_path;  // optional
  std::string task = "mortality";
  std::string data_dir;
  size_t n_seeds = 5;
  std::string out_csv;
  bool quiet = false;
};
void ablate_command(const AblateOptions& options);

struct ExplainOptions {
  std::string ckpt_path;
  std::string data_dir;
  std::string episode_id;  // patient_id or patient_id:episode_index
  std::string out_dir;
  bool quiet = false;
};
// Writes attention_summary.json, heatmaps.jsonl and trace.csv.
void explain_command(const ExplainOptions& options);

struct PlotOptions {
  std::string in_path;
  std::string out_path;  // must end in .svg
  std::optional<size_t> timestep;  // heatmap input only; default: last
};
void plot_command(const PlotOptions& options);

}  // namespace kgicu::commands
