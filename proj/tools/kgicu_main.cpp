#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kgicu/commands.hpp"
#include "kgicu/errors.hpp"

namespace {

std::vector<double> parse_ratio_list(const std::string& csv) {
  std::vector<double> ratios;
  std::stringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (cell.empty()) continue;
    ratios.push_back(std::stod(cell));
  }
  return ratios;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-enhanced multi-modal ICU prediction pipeline"};
  app.require_subcommand(1);

  using namespace kgicu::commands;

  GenSynthOptions gen_options;
  auto* gen = app.add_subcommand("gen-synth",
                                 "generate a synthetic dataset with a "
                                 "planted cross-modal signal");
  gen->add_option("--spec", gen_options.spec_path,
                  "key=value spec file (defaults when omitted)");
  gen->add_option("--out", gen_options.out_dir, "output directory")
      ->required();

  BuildKgOptions kg_options;
  auto* kg = app.add_subcommand(
      "build-kg", "build the global knowledge graph from a dataset");
  kg->add_option("--vocab", kg_options.vocab_path, "vocabulary TSV")->required();
  kg->add_option("--edges", kg_options.edges_path, "ontology edge TSV")
      ->required();
  kg->add_option("--episodes", kg_options.episodes_dir,
                 "directory containing episodes.jsonl")
      ->required();
  kg->add_option("--out", kg_options.out_path, "output JSON file")->required();
  kg->add_option("--threshold", kg_options.threshold,
                 "concept matching threshold (default 0.8)");
  kg->add_option("--dim", kg_options.embed_dim,
                 "node embedding dimension (default 64)");
  kg->add_option("--embed-seed", kg_options.embed_seed,
                 "node embedding seed (default 42)");

  TrainOptions train_options;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--task", train_options.task, "mortality|decomp|pheno")
      ->required();
  train->add_option("--config", train_options.config_path,
                    "key=value config file");
  train->add_option("--data", train_options.data_dir, "dataset directory")
      ->required();
  train->add_option("--out", train_options.out_ckpt, "checkpoint path")
      ->required();
  train->add_flag("--quiet", train_options.quiet, "suppress progress output");

  EvaluateOptions eval_options;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint");
  evaluate->add_option("--ckpt", eval_options.ckpt_path, "checkpoint path")
      ->required();
  evaluate->add_option("--data", eval_options.data_dir, "dataset directory")
      ->required();
  evaluate->add_option("--split", eval_options.split,
                       "train|val|test (default test)");
  evaluate->add_option("--out", eval_options.out_csv, "metrics CSV path");
  evaluate->add_flag("--quiet", eval_options.quiet, "suppress extra output");

  MaskSweepOptions sweep_options;
  std::string ratio_csv = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  auto* sweep = app.add_subcommand(
      "mask-sweep", "evaluate under random vital-sign masking");
  sweep->add_option("--ckpt", sweep_options.ckpt_path, "checkpoint path")
      ->required();
  sweep->add_option("--data", sweep_options.data_dir, "dataset directory")
      ->required();
  sweep->add_option("--ratios", ratio_csv,
                    "comma-separated missing ratios (default 0..0.9)");
  sweep->add_option("--seeds", sweep_options.n_seeds,
                    "number of mask seeds per ratio (default 5)");
  sweep->add_option("--out", sweep_options.out_csv, "long-format CSV path");
  sweep->add_flag("--quiet", sweep_options.quiet, "suppress extra output");

  AblateOptions ablate_options;
  auto* ablate = app.add_subcommand(
      "ablate", "train and evaluate the component ladder");
  ablate->add_option("--config", ablate_options.config_path,
                     "base key=value config file");
  ablate->add_option("--task", ablate_options.task,
                     "task when no config is given (default mortality)");
  ablate->add_option("--data", ablate_options.data_dir, "dataset directory")
      ->required();
  ablate->add_option("--seeds", ablate_options.n_seeds,
                     "seeds per rung (default 5)");
  ablate->add_option("--out", ablate_options.out_csv, "long-format CSV path");
  ablate->add_flag("--quiet", ablate_options.quiet, "suppress extra output");

  ExplainOptions explain_options;
  auto* explain = app.add_subcommand(
      "explain", "attention report and probability trace for one episode");
  explain->add_option("--ckpt", explain_options.ckpt_path, "checkpoint path")
      ->required();
  explain->add_option("--data", explain_options.data_dir, "dataset directory")
      ->required();
  explain->add_option("--episode", explain_options.episode_id,
                      "patient_id or patient_id:episode_index")
      ->required();
  explain->add_option("--out", explain_options.out_dir, "output directory")
      ->required();
  explain->add_flag("--quiet", explain_options.quiet, "suppress extra output");

  PlotOptions plot_options;
  size_t plot_timestep = 0;
  auto* plot = app.add_subcommand(
      "plot", "render sweep/trace CSVs or attention heatmaps as SVG");
  plot->add_option("--in", plot_options.in_path, "input file")->required();
  plot->add_option("--out", plot_options.out_path, "output .svg path")
      ->required();
  auto* ts_opt = plot->add_option("--timestep", plot_timestep,
                                  "heatmap timestep (default: last)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) gen_synth(gen_options);
    if (kg->parsed()) build_kg(kg_options);
    if (train->parsed()) train_command(train_options);
    if (evaluate->parsed()) evaluate_command(eval_options);
    if (sweep->parsed()) {
      sweep_options.ratios = parse_ratio_list(ratio_csv);
      mask_sweep_command(sweep_options);
    }
    if (ablate->parsed()) ablate_command(ablate_options);
    if (explain->parsed()) explain_command(explain_options);
    if (plot->parsed()) {
      if (ts_opt->count() > 0) plot_options.timestep = plot_timestep;
      plot_command(plot_options);
    }
  } catch (const kgicu::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const kgicu::DataError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const kgicu::EvalError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
