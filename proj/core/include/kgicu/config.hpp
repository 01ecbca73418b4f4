#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "kgicu/gnn.hpp"
#include "kgicu/sequence.hpp"

namespace kgicu {

GnnKind parse_gnn_kind(const std::string& name);
AggregateMode parse_aggregate_mode(const std::string& name);
TaskKind parse_task(const std::string& name);

// Training-run configuration. Defaults follow the tuned values: embedding
// dimension 64, 2-layer GraphSAGE, 30 KG nodes, sum aggregation, LSTM
// hidden size 100, Adam at 1e-4; 20 epochs for the hourly tasks and 40 for
// phenotyping. The ablation flags must form a valid rung: use_kg requires
// use_gnn, and use_gnn requires use_ft.
struct TrainConfig {
  TaskKind task = TaskKind::Mortality;
  size_t batch_size = 8;
  size_t epochs = 20;
  double learning_rate = 1e-4;
  size_t gnn_depth = 2;
  GnnKind layer_kind = GnnKind::SampleAggregate;
  AggregateMode aggregation = AggregateMode::Sum;
  size_t max_kg_nodes = 30;
  bool use_ft = true;
  bool use_gnn = true;
  bool use_text = true;
  bool use_kg = true;
  uint64_t seed = 1;

  size_t embed_dim = 64;    // d
  size_t hidden_size = 100; // LSTM h
  double extraction_threshold = 0.8;
  uint64_t embed_seed = 42;
  VsnConnectivity vsn_connectivity = VsnConnectivity::Full;
  std::map<int, int> vsn_groups;  // grouped connectivity only

  static TrainConfig defaults_for(TaskKind task);
  void validate() const;

  // Plain key = value text; the checkpoint echoes this block.
  std::string to_key_value_text() const;
  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::string& path);
};

}  // namespace kgicu
