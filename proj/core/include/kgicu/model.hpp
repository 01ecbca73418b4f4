#pragma once

#include <vector>

#include "kgicu/config.hpp"
#include "kgicu/gnn.hpp"
#include "kgicu/losses.hpp"
#include "kgicu/pipeline.hpp"
#include "kgicu/sequence.hpp"
#include "kgicu/tokenizer.hpp"

namespace kgicu {

// The composed predictor: feature tokenizer -> per-step dynamic graph ->
// message passing -> aggregation -> recurrent cell -> task head. The
// ablation flags bypass stages: without use_ft the recurrent input is the
// raw vitals (masked entries as zero), optionally concatenated with the
// note embedding; without use_gnn the graph stage is the identity; without
// use_text the text node is the zero vector; without use_kg no subgraph is
// spliced in.
class Model {
 public:
  Model(const TrainConfig& config, size_t n_vitals);

  // Registers and initializes all parameters from config.seed.
  void init_params();

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const TrainConfig& config() const { return config_; }
  size_t n_vitals() const { return n_vitals_; }
  size_t recurrent_input_dim() const;

  struct Output {
    std::vector<Tensor> probs;  // see predict() for per-task shapes
    std::vector<AttentionRecord> attention;
  };

  // Full differentiable forward over one prepared episode. The missing
  // override, when given, replaces the episode's missing mask (same
  // layout); evaluation-time masking uses it.
  Output forward(const PreparedEpisode& episode, bool collect_attention = false,
                 const std::vector<uint8_t>* missing_override = nullptr) const;

  // Task loss for one episode's outputs.
  Tensor episode_loss(const Output& output, const Episode& episode) const;

  // Probability values without tape recording.
  std::vector<double> predict_probabilities(
      const PreparedEpisode& episode,
      const std::vector<uint8_t>* missing_override = nullptr) const;

  // 0/1 labels matching predict_probabilities' layout.
  std::vector<double> loss_labels(const Episode& episode) const;

 private:
  Tensor step_embedding(const PreparedEpisode& episode, size_t t,
                        const std::vector<uint8_t>& missing,
                        std::vector<AttentionRecord>* attention_sink) const;

  TrainConfig config_;
  size_t n_vitals_ = 0;
  ParameterSet params_;
  std::vector<std::pair<size_t, size_t>> vsn_edges_;
  TokenizerParams tokenizer_;
  std::vector<GnnLayerParams> gnn_layers_;
  RecurrentParams lstm_;
  HeadParams head_;
  bool initialized_ = false;
};

// Fresh missing-mask bits for one episode: every (timestep, channel) entry
// is independently masked with probability `ratio`, on top of the entries
// already missing. Seeded per episode so results do not depend on
// evaluation order.
std::vector<uint8_t> masked_missing_bits(const Episode& episode, double ratio,
                                         uint64_t seed);

}  // namespace kgicu
