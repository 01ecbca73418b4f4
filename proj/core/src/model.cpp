#include "kgicu/model.hpp"

#include "kgicu/errors.hpp"
#include "kgicu/rng.hpp"

namespace kgicu {

Model::Model(const TrainConfig& config, size_t n_vitals)
    : config_(config), n_vitals_(n_vitals) {
  config_.validate();
  if (n_vitals_ == 0) throw ContractError("model: n_vitals must be >= 1");
  vsn_edges_ = build_vsn_edges(
      n_vitals_, config_.vsn_connectivity,
      config_.vsn_groups.empty() ? nullptr : &config_.vsn_groups);
}

size_t Model::recurrent_input_dim() const {
  if (config_.use_ft) return config_.embed_dim;
  return n_vitals_ + (config_.use_text ? config_.embed_dim : 0);
}

void Model::init_params() {
  if (initialized_) throw StateError("model parameters already initialized");
  Rng rng(mix_seed(config_.seed, 0x90DE1));
  const size_t d = config_.embed_dim;
  if (config_.use_ft)
    tokenizer_ = TokenizerParams::create(params_, "tokenizer", n_vitals_, d, rng);
  if (config_.use_gnn) {
    for (size_t l = 0; l < config_.gnn_depth; ++l)
      gnn_layers_.push_back(GnnLayerParams::create(
          params_, "gnn." + std::to_string(l), config_.layer_kind, d, rng));
  }
  lstm_ = RecurrentParams::create(params_, "lstm", recurrent_input_dim(),
                                  config_.hidden_size, rng);
  head_ = HeadParams::create(params_, "head", config_.hidden_size,
                             task_output_dim(config_.task), rng);
  initialized_ = true;
}

Tensor Model::step_embedding(const PreparedEpisode& episode, size_t t,
                             const std::vector<uint8_t>& missing,
                             std::vector<AttentionRecord>* attention_sink) const {
  const Episode& src = *episode.source;
  const size_t n = n_vitals_;

  std::vector<double> x(n);
  std::vector<bool> mask(n);
  for (size_t j = 0; j < n; ++j) {
    x[j] = src.vitals[t * n + j];
    mask[j] = missing[t * n + j] != 0;
  }

  if (!config_.use_ft) {
    // Raw path: masked entries zeroed, note embedding concatenated when the
    // text modality is on.
    std::vector<double> row;
    row.reserve(recurrent_input_dim());
    for (size_t j = 0; j < n; ++j) row.push_back(mask[j] ? 0.0 : x[j]);
    if (config_.use_text) {
      const auto& text = episode.steps[t].text_embedding;
      row.insert(row.end(), text.begin(), text.end());
    }
    return Tensor::row(std::move(row));
  }

  Tensor tokens = feature_tokenize(x, mask, tokenizer_);
  Tensor text_row = config_.use_text
                        ? Tensor::row(episode.steps[t].text_embedding)
                        : Tensor::zeros(1, config_.embed_dim);
  Tensor vsn = concat_rows({tokens, text_row});

  static const KGSubgraph kEmptySubgraph{};
  const KGSubgraph& kg =
      config_.use_kg ? episode.steps[t].kg : kEmptySubgraph;
  StepGraph graph = assemble_step_graph(vsn, vsn_edges_, kg);

  Tensor node_features = graph.node_features;
  if (config_.use_gnn) {
    auto out = gnn_forward(graph, gnn_layers_, t, attention_sink != nullptr);
    node_features = out.node_features;
    if (attention_sink != nullptr)
      for (auto& record : out.attention)
        attention_sink->push_back(std::move(record));
  }
  return aggregate_nodes(node_features, config_.aggregation);
}

Model::Output Model::forward(const PreparedEpisode& episode,
                             bool collect_attention,
                             const std::vector<uint8_t>* missing_override) const {
  if (!initialized_) throw StateError("model parameters not initialized");
  const Episode& src = *episode.source;
  const std::vector<uint8_t>& missing =
      missing_override ? *missing_override : src.vitals_missing;
  if (missing.size() != src.vitals_missing.size())
    throw ShapeError("missing override does not match the episode layout");

  size_t steps = episode.length();
  if (config_.task == TaskKind::Mortality) {
    if (steps < kMortalityWindowSteps)
      throw EvalError("mortality requires >= 48 steps, episode has " +
                      std::to_string(steps));
    steps = kMortalityWindowSteps;
  }

  Output output;
  std::vector<Tensor> inputs;
  inputs.reserve(steps);
  for (size_t t = 0; t < steps; ++t)
    inputs.push_back(step_embedding(
        episode, t, missing, collect_attention ? &output.attention : nullptr));
  auto hiddens = recurrent_forward(inputs, lstm_);
  output.probs = predict(config_.task, hiddens, head_);
  return output;
}

Tensor Model::episode_loss(const Output& output, const Episode& episode) const {
  const std::vector<double> labels = loss_labels(episode);
  switch (config_.task) {
    case TaskKind::Mortality:
      return bce_loss(output.probs.at(0), labels);
    case TaskKind::Decompensation:
      return bce_loss(concat_rows(output.probs), labels);
    case TaskKind::Phenotyping:
      return bce_loss(output.probs.at(0), labels);
  }
  throw ContractError("episode_loss: unknown task");
}

std::vector<double> Model::loss_labels(const Episode& episode) const {
  switch (config_.task) {
    case TaskKind::Mortality: {
      if (!episode.labels.mortality)
        throw DataError("episode lacks a mortality label");
      return {static_cast<double>(*episode.labels.mortality)};
    }
    case TaskKind::Decompensation: {
      if (!episode.labels.decompensation)
        throw DataError("episode lacks decompensation labels");
      std::vector<double> labels(episode.labels.decompensation->begin(),
                                 episode.labels.decompensation->end());
      return labels;
    }
    case TaskKind::Phenotyping: {
      if (!episode.labels.phenotyping)
        throw DataError("episode lacks phenotyping labels");
      return std::vector<double>(episode.labels.phenotyping->begin(),
                                 episode.labels.phenotyping->end());
    }
  }
  throw ContractError("loss_labels: unknown task");
}

std::vector<double> Model::predict_probabilities(
    const PreparedEpisode& episode,
    const std::vector<uint8_t>* missing_override) const {
  NoGradGuard guard;
  Output output = forward(episode, false, missing_override);
  std::vector<double> values;
  for (const Tensor& p : output.probs)
    values.insert(values.end(), p.values().begin(), p.values().end());
  return values;
}

std::vector<uint8_t> masked_missing_bits(const Episode& episode, double ratio,
                                         uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0)
    throw ContractError("mask ratio must be in [0, 1]");
  std::vector<uint8_t> bits = episode.vitals_missing;
  if (ratio == 0.0) return bits;
  Rng rng(mix_seed(mix_seed(seed, fnv1a64(episode.patient_id)),
                   static_cast<uint64_t>(episode.episode_index)));
  for (uint8_t& bit : bits)
    if (rng.bernoulli(ratio)) bit = 1;
  return bits;
}

}  // namespace kgicu
