#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "kgicu/checkpoint.hpp"
#include "kgicu/errors.hpp"
#include "kgicu/experiments.hpp"
#include "kgicu/model.hpp"
#include "kgicu/synthetic.hpp"
#include "kgicu/train.hpp"

using namespace kgicu;

namespace {

// Small everything: quick to run, dense enough to exercise each stage.
TrainConfig tiny_config(TaskKind task) {
  TrainConfig config = TrainConfig::defaults_for(task);
  config.embed_dim = 6;
  config.hidden_size = 8;
  config.gnn_depth = 2;
  config.max_kg_nodes = 5;
  config.epochs = 2;
  config.batch_size = 4;
  return config;
}

struct Fixture {
  SyntheticData raw;
  Dataset dataset;
  PreparedData prepared;
};

Fixture make_fixture(TaskKind task, const TrainConfig& config,
                     size_t episodes = 12, uint64_t seed = 3) {
  Fixture f;
  SyntheticSpec spec;
  spec.episodes = episodes;
  spec.seed = seed;
  spec.min_hours = 48;
  spec.max_hours = 56;
  f.raw = generate_synthetic(spec);
  f.dataset = build_dataset(f.raw.episodes, task);
  f.prepared =
      prepare_data(f.dataset, f.raw.vocabulary, f.raw.ontology_edges, config);
  return f;
}

}  // namespace

TEST_CASE("config validation enforces the ablation ladder") {
  TrainConfig config = TrainConfig::defaults_for(TaskKind::Mortality);
  config.use_ft = false;
  config.use_gnn = true;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.use_gnn = false;
  config.use_kg = true;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.use_kg = false;
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("config text round-trips") {
  TrainConfig config = TrainConfig::defaults_for(TaskKind::Phenotyping);
  config.layer_kind = GnnKind::Attention;
  config.aggregation = AggregateMode::Max;
  config.seed = 99;
  TrainConfig parsed = TrainConfig::parse(config.to_key_value_text());
  CHECK(parsed.task == TaskKind::Phenotyping);
  CHECK(parsed.epochs == 40);
  CHECK(parsed.layer_kind == GnnKind::Attention);
  CHECK(parsed.aggregation == AggregateMode::Max);
  CHECK(parsed.seed == 99);
  CHECK_THROWS_AS(TrainConfig::parse("nonsense = 1\n"), ConfigError);
}

TEST_CASE("model forward emits task-shaped probabilities") {
  auto config = tiny_config(TaskKind::Decompensation);
  auto f = make_fixture(TaskKind::Decompensation, config);
  Model model(config, f.dataset.n_vitals);
  model.init_params();
  const PreparedEpisode& episode = f.prepared.episodes[0];
  auto probs = model.predict_probabilities(episode);
  CHECK(probs.size() == episode.length());
  for (double p : probs) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("full composed model passes the gradient check on 3 steps") {
  auto config = tiny_config(TaskKind::Decompensation);
  config.embed_dim = 4;
  config.hidden_size = 5;
  auto f = make_fixture(TaskKind::Decompensation, config, 6);

  // Trim one prepared episode to three steps.
  Episode short_episode = *f.prepared.episodes[0].source;
  short_episode.n_steps = 3;
  short_episode.vitals.resize(3 * short_episode.n_vitals);
  short_episode.vitals_missing.resize(3 * short_episode.n_vitals);
  short_episode.labels.decompensation = std::vector<int>{0, 1, 1};
  PreparedEpisode prep;
  prep.source = &short_episode;
  prep.steps.assign(f.prepared.episodes[0].steps.begin(),
                    f.prepared.episodes[0].steps.begin() + 3);

  Model model(config, f.dataset.n_vitals);
  model.init_params();
  auto loss_fn = [&](ParameterSet&) {
    Model::Output out = model.forward(prep);
    return model.episode_loss(out, short_episode);
  };
  CHECK(grad_check(loss_fn, model.params(), 1e-5) < 1e-4);
}

TEST_CASE("checkpoints restore predictions bit-exactly") {
  auto config = tiny_config(TaskKind::Mortality);
  auto f = make_fixture(TaskKind::Mortality, config);
  Model model(config, f.dataset.n_vitals);
  model.init_params();
  const auto before = model.predict_probabilities(f.prepared.episodes[0]);

  const std::string path = "test_ckpt.bin";
  save_checkpoint(path, config.to_key_value_text(), model.params());
  Checkpoint loaded = load_checkpoint(path);
  TrainConfig restored_config = TrainConfig::parse(loaded.config_text);
  Model restored(restored_config, f.dataset.n_vitals);
  restored.init_params();
  restored.params().load_values(loaded.params);
  const auto after = restored.predict_probabilities(f.prepared.episodes[0]);
  REQUIRE(before.size() == after.size());
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(before[i] == after[i]);  // bit-identical
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects foreign files") {
  const std::string path = "test_not_ckpt.bin";
  {
    std::ofstream out(path);
    out << "hello";
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("masking: ratio 0 is the identity, ratio 1 masks everything") {
  auto config = tiny_config(TaskKind::Mortality);
  auto f = make_fixture(TaskKind::Mortality, config);
  Dataset same = mask_vitals(f.dataset, 0.0, 5);
  for (size_t i = 0; i < same.episodes.size(); ++i)
    CHECK(same.episodes[i].vitals_missing ==
          f.dataset.episodes[i].vitals_missing);
  Dataset all = mask_vitals(f.dataset, 1.0, 5);
  for (const Episode& e : all.episodes)
    for (uint8_t bit : e.vitals_missing) CHECK(bit == 1);
}

TEST_CASE("masking leaves notes and labels bit-identical") {
  auto config = tiny_config(TaskKind::Mortality);
  auto f = make_fixture(TaskKind::Mortality, config);
  Dataset masked = mask_vitals(f.dataset, 0.5, 7);
  for (size_t i = 0; i < masked.episodes.size(); ++i) {
    const Episode& a = f.dataset.episodes[i];
    const Episode& b = masked.episodes[i];
    CHECK(a.vitals == b.vitals);  // values untouched, only the mask changes
    REQUIRE(a.notes.size() == b.notes.size());
    for (size_t j = 0; j < a.notes.size(); ++j)
      CHECK(a.notes[j].text == b.notes[j].text);
    CHECK(a.labels.mortality == b.labels.mortality);
  }
  // Original unmodified: masked fraction differs.
  size_t before = 0, after = 0;
  for (size_t i = 0; i < masked.episodes.size(); ++i) {
    for (uint8_t bit : f.dataset.episodes[i].vitals_missing) before += bit;
    for (uint8_t bit : masked.episodes[i].vitals_missing) after += bit;
  }
  CHECK(after > before);
}

TEST_CASE("masked fraction concentrates around the ratio") {
  Episode e;
  e.patient_id = "P9";
  e.n_steps = 1000;
  e.n_vitals = 10;
  e.vitals.assign(10000, 0.0);
  e.vitals_missing.assign(10000, 0);
  auto bits = masked_missing_bits(e, 0.5, 11);
  size_t masked = 0;
  for (uint8_t bit : bits) masked += bit;
  const double fraction = static_cast<double>(masked) / 10000.0;
  CHECK(fraction > 0.48);
  CHECK(fraction < 0.52);
}

TEST_CASE("mask override changes model inputs only through the mask") {
  auto config = tiny_config(TaskKind::Mortality);
  auto f = make_fixture(TaskKind::Mortality, config);
  Model model(config, f.dataset.n_vitals);
  model.init_params();
  const PreparedEpisode& ep = f.prepared.episodes[0];
  auto base = model.predict_probabilities(ep);
  auto bits = masked_missing_bits(*ep.source, 1.0, 3);
  auto masked = model.predict_probabilities(ep, &bits);
  CHECK(base != masked);

  // Dataset-level masking and the override produce identical bits.
  Dataset md = mask_vitals(f.dataset, 0.7, 123);
  for (size_t i = 0; i < md.episodes.size(); ++i)
    CHECK(md.episodes[i].vitals_missing ==
          masked_missing_bits(f.dataset.episodes[i], 0.7, 123));
}

TEST_CASE("attention report demands the attention layer kind") {
  auto config = tiny_config(TaskKind::Decompensation);
  config.layer_kind = GnnKind::SampleAggregate;
  auto f = make_fixture(TaskKind::Decompensation, config);
  Model model(config, f.dataset.n_vitals);
  model.init_params();
  CHECK_THROWS_AS(attention_report(model, f.prepared.episodes[0]), EvalError);
}

TEST_CASE("attention report emits trace, heatmaps and ranked concepts") {
  auto config = tiny_config(TaskKind::Decompensation);
  config.layer_kind = GnnKind::Attention;
  auto f = make_fixture(TaskKind::Decompensation, config);
  Model model(config, f.dataset.n_vitals);
  model.init_params();

  // Find an episode whose notes matched at least one concept.
  const PreparedEpisode* with_kg = nullptr;
  for (const auto& ep : f.prepared.episodes)
    for (const auto& step : ep.steps)
      if (!step.kg.empty() && with_kg == nullptr) with_kg = &ep;
  REQUIRE(with_kg != nullptr);

  AttentionSummary summary = attention_report(model, *with_kg);
  CHECK(summary.probability_trace.size() == with_kg->length());
  CHECK(summary.step_labels.size() == with_kg->length());
  CHECK(!summary.heatmaps.empty());
  CHECK(!summary.top_concepts.empty());
  CHECK(summary.top_concepts.size() <= 10);
  for (size_t i = 1; i < summary.top_concepts.size(); ++i)
    CHECK(summary.top_concepts[i - 1].mean_mass >=
          summary.top_concepts[i].mean_mass);
  // Heatmap rows sum to one.
  for (const AttentionRecord& record : summary.heatmaps) {
    for (size_t u = 0; u < record.n; ++u) {
      double row = 0.0;
      for (size_t v = 0; v < record.n; ++v) row += record.at(u, v);
      CHECK(row == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("episodes with no concepts still produce a trace") {
  auto config = tiny_config(TaskKind::Decompensation);
  config.layer_kind = GnnKind::Attention;
  config.use_kg = true;
  auto f = make_fixture(TaskKind::Decompensation, config);
  // Fake an episode by clearing its subgraphs.
  PreparedEpisode stripped = f.prepared.episodes[0];
  for (auto& step : stripped.steps) step.kg = KGSubgraph{};
  Model model(config, f.dataset.n_vitals);
  model.init_params();
  AttentionSummary summary = attention_report(model, stripped);
  CHECK(summary.top_concepts.empty());
  CHECK(summary.probability_trace.size() == stripped.length());
}
