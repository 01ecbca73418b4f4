#include "kgicu/pipeline.hpp"

#include "kgicu/errors.hpp"

namespace kgicu {

PreparedData prepare_data(const Dataset& dataset, const Vocabulary& vocab,
                          const ConceptEdgeSet& ontology_edges,
                          const TrainConfig& config,
                          const TextEncoder& text_encoder,
                          const EmbeddingProvider& embed_provider) {
  config.validate();
  PreparedData prepared;
  prepared.dataset = &dataset;

  ConceptMatcher matcher(vocab, config.extraction_threshold);

  // Pass 1: per-(episode, step) concept counts; their union defines the
  // global graph's node set.
  std::vector<std::vector<std::map<std::string, int>>> step_counts;
  step_counts.reserve(dataset.episodes.size());
  std::vector<std::set<std::string>> all_concept_sets;
  for (const Episode& episode : dataset.episodes) {
    std::vector<std::map<std::string, int>> per_step(episode.n_steps);
    for (const auto& [step, notes] : episode.notes_by_step) {
      if (step < 0 || step >= static_cast<int>(episode.n_steps)) continue;
      per_step[static_cast<size_t>(step)] =
          matcher.extract_counts(episode.note_texts_at(step));
      std::set<std::string> ids;
      for (const auto& [id, count] : per_step[static_cast<size_t>(step)])
        ids.insert(id);
      if (!ids.empty()) all_concept_sets.push_back(std::move(ids));
    }
    step_counts.push_back(std::move(per_step));
  }

  prepared.kg =
      build_global_kg(all_concept_sets, ontology_edges, embed_provider);

  // Pass 2: constants per step.
  for (size_t ei = 0; ei < dataset.episodes.size(); ++ei) {
    const Episode& episode = dataset.episodes[ei];
    PreparedEpisode prep;
    prep.source = &episode;
    prep.steps.resize(episode.n_steps);
    for (size_t t = 0; t < episode.n_steps; ++t) {
      PreparedStep& step = prep.steps[t];
      const auto texts = episode.note_texts_at(static_cast<int>(t));
      step.text_embedding = text_encoder.encode(texts, config.embed_dim);
      const auto& counts = step_counts[ei][t];
      if (!counts.empty()) {
        std::set<std::string> ids;
        for (const auto& [id, count] : counts) ids.insert(id);
        step.kg = query_subgraph(prepared.kg, ids, counts, config.max_kg_nodes);
      } else {
        step.kg.dim = prepared.kg.embedding_dim;
      }
    }
    prepared.episodes.push_back(std::move(prep));
  }
  return prepared;
}

PreparedData prepare_data(const Dataset& dataset, const Vocabulary& vocab,
                          const ConceptEdgeSet& ontology_edges,
                          const TrainConfig& config) {
  HashingTextEncoder text_encoder;
  SeededEmbeddingProvider embed_provider(config.embed_dim, config.embed_seed);
  return prepare_data(dataset, vocab, ontology_edges, config, text_encoder,
                      embed_provider);
}

}  // namespace kgicu
