#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kgicu/concept_match.hpp"
#include "kgicu/config.hpp"
#include "kgicu/dataset.hpp"
#include "kgicu/kg.hpp"
#include "kgicu/text_encoder.hpp"

namespace kgicu {

// Everything about one timestep that stays constant across epochs: the note
// text embedding and the queried knowledge subgraph.
struct PreparedStep {
  std::vector<double> text_embedding;  // dim d, zero when no notes
  KGSubgraph kg;
};

struct PreparedEpisode {
  const Episode* source = nullptr;  // owned by the dataset
  std::vector<PreparedStep> steps;  // one per hour

  size_t length() const { return steps.size(); }
};

// Dataset bound to a knowledge graph and encoders at a fixed embedding
// dimension. Per-step concept extraction and subgraph queries run once
// here, not per epoch.
struct PreparedData {
  const Dataset* dataset = nullptr;
  GlobalKnowledgeGraph kg;
  std::vector<PreparedEpisode> episodes;  // aligned with dataset->episodes
};

// Extracts per-step concepts across the whole dataset, builds the global
// graph from the union and the ontology edge file, and precomputes text
// embeddings and subgraphs per (episode, step).
PreparedData prepare_data(const Dataset& dataset, const Vocabulary& vocab,
                          const ConceptEdgeSet& ontology_edges,
                          const TrainConfig& config,
                          const TextEncoder& text_encoder,
                          const EmbeddingProvider& embed_provider);

// Convenience: hashing text encoder + seeded embeddings per the config.
PreparedData prepare_data(const Dataset& dataset, const Vocabulary& vocab,
                          const ConceptEdgeSet& ontology_edges,
                          const TrainConfig& config);

}  // namespace kgicu
