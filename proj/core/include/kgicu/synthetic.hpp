#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgicu/episode.hpp"
#include "kgicu/kg.hpp"
#include "kgicu/vocab.hpp"

namespace kgicu {

// Desk-scale generator with a planted cross-modal signal. A latent per-stay
// risk state drives, jointly: an upward drift on the first two vital
// channels from a random onset hour, note mentions of a designated risk
// concept (canonical term or synonyms), and the labels. The redundancy
// across modalities is what makes the masking and ablation experiments
// informative. `noise` corrupts observations (vitals entries and planned
// mentions); labels always follow the latent state, so at noise 0 they are
// an exact function of the emitted notes.
struct SyntheticSpec {
  size_t episodes = 200;
  size_t n_vitals = 6;
  size_t min_hours = 48;
  size_t max_hours = 72;
  size_t vocab_size = 40;
  double noise = 0.05;
  uint64_t seed = 1;

  // Planted-rule knobs.
  double risk_rate = 0.35;        // P(latent risk state)
  double drift = 1.5;             // vital shift on risk channels after onset
  double note_period = 6.0;       // expected hours between notes
  double mention_prob = 0.9;      // P(post-onset note mentions the concept)
  double synonym_prob = 0.5;      // P(mention uses a synonym)
  double distractor_prob = 0.3;   // P(note mentions a background concept)
  double phenotype_rate = 0.12;   // P(each phenotype concept is active)
  double native_missing = 0.05;   // baseline vitals missingness
  double discharge_note_prob = 0.3;
  double no_time_prob = 0.15;     // P(a filler note lacks its chart time)

  void validate() const;
  static SyntheticSpec parse(const std::string& text);  // key = value lines
  static SyntheticSpec load(const std::string& path);
  std::string to_key_value_text() const;
};

struct SyntheticData {
  std::vector<Episode> episodes;
  Vocabulary vocabulary;
  ConceptEdgeSet ontology_edges;
  std::string risk_concept_id;  // the concept driving the planted labels
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Writes episodes.jsonl, vocab.tsv and edges.tsv into the directory.
void write_synthetic(const SyntheticData& data, const std::string& out_dir);

}  // namespace kgicu
