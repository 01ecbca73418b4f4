#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace kgicu {

// One ontology concept: a CUI-like id, a canonical surface form, synonyms
// and a coarse semantic group. All terms are lowercase-normalized.
struct ConceptEntry {
  std::string concept_id;
  std::string canonical_term;
  std::vector<std::string> synonyms;
  std::string semantic_group;
};

// Lowercases, replaces punctuation with spaces and collapses whitespace.
std::string normalize_term(const std::string& raw);

class Vocabulary {
 public:
  static Vocabulary from_entries(std::vector<ConceptEntry> entries);
  // TSV with a header row: concept_id, canonical_term, pipe-separated
  // synonyms, semantic_group.
  static Vocabulary load_tsv(const std::string& path);
  void write_tsv(const std::string& path) const;

  const std::vector<ConceptEntry>& entries() const { return entries_; }
  const ConceptEntry* find(const std::string& concept_id) const;
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Longest term length in words; bounds the n-gram window during matching.
  size_t max_term_words() const { return max_term_words_; }

 private:
  std::vector<ConceptEntry> entries_;
  std::unordered_map<std::string, size_t> by_id_;
  size_t max_term_words_ = 0;
};

}  // namespace kgicu
