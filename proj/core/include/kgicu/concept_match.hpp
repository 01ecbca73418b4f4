#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgicu/vocab.hpp"

namespace kgicu {

// Character trigrams of a normalized string. Strings shorter than three
// characters contribute themselves as a single gram.
std::set<std::string> char_trigrams(const std::string& s);

// Jaccard similarity of the two trigram sets.
double trigram_jaccard(const std::string& a, const std::string& b);

// Approximate dictionary matcher: slides word n-grams (n up to the longest
// vocabulary term) over lowercase, punctuation-stripped note text and scores
// each span against every vocabulary term by trigram Jaccard similarity.
// Spans scoring >= threshold count as one occurrence of the concept.
class ConceptMatcher {
 public:
  ConceptMatcher(const Vocabulary& vocab, double threshold);

  // Occurrences per concept across all notes (one count per matching span).
  std::map<std::string, int> extract_counts(
      const std::vector<std::string>& note_texts) const;

  double threshold() const { return threshold_; }

 private:
  struct TermKey {
    std::vector<uint32_t> grams;  // sorted packed trigrams
    size_t concept_index;
  };
  const Vocabulary& vocab_;
  double threshold_;
  std::vector<TermKey> terms_;
};

// One-shot convenience wrappers matching the per-call contract.
std::map<std::string, int> extract_concept_counts(
    const std::vector<std::string>& note_texts, const Vocabulary& vocab,
    double threshold);
std::set<std::string> extract_concepts(
    const std::vector<std::string>& note_texts, const Vocabulary& vocab,
    double threshold);

}  // namespace kgicu
