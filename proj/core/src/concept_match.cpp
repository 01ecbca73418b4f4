#include "kgicu/concept_match.hpp"

#include <algorithm>

#include "kgicu/errors.hpp"

namespace kgicu {

namespace {

// Packs up to three chars into one key; normalized text is ASCII after
// normalize_term so this is collision-free.
uint32_t pack_gram(const char* s, size_t len) {
  uint32_t key = 0;
  for (size_t i = 0; i < len; ++i)
    key = (key << 8) | static_cast<unsigned char>(s[i]);
  return key;
}

std::vector<uint32_t> packed_trigrams(const std::string& s) {
  std::vector<uint32_t> grams;
  if (s.empty()) return grams;
  if (s.size() < 3) {
    grams.push_back(pack_gram(s.data(), s.size()));
    return grams;
  }
  grams.reserve(s.size() - 2);
  for (size_t i = 0; i + 3 <= s.size(); ++i)
    grams.push_back(pack_gram(s.data() + i, 3));
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

double jaccard_sorted(const std::vector<uint32_t>& a,
                      const std::vector<uint32_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::string> tokenize(const std::string& normalized) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : normalized) {
    if (c == ' ') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

}  // namespace

std::set<std::string> char_trigrams(const std::string& s) {
  std::set<std::string> grams;
  if (s.empty()) return grams;
  if (s.size() < 3) {
    grams.insert(s);
    return grams;
  }
  for (size_t i = 0; i + 3 <= s.size(); ++i) grams.insert(s.substr(i, 3));
  return grams;
}

double trigram_jaccard(const std::string& a, const std::string& b) {
  return jaccard_sorted(packed_trigrams(a), packed_trigrams(b));
}

ConceptMatcher::ConceptMatcher(const Vocabulary& vocab, double threshold)
    : vocab_(vocab), threshold_(threshold) {
  if (vocab.empty())
    throw ConfigError("concept matching requires a nonempty vocabulary");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ContractError("concept matching threshold must be in (0, 1]");
  for (size_t i = 0; i < vocab.entries().size(); ++i) {
    const ConceptEntry& e = vocab.entries()[i];
    terms_.push_back({packed_trigrams(e.canonical_term), i});
    for (const std::string& syn : e.synonyms)
      terms_.push_back({packed_trigrams(syn), i});
  }
}

std::map<std::string, int> ConceptMatcher::extract_counts(
    const std::vector<std::string>& note_texts) const {
  std::map<std::string, int> counts;
  const size_t max_n = std::max<size_t>(1, vocab_.max_term_words());
  for (const std::string& note : note_texts) {
    const std::vector<std::string> tokens = tokenize(normalize_term(note));
    for (size_t start = 0; start < tokens.size(); ++start) {
      std::string span;
      for (size_t n = 1; n <= max_n && start + n <= tokens.size(); ++n) {
        if (n > 1) span.push_back(' ');
        span += tokens[start + n - 1];
        const std::vector<uint32_t> span_grams = packed_trigrams(span);
        // One span may fuzzily match several vocabulary surface forms of the
        // same concept; count the concept once per span.
        std::set<size_t> hit;
        for (const TermKey& term : terms_) {
          // size prefilter: jaccard >= t needs |A| >= t|B| and |B| >= t|A|
          const double sa = static_cast<double>(span_grams.size());
          const double sb = static_cast<double>(term.grams.size());
          if (sa < threshold_ * sb || sb < threshold_ * sa) continue;
          if (jaccard_sorted(span_grams, term.grams) >= threshold_)
            hit.insert(term.concept_index);
        }
        for (size_t idx : hit)
          counts[vocab_.entries()[idx].concept_id] += 1;
      }
    }
  }
  return counts;
}

std::map<std::string, int> extract_concept_counts(
    const std::vector<std::string>& note_texts, const Vocabulary& vocab,
    double threshold) {
  return ConceptMatcher(vocab, threshold).extract_counts(note_texts);
}

std::set<std::string> extract_concepts(
    const std::vector<std::string>& note_texts, const Vocabulary& vocab,
    double threshold) {
  std::set<std::string> out;
  for (auto& [id, count] : extract_concept_counts(note_texts, vocab, threshold))
    out.insert(id);
  return out;
}

}  // namespace kgicu
