#include "kgicu/vocab.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "kgicu/errors.hpp"

namespace kgicu {

std::string normalize_term(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

namespace {

size_t word_count(const std::string& s) {
  if (s.empty()) return 0;
  size_t words = 1;
  for (char c : s)
    if (c == ' ') ++words;
  return words;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

Vocabulary Vocabulary::from_entries(std::vector<ConceptEntry> entries) {
  Vocabulary vocab;
  vocab.entries_ = std::move(entries);
  for (size_t i = 0; i < vocab.entries_.size(); ++i) {
    ConceptEntry& e = vocab.entries_[i];
    if (e.concept_id.empty())
      throw DataError("vocabulary: empty concept_id at entry " +
                      std::to_string(i));
    e.canonical_term = normalize_term(e.canonical_term);
    if (e.canonical_term.empty())
      throw DataError("vocabulary: empty canonical term for " + e.concept_id);
    for (std::string& s : e.synonyms) s = normalize_term(s);
    std::erase_if(e.synonyms, [](const std::string& s) { return s.empty(); });
    if (!vocab.by_id_.emplace(e.concept_id, i).second)
      throw DataError("vocabulary: duplicate concept_id " + e.concept_id);
    vocab.max_term_words_ =
        std::max(vocab.max_term_words_, word_count(e.canonical_term));
    for (const std::string& s : e.synonyms)
      vocab.max_term_words_ = std::max(vocab.max_term_words_, word_count(s));
  }
  return vocab;
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("vocabulary: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError("vocabulary: " + path + " is empty (missing header)");
  std::vector<ConceptEntry> entries;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4)
      throw DataError("vocabulary: " + path + ":" + std::to_string(line_no) +
                      ": expected 4 tab-separated columns, got " +
                      std::to_string(cols.size()));
    ConceptEntry e;
    e.concept_id = cols[0];
    e.canonical_term = cols[1];
    for (auto& syn : split(cols[2], '|'))
      if (!syn.empty()) e.synonyms.push_back(syn);
    e.semantic_group = cols[3];
    entries.push_back(std::move(e));
  }
  return from_entries(std::move(entries));
}

void Vocabulary::write_tsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("vocabulary: cannot write " + path);
  out << "concept_id\tcanonical_term\tsynonyms\tsemantic_group\n";
  for (const ConceptEntry& e : entries_) {
    out << e.concept_id << '\t' << e.canonical_term << '\t';
    for (size_t i = 0; i < e.synonyms.size(); ++i) {
      if (i) out << '|';
      out << e.synonyms[i];
    }
    out << '\t' << e.semantic_group << '\n';
  }
}

const ConceptEntry* Vocabulary::find(const std::string& concept_id) const {
  auto it = by_id_.find(concept_id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

}  // namespace kgicu
