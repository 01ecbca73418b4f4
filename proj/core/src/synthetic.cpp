#include "kgicu/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgicu/errors.hpp"
#include "kgicu/rng.hpp"

namespace kgicu {

namespace {

struct TermSpec {
  const char* term;
  const char* synonyms;  // pipe-separated, may be empty
  const char* group;
};

// Index 0 is the planted risk concept; 1..3 its ontology cluster;
// 4..28 the twenty-five phenotype concepts; the rest are background terms.
constexpr TermSpec kTermBank[] = {
    {"palliative care", "comfort care|end of life care", "procedure"},
    {"hospice care", "", "procedure"},
    {"comfort measures", "comfort measures only", "procedure"},
    {"discharge planning", "", "procedure"},
    {"acute kidney injury", "acute renal failure", "disorder"},
    {"respiratory failure", "", "disorder"},
    {"septic shock", "", "disorder"},
    {"pneumonia", "", "disorder"},
    {"congestive heart failure", "", "disorder"},
    {"atrial fibrillation", "", "disorder"},
    {"myocardial infarction", "heart attack", "disorder"},
    {"pulmonary embolism", "", "disorder"},
    {"gastrointestinal bleed", "gi bleed", "disorder"},
    {"stroke", "cerebrovascular accident", "disorder"},
    {"chronic obstructive pulmonary disease", "copd exacerbation", "disorder"},
    {"diabetic ketoacidosis", "", "disorder"},
    {"urinary tract infection", "", "disorder"},
    {"pancreatitis", "", "disorder"},
    {"liver failure", "hepatic failure", "disorder"},
    {"anemia", "", "disorder"},
    {"hypertension", "", "disorder"},
    {"hyponatremia", "", "disorder"},
    {"hyperkalemia", "", "disorder"},
    {"pleural effusion", "", "disorder"},
    {"deep vein thrombosis", "", "disorder"},
    {"cardiac arrest", "", "disorder"},
    {"delirium", "", "disorder"},
    {"cellulitis", "", "disorder"},
    {"meningitis", "", "disorder"},
    {"chest pain", "", "finding"},
    {"shortness of breath", "dyspnea", "finding"},
    {"nausea", "", "finding"},
    {"fever", "", "finding"},
    {"abdominal pain", "", "finding"},
    {"headache", "", "finding"},
    {"dizziness", "", "finding"},
    {"cough", "", "finding"},
    {"fatigue", "", "finding"},
    {"edema", "", "finding"},
    {"rash", "", "finding"},
    {"constipation", "", "finding"},
    {"diarrhea", "", "finding"},
    {"vomiting", "", "finding"},
    {"back pain", "", "finding"},
    {"sore throat", "", "finding"},
    {"insomnia", "", "finding"},
    {"anxiety", "", "finding"},
    {"bradycardia", "", "finding"},
};
constexpr size_t kTermBankSize = sizeof(kTermBank) / sizeof(kTermBank[0]);
constexpr size_t kRiskIndex = 0;
constexpr size_t kClusterBegin = 1, kClusterEnd = 4;   // exclusive
constexpr size_t kPhenotypeBegin = 4, kPhenotypeEnd = 29;

constexpr const char* kFillerWords[] = {
    "patient",     "stable",     "overnight",  "continues",  "monitor",
    "plan",        "family",     "meeting",    "noted",      "today",
    "morning",     "tolerating", "diet",       "ambulating", "reviewed",
    "labs",        "pending",    "improved",   "unchanged",  "alert",
    "oriented",    "resting",    "comfortable", "followup",  "assessment",
    "exam",        "unremarkable", "status",   "consult",    "team",
};
constexpr size_t kFillerCount = sizeof(kFillerWords) / sizeof(kFillerWords[0]);

constexpr const char* kCategories[] = {"Nursing", "Physician", "Radiology",
                                       "General"};

std::string concept_id_for(size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "C%07zu", index + 1);
  return buf;
}

std::vector<std::string> split_pipe(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == '|') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

// Surface forms of a concept: canonical plus synonyms.
std::vector<std::string> surface_forms(const ConceptEntry& entry) {
  std::vector<std::string> forms = {entry.canonical_term};
  forms.insert(forms.end(), entry.synonyms.begin(), entry.synonyms.end());
  return forms;
}

std::string filler_sentence(Rng& rng) {
  const int words = static_cast<int>(rng.uniform_int(4, 8));
  std::string text;
  for (int w = 0; w < words; ++w) {
    if (w) text.push_back(' ');
    text += kFillerWords[rng.uniform_int(0, kFillerCount - 1)];
  }
  return text;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (episodes == 0) throw ConfigError("synthetic spec: episodes must be >= 1");
  if (n_vitals < 2)
    throw ConfigError("synthetic spec: n_vitals must be >= 2 (two carry the drift)");
  if (min_hours < 1 || max_hours < min_hours)
    throw ConfigError("synthetic spec: require 1 <= min_hours <= max_hours");
  if (vocab_size < kPhenotypeEnd || vocab_size > kTermBankSize)
    throw ConfigError("synthetic spec: vocab_size must be in [" +
                      std::to_string(kPhenotypeEnd) + ", " +
                      std::to_string(kTermBankSize) + "]");
  for (double p : {noise, risk_rate, mention_prob, synonym_prob,
                   distractor_prob, phenotype_rate, native_missing,
                   discharge_note_prob, no_time_prob})
    if (p < 0.0 || p > 1.0)
      throw ConfigError("synthetic spec: probabilities must be in [0,1]");
  if (note_period < 1.0)
    throw ConfigError("synthetic spec: note_period must be >= 1");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData data;

  std::vector<ConceptEntry> entries;
  for (size_t i = 0; i < spec.vocab_size; ++i) {
    const TermSpec& t = kTermBank[i];
    entries.push_back(
        {concept_id_for(i), t.term, split_pipe(t.synonyms), t.group});
  }
  data.vocabulary = Vocabulary::from_entries(entries);
  data.risk_concept_id = concept_id_for(kRiskIndex);

  // Ontology edges: a tight clique-ish risk cluster, a chain over the
  // phenotype concepts, and seeded random background edges.
  Rng edge_rng(mix_seed(spec.seed, 0xED6E5));
  auto id = [&](size_t i) { return concept_id_for(i); };
  data.ontology_edges.insert(make_concept_edge(id(0), id(1)));
  data.ontology_edges.insert(make_concept_edge(id(0), id(2)));
  data.ontology_edges.insert(make_concept_edge(id(0), id(3)));
  data.ontology_edges.insert(make_concept_edge(id(1), id(2)));
  for (size_t i = kPhenotypeBegin; i + 1 < kPhenotypeEnd; ++i)
    if (edge_rng.bernoulli(0.6))
      data.ontology_edges.insert(make_concept_edge(id(i), id(i + 1)));
  for (size_t rep = 0; rep < spec.vocab_size; ++rep) {
    const size_t u = static_cast<size_t>(
        edge_rng.uniform_int(0, static_cast<int64_t>(spec.vocab_size) - 1));
    const size_t v = static_cast<size_t>(
        edge_rng.uniform_int(0, static_cast<int64_t>(spec.vocab_size) - 1));
    if (u != v) data.ontology_edges.insert(make_concept_edge(id(u), id(v)));
  }

  const auto& vocab_entries = data.vocabulary.entries();
  auto pick_form = [&](size_t concept_index, Rng& rng) {
    auto forms = surface_forms(vocab_entries[concept_index]);
    if (forms.size() > 1 && rng.bernoulli(spec.synonym_prob))
      return forms[1 + rng.uniform_int(0, static_cast<int64_t>(forms.size()) - 2)];
    return forms[0];
  };

  for (size_t i = 0; i < spec.episodes; ++i) {
    Rng rng(mix_seed(spec.seed, 0xE0000 + i));
    Episode e;
    char pid[16];
    std::snprintf(pid, sizeof(pid), "P%04zu", i);
    e.patient_id = pid;
    e.episode_index = 0;
    e.n_vitals = spec.n_vitals;
    e.n_steps = static_cast<size_t>(rng.uniform_int(
        static_cast<int64_t>(spec.min_hours), static_cast<int64_t>(spec.max_hours)));
    const size_t T = e.n_steps;

    const bool risk = rng.bernoulli(spec.risk_rate);
    // Onset always lands inside the 48h mortality window and leaves a few
    // post-onset hours even on short stays.
    const int onset_hi =
        static_cast<int>(std::min<size_t>(36, T > 4 ? T - 4 : 1));
    const int onset_lo = std::min(8, onset_hi);
    const int onset =
        risk ? static_cast<int>(rng.uniform_int(onset_lo, onset_hi)) : -1;

    // Vitals: unit-ish baseline noise; risk shifts channels 0 and 1 after
    // onset. `noise` replaces an entry with a background draw (signal lost),
    // independent of the risk state.
    e.vitals.resize(T * spec.n_vitals);
    e.vitals_missing.assign(T * spec.n_vitals, 0);
    for (size_t t = 0; t < T; ++t) {
      for (size_t c = 0; c < spec.n_vitals; ++c) {
        double value = 0.5 * rng.normal();
        if (risk && static_cast<int>(t) >= onset && c < 2) value += spec.drift;
        const bool corrupted = rng.bernoulli(spec.noise);
        if (corrupted) value = 0.5 * rng.normal();
        const bool missing = rng.bernoulli(spec.native_missing);
        e.vitals[t * spec.n_vitals + c] = missing ? 0.0 : value;
        e.vitals_missing[t * spec.n_vitals + c] = missing ? 1 : 0;
      }
    }

    // Notes: admission note at hour 0, then roughly one per note_period.
    // Risk stays are guaranteed a timed note at onset so the mention is
    // aligned with the label change.
    std::vector<int> note_steps = {0};
    for (size_t t = 1; t < T; ++t)
      if (rng.bernoulli(1.0 / spec.note_period))
        note_steps.push_back(static_cast<int>(t));
    if (risk &&
        std::find(note_steps.begin(), note_steps.end(), onset) == note_steps.end())
      note_steps.push_back(onset);
    std::sort(note_steps.begin(), note_steps.end());
    if (note_steps.size() < 2) note_steps.push_back(static_cast<int>(T / 2));

    // Phenotype assignment: concept j active means its term is planted in a
    // random note of the stay.
    std::vector<int> phenotype(25, 0);
    std::vector<std::pair<size_t, size_t>> phenotype_mentions;  // (note, concept)
    for (size_t p = 0; p < 25; ++p) {
      if (!rng.bernoulli(spec.phenotype_rate)) continue;
      phenotype[p] = 1;
      const size_t note_idx = static_cast<size_t>(
          rng.uniform_int(0, static_cast<int64_t>(note_steps.size()) - 1));
      phenotype_mentions.emplace_back(note_idx, kPhenotypeBegin + p);
    }

    for (size_t ni = 0; ni < note_steps.size(); ++ni) {
      const int step = note_steps[ni];
      NoteRecord note;
      note.category = kCategories[rng.uniform_int(0, 3)];
      note.t_hours = step + rng.uniform(0.0, 1.0);
      note.has_chart_time = true;
      note.text = filler_sentence(rng);

      const bool post_onset = risk && step >= onset;
      if (post_onset) {
        const bool planned = rng.bernoulli(spec.mention_prob) || step == onset;
        const bool dropped = rng.bernoulli(spec.noise) && step != onset;
        if (planned && !dropped) {
          note.text += " " + pick_form(kRiskIndex, rng);
          if (rng.bernoulli(0.4)) {
            const size_t neighbor = static_cast<size_t>(rng.uniform_int(
                static_cast<int64_t>(kClusterBegin),
                static_cast<int64_t>(kClusterEnd) - 1));
            note.text += " " + pick_form(neighbor, rng);
          }
        }
      } else if (rng.bernoulli(spec.distractor_prob)) {
        // Background mentions never touch the risk cluster, so the planted
        // rule stays exact at noise 0.
        const size_t bg = static_cast<size_t>(rng.uniform_int(
            static_cast<int64_t>(kPhenotypeEnd),
            static_cast<int64_t>(spec.vocab_size) - 1));
        note.text += " " + pick_form(bg, rng);
      }
      for (auto [note_idx, concept_index] : phenotype_mentions)
        if (note_idx == ni && !(rng.bernoulli(spec.noise)))
          note.text += " " + pick_form(concept_index, rng);

      // Some filler notes lose their chart time (never the onset note).
      if (!(risk && step == onset) && ni != 0 &&
          rng.bernoulli(spec.no_time_prob))
        note.has_chart_time = false;

      e.notes.push_back(std::move(note));
    }

    if (rng.bernoulli(spec.discharge_note_prob)) {
      NoteRecord summary;
      summary.category = "Discharge summary";
      summary.t_hours = static_cast<double>(T - 1) + 0.5;
      summary.has_chart_time = true;
      summary.is_discharge_summary = true;
      summary.text = risk ? "patient expired during admission palliative care"
                          : "patient discharged home in stable condition";
      e.notes.push_back(std::move(summary));
    }

    e.labels.mortality = risk ? 1 : 0;
    std::vector<int> decomp(T, 0);
    if (risk)
      for (size_t t = static_cast<size_t>(onset); t < T; ++t) decomp[t] = 1;
    e.labels.decompensation = decomp;
    e.labels.phenotyping = phenotype;

    data.episodes.push_back(std::move(e));
  }
  return data;
}

void write_synthetic(const SyntheticData& data, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_episodes_jsonl((dir / "episodes.jsonl").string(), data.episodes);
  data.vocabulary.write_tsv((dir / "vocab.tsv").string());
  write_ontology_edges((dir / "edges.tsv").string(), data.ontology_edges);
}

namespace {

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("spec line " + std::to_string(line_no) +
                        ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace

SyntheticSpec SyntheticSpec::parse(const std::string& text) {
  SyntheticSpec spec;
  for (const auto& [key, value] : parse_key_values(text)) {
    try {
      if (key == "episodes") spec.episodes = std::stoull(value);
      else if (key == "n_vitals") spec.n_vitals = std::stoull(value);
      else if (key == "min_hours") spec.min_hours = std::stoull(value);
      else if (key == "max_hours") spec.max_hours = std::stoull(value);
      else if (key == "vocab_size") spec.vocab_size = std::stoull(value);
      else if (key == "noise") spec.noise = std::stod(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "risk_rate") spec.risk_rate = std::stod(value);
      else if (key == "drift") spec.drift = std::stod(value);
      else if (key == "note_period") spec.note_period = std::stod(value);
      else if (key == "mention_prob") spec.mention_prob = std::stod(value);
      else if (key == "synonym_prob") spec.synonym_prob = std::stod(value);
      else if (key == "distractor_prob") spec.distractor_prob = std::stod(value);
      else if (key == "phenotype_rate") spec.phenotype_rate = std::stod(value);
      else if (key == "native_missing") spec.native_missing = std::stod(value);
      else if (key == "discharge_note_prob")
        spec.discharge_note_prob = std::stod(value);
      else if (key == "no_time_prob") spec.no_time_prob = std::stod(value);
      else throw ConfigError("synthetic spec: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError("synthetic spec: bad value for '" + key + "': " + value);
    } catch (const std::out_of_range&) {
      throw ConfigError("synthetic spec: value out of range for '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

SyntheticSpec SyntheticSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("synthetic spec: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string SyntheticSpec::to_key_value_text() const {
  std::ostringstream out;
  out << "episodes = " << episodes << '\n'
      << "n_vitals = " << n_vitals << '\n'
      << "min_hours = " << min_hours << '\n'
      << "max_hours = " << max_hours << '\n'
      << "vocab_size = " << vocab_size << '\n'
      << "noise = " << noise << '\n'
      << "seed = " << seed << '\n'
      << "risk_rate = " << risk_rate << '\n'
      << "drift = " << drift << '\n'
      << "note_period = " << note_period << '\n'
      << "mention_prob = " << mention_prob << '\n'
      << "synonym_prob = " << synonym_prob << '\n'
      << "distractor_prob = " << distractor_prob << '\n'
      << "phenotype_rate = " << phenotype_rate << '\n'
      << "native_missing = " << native_missing << '\n'
      << "discharge_note_prob = " << discharge_note_prob << '\n'
      << "no_time_prob = " << no_time_prob << '\n';
  return out.str();
}

}  // namespace kgicu
