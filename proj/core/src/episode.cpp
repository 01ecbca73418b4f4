#include "kgicu/episode.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "kgicu/errors.hpp"

namespace kgicu {

using nlohmann::json;

std::vector<std::string> Episode::note_texts_at(int step) const {
  std::vector<std::string> texts;
  auto it = notes_by_step.find(step);
  if (it == notes_by_step.end()) return texts;
  texts.reserve(it->second.size());
  for (const NoteRecord& note : it->second) texts.push_back(note.text);
  return texts;
}

Episode preprocess_notes(Episode episode) {
  if (episode.preprocessed) return episode;

  constexpr double kEndOfDay = 23.0 + 59.0 / 60.0 + 59.0 / 3600.0;  // 23:59:59
  for (NoteRecord& note : episode.notes) {
    if (!note.has_chart_time) {
      note.t_hours = 24.0 * note.chart_date() + kEndOfDay;
      note.has_chart_time = true;
    }
  }

  std::erase_if(episode.notes,
                [](const NoteRecord& n) { return n.is_discharge_summary; });

  if (!episode.notes.empty()) {
    // Mask the chronologically last note; ties resolve to the latest record.
    size_t last = 0;
    for (size_t i = 1; i < episode.notes.size(); ++i)
      if (episode.notes[i].t_hours >= episode.notes[last].t_hours) last = i;
    episode.notes.erase(episode.notes.begin() + static_cast<long>(last));
  }

  episode.notes_by_step.clear();
  for (const NoteRecord& note : episode.notes) {
    const int bucket = static_cast<int>(std::floor(note.t_hours));
    if (bucket < 0 || bucket >= static_cast<int>(episode.n_steps)) continue;
    episode.notes_by_step[bucket].push_back(note);
  }

  episode.flagged_for_exclusion = episode.notes.empty();
  episode.preprocessed = true;
  return episode;
}

std::optional<std::string> validate_episode(const Episode& e) {
  if (e.patient_id.empty()) return "empty patient_id";
  if (e.n_steps < 1) return "episode has no timesteps";
  if (e.n_vitals < 1) return "episode has no vital channels";
  if (e.vitals.size() != e.n_steps * e.n_vitals)
    return "vitals size does not match dims";
  if (e.vitals_missing.size() != e.vitals.size())
    return "missing mask size does not match vitals";
  for (size_t i = 0; i < e.vitals.size(); ++i)
    if (e.vitals_missing[i] == 0 && !std::isfinite(e.vitals[i]))
      return "non-finite vital marked as observed";
  if (e.labels.mortality && *e.labels.mortality != 0 && *e.labels.mortality != 1)
    return "mortality label not in {0,1}";
  if (e.labels.decompensation &&
      e.labels.decompensation->size() != e.n_steps)
    return "decompensation labels do not cover every step";
  if (e.labels.phenotyping && e.labels.phenotyping->size() != 25)
    return "phenotyping labels must have 25 entries";
  for (const NoteRecord& n : e.notes)
    if (n.t_hours < 0.0) return "note timestamp before admission";
  return std::nullopt;
}

namespace {

json episode_to_json(const Episode& e) {
  json j;
  j["patient_id"] = e.patient_id;
  j["episode_index"] = e.episode_index;
  j["vitals"] = {{"rows", e.n_steps},
                 {"cols", e.n_vitals},
                 {"data", e.vitals}};
  json mask_data = json::array();
  for (uint8_t m : e.vitals_missing) mask_data.push_back(m != 0 ? 1 : 0);
  j["vitals_missing"] = {{"rows", e.n_steps},
                         {"cols", e.n_vitals},
                         {"data", std::move(mask_data)}};
  json notes = json::array();
  for (const NoteRecord& n : e.notes) {
    notes.push_back({{"t", n.t_hours},
                     {"text", n.text},
                     {"category", n.category},
                     {"is_discharge_summary", n.is_discharge_summary},
                     {"has_chart_time", n.has_chart_time}});
  }
  j["notes"] = std::move(notes);
  json labels = json::object();
  if (e.labels.mortality) labels["mortality"] = *e.labels.mortality;
  if (e.labels.decompensation)
    labels["decompensation"] = *e.labels.decompensation;
  if (e.labels.phenotyping) labels["phenotyping"] = *e.labels.phenotyping;
  j["labels"] = std::move(labels);
  return j;
}

Episode episode_from_json(const json& j) {
  Episode e;
  e.patient_id = j.at("patient_id").get<std::string>();
  e.episode_index = j.at("episode_index").get<int>();
  const json& vit = j.at("vitals");
  e.n_steps = vit.at("rows").get<size_t>();
  e.n_vitals = vit.at("cols").get<size_t>();
  e.vitals = vit.at("data").get<std::vector<double>>();
  const json& miss = j.at("vitals_missing");
  if (miss.at("rows").get<size_t>() != e.n_steps ||
      miss.at("cols").get<size_t>() != e.n_vitals)
    throw DataError("vitals_missing dims differ from vitals");
  for (const auto& v : miss.at("data"))
    e.vitals_missing.push_back(v.get<int>() != 0 ? 1 : 0);
  for (const auto& jn : j.at("notes")) {
    NoteRecord n;
    n.t_hours = jn.at("t").get<double>();
    n.text = jn.at("text").get<std::string>();
    n.category = jn.at("category").get<std::string>();
    n.is_discharge_summary = jn.at("is_discharge_summary").get<bool>();
    n.has_chart_time = jn.at("has_chart_time").get<bool>();
    e.notes.push_back(std::move(n));
  }
  const json& labels = j.at("labels");
  if (labels.contains("mortality"))
    e.labels.mortality = labels.at("mortality").get<int>();
  if (labels.contains("decompensation"))
    e.labels.decompensation =
        labels.at("decompensation").get<std::vector<int>>();
  if (labels.contains("phenotyping"))
    e.labels.phenotyping = labels.at("phenotyping").get<std::vector<int>>();
  return e;
}

}  // namespace

std::vector<Episode> read_episodes_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("episodes: cannot open " + path);
  std::vector<Episode> episodes;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      episodes.push_back(episode_from_json(json::parse(line)));
    } catch (const json::exception& err) {
      throw DataError("episodes: " + path + ":" + std::to_string(line_no) +
                      ": " + err.what());
    } catch (const DataError& err) {
      throw DataError("episodes: " + path + ":" + std::to_string(line_no) +
                      ": " + err.what());
    }
  }
  return episodes;
}

void write_episodes_jsonl(const std::string& path,
                          const std::vector<Episode>& episodes) {
  std::ofstream out(path);
  if (!out) throw DataError("episodes: cannot write " + path);
  for (const Episode& e : episodes) out << episode_to_json(e).dump() << '\n';
}

}  // namespace kgicu
