#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kgicu {

// One clinical note. `t_hours` is the chart timestamp in hours since
// admission; when has_chart_time is false only the date part
// (floor(t_hours / 24) days) is meaningful and preprocessing assigns the
// end of that day.
struct NoteRecord {
  std::string text;
  std::string category;
  double t_hours = 0.0;
  bool has_chart_time = true;
  bool is_discharge_summary = false;

  int chart_date() const {
    return static_cast<int>(std::floor(t_hours / 24.0));
  }
};

struct EpisodeLabels {
  std::optional<int> mortality;                    // 0/1
  std::optional<std::vector<int>> decompensation;  // one 0/1 per step
  std::optional<std::vector<int>> phenotyping;     // 25 entries of 0/1
};

// One patient stay on the hourly grid: vitals matrix with a missing mask,
// note records, per-task labels.
struct Episode {
  std::string patient_id;
  int episode_index = 0;
  size_t n_steps = 0;   // T
  size_t n_vitals = 0;  // channels per step
  std::vector<double> vitals;           // T x n_vitals, row-major
  std::vector<uint8_t> vitals_missing;  // same layout, 0/1
  std::vector<NoteRecord> notes;        // chart order as written
  // Filled by preprocess_notes: hourly bucket -> notes in that hour.
  std::map<int, std::vector<NoteRecord>> notes_by_step;
  EpisodeLabels labels;
  bool preprocessed = false;
  // Set when preprocessing leaves the stay without any note.
  bool flagged_for_exclusion = false;

  double vital(size_t t, size_t j) const { return vitals[t * n_vitals + j]; }
  bool missing(size_t t, size_t j) const {
    return vitals_missing[t * n_vitals + j] != 0;
  }
  std::vector<std::string> note_texts_at(int step) const;
};

// Applies the note rules: (1) notes without a chart time move to 23:59:59
// of their chart date, (2) discharge summaries are dropped, (3) the
// chronologically last remaining note is masked. Survivors are bucketed to
// the hourly grid (buckets beyond the stay are dropped). Idempotent from
// the second application onward.
Episode preprocess_notes(Episode episode);

// JSON-lines episode files, one episode per line.
std::vector<Episode> read_episodes_jsonl(const std::string& path);
void write_episodes_jsonl(const std::string& path,
                          const std::vector<Episode>& episodes);

// Shape/label invariants; returns a reason string when invalid.
std::optional<std::string> validate_episode(const Episode& episode);

}  // namespace kgicu
