#include "kgicu/dataset.hpp"

#include <filesystem>

#include "kgicu/errors.hpp"
#include "kgicu/rng.hpp"

namespace kgicu {

SplitKind parse_split(const std::string& name) {
  if (name == "train") return SplitKind::Train;
  if (name == "val" || name == "validation") return SplitKind::Val;
  if (name == "test") return SplitKind::Test;
  throw ConfigError("unknown split '" + name + "' (train|val|test)");
}

const char* to_string(SplitKind split) {
  switch (split) {
    case SplitKind::Train:
      return "train";
    case SplitKind::Val:
      return "val";
    case SplitKind::Test:
      return "test";
  }
  return "?";
}

const std::vector<size_t>& Dataset::split(SplitKind kind) const {
  switch (kind) {
    case SplitKind::Train:
      return train_indices;
    case SplitKind::Val:
      return val_indices;
    case SplitKind::Test:
      return test_indices;
  }
  throw ContractError("unknown split kind");
}

SplitKind split_for_patient(const std::string& patient_id,
                            uint64_t split_seed) {
  const uint64_t h = mix_seed(fnv1a64(patient_id), split_seed);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < 0.70) return SplitKind::Train;
  if (u < 0.85) return SplitKind::Val;
  return SplitKind::Test;
}

Dataset build_dataset(std::vector<Episode> episodes, TaskKind task,
                      uint64_t split_seed) {
  if (episodes.empty()) throw DataError("empty dataset: no episodes");
  Dataset dataset;
  for (Episode& raw : episodes) {
    if (auto reason = validate_episode(raw)) {
      dataset.rejected.push_back({raw.patient_id, raw.episode_index, *reason});
      continue;
    }
    Episode episode = preprocess_notes(std::move(raw));
    if (episode.flagged_for_exclusion) {
      dataset.rejected.push_back({episode.patient_id, episode.episode_index,
                                  "no text notes after preprocessing"});
      continue;
    }
    std::string why;
    switch (task) {
      case TaskKind::Mortality:
        if (!episode.labels.mortality)
          why = "missing mortality label";
        else if (episode.n_steps < kMortalityWindowSteps)
          why = "episode shorter than the 48h mortality window";
        break;
      case TaskKind::Decompensation:
        if (!episode.labels.decompensation) why = "missing decompensation labels";
        break;
      case TaskKind::Phenotyping:
        if (!episode.labels.phenotyping) why = "missing phenotyping labels";
        break;
    }
    if (!why.empty()) {
      dataset.rejected.push_back(
          {episode.patient_id, episode.episode_index, why});
      continue;
    }
    if (dataset.n_vitals == 0) dataset.n_vitals = episode.n_vitals;
    if (episode.n_vitals != dataset.n_vitals) {
      dataset.rejected.push_back({episode.patient_id, episode.episode_index,
                                  "vital channel count differs from dataset"});
      continue;
    }
    dataset.episodes.push_back(std::move(episode));
  }
  if (dataset.episodes.empty())
    throw DataError("empty dataset: every episode was rejected");

  for (size_t i = 0; i < dataset.episodes.size(); ++i) {
    switch (split_for_patient(dataset.episodes[i].patient_id, split_seed)) {
      case SplitKind::Train:
        dataset.train_indices.push_back(i);
        break;
      case SplitKind::Val:
        dataset.val_indices.push_back(i);
        break;
      case SplitKind::Test:
        dataset.test_indices.push_back(i);
        break;
    }
  }
  return dataset;
}

Dataset load_dataset(const std::string& dir, TaskKind task,
                     uint64_t split_seed) {
  const std::filesystem::path path =
      std::filesystem::path(dir) / "episodes.jsonl";
  if (!std::filesystem::exists(path))
    throw DataError("empty dataset: " + path.string() + " does not exist");
  return build_dataset(read_episodes_jsonl(path.string()), task, split_seed);
}

}  // namespace kgicu
