#pragma once

#include <string>
#include <vector>

#include "kgicu/episode.hpp"
#include "kgicu/sequence.hpp"

namespace kgicu {

enum class SplitKind { Train, Val, Test };

SplitKind parse_split(const std::string& name);
const char* to_string(SplitKind split);

struct RejectedEpisode {
  std::string patient_id;
  int episode_index = 0;
  std::string reason;
};

struct Dataset {
  std::vector<Episode> episodes;  // accepted and preprocessed
  std::vector<size_t> train_indices;
  std::vector<size_t> val_indices;
  std::vector<size_t> test_indices;
  std::vector<RejectedEpisode> rejected;
  size_t n_vitals = 0;

  const std::vector<size_t>& split(SplitKind kind) const;
};

inline constexpr uint64_t kDefaultSplitSeed = 17;

// Split assignment is a pure function of (patient_id, split_seed), so a
// patient never spans splits: hash < 0.70 -> train, < 0.85 -> val, else test.
SplitKind split_for_patient(const std::string& patient_id, uint64_t split_seed);

// Loads <dir>/episodes.jsonl, validates invariants, preprocesses notes and
// drops episodes that are unusable for `task` (recorded in the rejection
// report).
Dataset load_dataset(const std::string& dir, TaskKind task,
                     uint64_t split_seed = kDefaultSplitSeed);

// Same pipeline from in-memory episodes; used by generators and tests.
Dataset build_dataset(std::vector<Episode> episodes, TaskKind task,
                      uint64_t split_seed = kDefaultSplitSeed);

}  // namespace kgicu
