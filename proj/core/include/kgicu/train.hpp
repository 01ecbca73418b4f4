#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgicu/metrics.hpp"
#include "kgicu/model.hpp"

namespace kgicu {

struct EpochStats {
  size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> train_auroc;  // filled when tracking is enabled
  MetricReport validation;
};

struct TrainHooks {
  // Computes train-split AuROC each epoch (extra forward pass).
  bool track_train_auroc = false;
  // Returning true stops after the current epoch.
  std::function<bool(const EpochStats&)> stop_after_epoch;
  // Per-epoch progress callback (logging).
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  ParameterSet params;       // selected parameters (best validation epoch)
  ParameterSet last_params;  // end-of-training parameters
  size_t best_epoch = 0;     // 1-based; 0 when no epoch ran
  std::vector<EpochStats> history;
};

// Mini-batch training with the adaptive-moment optimizer. Fully seeded:
// parameter init and shuffling derive from config.seed, so identical
// (data, config) runs are bit-identical. The returned `params` are the
// best-validation checkpoint (AuPRC for the binary tasks, macro-AUC for
// phenotyping), falling back to the final epoch when validation metrics
// never materialize.
TrainResult train(const PreparedData& prepared, const TrainConfig& config,
                  const TrainHooks& hooks = {});

// Evaluates frozen parameters over one index set; masks vitals at
// `mask_ratio` with `mask_seed` when mask_ratio > 0.
MetricReport evaluate_model(const Model& model, const PreparedData& prepared,
                            const std::vector<size_t>& indices,
                            double mask_ratio = 0.0, uint64_t mask_seed = 0);

// Serializes per-epoch history as CSV (deterministic formatting).
std::string history_to_csv(const std::vector<EpochStats>& history);

}  // namespace kgicu
