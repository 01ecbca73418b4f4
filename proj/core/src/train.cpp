#include "kgicu/train.hpp"

#include <cinttypes>
#include <cstdio>

#include "kgicu/errors.hpp"
#include "kgicu/rng.hpp"

namespace kgicu {

namespace {

// Collects (score, label) pairs in the task's flat layout.
void accumulate_scores(const Model& model, const PreparedData& prepared,
                       const std::vector<size_t>& indices, double mask_ratio,
                       uint64_t mask_seed, std::vector<double>& scores,
                       std::vector<int>& labels,
                       std::vector<std::vector<double>>& pheno_scores,
                       std::vector<std::vector<int>>& pheno_labels) {
  const bool pheno = model.config().task == TaskKind::Phenotyping;
  if (pheno && pheno_scores.empty()) {
    pheno_scores.resize(25);
    pheno_labels.resize(25);
  }
  for (size_t index : indices) {
    const PreparedEpisode& episode = prepared.episodes[index];
    std::vector<uint8_t> override_bits;
    const std::vector<uint8_t>* override_ptr = nullptr;
    if (mask_ratio > 0.0) {
      override_bits =
          masked_missing_bits(*episode.source, mask_ratio, mask_seed);
      override_ptr = &override_bits;
    }
    const std::vector<double> probs =
        model.predict_probabilities(episode, override_ptr);
    const std::vector<double> truth = model.loss_labels(*episode.source);
    if (pheno) {
      for (size_t c = 0; c < 25; ++c) {
        pheno_scores[c].push_back(probs[c]);
        pheno_labels[c].push_back(static_cast<int>(truth[c]));
      }
    } else {
      for (size_t i = 0; i < probs.size(); ++i) {
        scores.push_back(probs[i]);
        labels.push_back(static_cast<int>(truth[i]));
      }
    }
  }
}

double selection_score(TaskKind task, const MetricReport& report) {
  if (task == TaskKind::Phenotyping)
    return report.macro_auc.value_or(-1.0);
  return report.auprc.value_or(-1.0);
}

}  // namespace

MetricReport evaluate_model(const Model& model, const PreparedData& prepared,
                            const std::vector<size_t>& indices,
                            double mask_ratio, uint64_t mask_seed) {
  if (indices.empty()) throw EvalError("evaluation split is empty");
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::vector<double>> pheno_scores;
  std::vector<std::vector<int>> pheno_labels;
  accumulate_scores(model, prepared, indices, mask_ratio, mask_seed, scores,
                    labels, pheno_scores, pheno_labels);
  if (model.config().task == TaskKind::Phenotyping)
    return compute_multilabel_metrics(pheno_scores, pheno_labels);
  return compute_metrics(scores, labels);
}

TrainResult train(const PreparedData& prepared, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate();
  const Dataset& dataset = *prepared.dataset;
  if (dataset.train_indices.empty())
    throw ConfigError("training split is empty");

  Model model(config, dataset.n_vitals);
  model.init_params();
  AdamOptimizer optimizer({.learning_rate = config.learning_rate});
  Rng shuffle_rng(mix_seed(config.seed, 0x5FFF1E));

  TrainResult result;
  result.params = model.params().clone();  // epoch-0 parameters
  double best_score = -1.0;

  std::vector<size_t> order = dataset.train_indices;
  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<Tensor> losses;
      losses.reserve(end - begin);
      for (size_t i = begin; i < end; ++i) {
        const PreparedEpisode& episode = prepared.episodes[order[i]];
        Model::Output out = model.forward(episode);
        losses.push_back(model.episode_loss(out, *episode.source));
      }
      Tensor batch_loss =
          losses.size() == 1 ? losses[0] : mean_rows(concat_rows(losses));
      loss_sum += batch_loss.item();
      ++batches;
      backward(batch_loss, model.params());
      optimizer.step(model.params());
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    if (hooks.track_train_auroc) {
      try {
        MetricReport train_report =
            evaluate_model(model, prepared, dataset.train_indices);
        stats.train_auroc = model.config().task == TaskKind::Phenotyping
                                ? train_report.macro_auc
                                : train_report.auroc;
      } catch (const EvalError&) {
        // leave unset
      }
    }
    if (!dataset.val_indices.empty()) {
      try {
        stats.validation = evaluate_model(model, prepared, dataset.val_indices);
      } catch (const EvalError&) {
        // degenerate validation split; leave the report empty
      }
    }
    result.history.push_back(stats);

    const double score = selection_score(config.task, stats.validation);
    if (score > best_score) {
      best_score = score;
      result.best_epoch = epoch;
      result.params = model.params().clone();
    }
    if (hooks.on_epoch) hooks.on_epoch(stats);
    if (hooks.stop_after_epoch && hooks.stop_after_epoch(stats)) break;
  }

  result.last_params = model.params().clone();
  if (best_score < 0.0) {
    // No usable validation signal; ship the final parameters.
    result.params = result.last_params.clone();
    result.best_epoch = result.history.size();
  }
  return result;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
  std::string csv =
      "epoch,train_loss,train_auroc,val_auprc,val_auroc,val_macro_auc,val_"
      "micro_auc\n";
  char buffer[64];
  auto cell = [&](const std::optional<double>& v) -> std::string {
    if (!v) return "nan";
    std::snprintf(buffer, sizeof(buffer), "%.17g", *v);
    return buffer;
  };
  for (const EpochStats& s : history) {
    std::snprintf(buffer, sizeof(buffer), "%zu", s.epoch);
    csv += buffer;
    csv += ',';
    std::snprintf(buffer, sizeof(buffer), "%.17g", s.train_loss);
    csv += buffer;
    csv += ',' + cell(s.train_auroc) + ',' + cell(s.validation.auprc) + ',' +
           cell(s.validation.auroc) + ',' + cell(s.validation.macro_auc) +
           ',' + cell(s.validation.micro_auc) + '\n';
  }
  return csv;
}

}  // namespace kgicu
