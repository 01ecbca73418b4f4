#include "kgicu/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "kgicu/errors.hpp"

namespace kgicu {

namespace {

void validate_binary(const std::vector<double>& scores,
                     const std::vector<int>& labels, const char* metric) {
  if (scores.empty())
    throw EvalError(std::string(metric) + " undefined: no samples");
  if (scores.size() != labels.size())
    throw ContractError(std::string(metric) + ": " +
                        std::to_string(scores.size()) + " scores vs " +
                        std::to_string(labels.size()) + " labels");
  for (int y : labels)
    if (y != 0 && y != 1)
      throw ContractError(std::string(metric) + ": labels must be 0 or 1");
}

size_t count_positives(const std::vector<int>& labels) {
  size_t p = 0;
  for (int y : labels) p += static_cast<size_t>(y);
  return p;
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  validate_binary(scores, labels, "auroc");
  const size_t n = scores.size();
  const size_t pos = count_positives(labels);
  const size_t neg = n - pos;
  if (pos == 0) throw EvalError("auroc undefined: no positive labels");
  if (neg == 0) throw EvalError("auroc undefined: no negative labels");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Average ranks across tied scores (1-based ranks).
  std::vector<double> rank(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double rank_sum = 0.0;
  for (size_t k = 0; k < n; ++k)
    if (labels[k] == 1) rank_sum += rank[k];
  const double pd = static_cast<double>(pos), nd = static_cast<double>(neg);
  return (rank_sum - pd * (pd + 1.0) / 2.0) / (pd * nd);
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
  validate_binary(scores, labels, "auprc");
  const size_t n = scores.size();
  const size_t pos = count_positives(labels);
  if (pos == 0) throw EvalError("auprc undefined: no positive labels");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  // Walk thresholds in descending order; a block of tied scores is one
  // threshold step.
  double area = 0.0;
  size_t tp = 0, seen = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    size_t block_tp = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      block_tp += static_cast<size_t>(labels[order[j]]);
      ++j;
    }
    tp += block_tp;
    seen = j;
    const double precision =
        static_cast<double>(tp) / static_cast<double>(seen);
    area += precision * static_cast<double>(block_tp);
    i = j;
  }
  return area / static_cast<double>(pos);
}

MetricReport compute_metrics(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  validate_binary(scores, labels, "metrics");
  MetricReport report;
  report.positives = count_positives(labels);
  report.negatives = labels.size() - report.positives;
  report.auroc = auroc(scores, labels);
  report.auprc = auprc(scores, labels);
  return report;
}

MetricReport compute_multilabel_metrics(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::vector<int>>& labels) {
  if (scores.empty()) throw EvalError("macro_auc undefined: no labels");
  if (scores.size() != labels.size())
    throw ContractError("multilabel metrics: column counts differ");
  MetricReport report;
  double macro_sum = 0.0;
  std::vector<double> flat_scores;
  std::vector<int> flat_labels;
  for (size_t c = 0; c < scores.size(); ++c) {
    macro_sum += auroc(scores[c], labels[c]);
    flat_scores.insert(flat_scores.end(), scores[c].begin(), scores[c].end());
    flat_labels.insert(flat_labels.end(), labels[c].begin(), labels[c].end());
    report.positives += count_positives(labels[c]);
    report.negatives += labels[c].size() - count_positives(labels[c]);
  }
  report.macro_auc = macro_sum / static_cast<double>(scores.size());
  report.micro_auc = auroc(flat_scores, flat_labels);
  return report;
}

}  // namespace kgicu
