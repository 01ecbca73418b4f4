#pragma once

#include <optional>
#include <vector>

namespace kgicu {

struct MetricReport {
  std::optional<double> auprc;
  std::optional<double> auroc;
  std::optional<double> macro_auc;
  std::optional<double> micro_auc;
  size_t positives = 0;
  size_t negatives = 0;
};

// Rank-statistic AuROC with average ranks for ties. Raises EvalError when
// only one class is present.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Average-precision AuPRC: sum over positives of the precision at that
// positive's score threshold, divided by the positive count. Tied scores
// share one threshold.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

// Binary report: auprc + auroc + class counts.
MetricReport compute_metrics(const std::vector<double>& scores,
                             const std::vector<int>& labels);

// Multilabel report over per-label score/label columns: macro-AUC is the
// mean per-label AuROC, micro-AUC flattens all (score, label) pairs.
MetricReport compute_multilabel_metrics(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::vector<int>>& labels);

}  // namespace kgicu
