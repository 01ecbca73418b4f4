#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kgicu/errors.hpp"
#include "kgicu/losses.hpp"
#include "kgicu/metrics.hpp"
#include "kgicu/rng.hpp"
#include "kgicu/tensor.hpp"

using namespace kgicu;

namespace {

// O(n^2) pairwise oracle: P(score_pos > score_neg) + 0.5 P(tie).
double auroc_pairwise(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  double wins = 0.0;
  size_t pos = 0, neg = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++pos;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  for (int y : labels) neg += (y == 0);
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Step-integration oracle: precision at each positive's threshold, averaged
// over positives; walks per-positive instead of per-block.
double auprc_step(const std::vector<double>& scores,
                  const std::vector<int>& labels) {
  double total = 0.0;
  size_t pos = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++pos;
    size_t at_or_above = 0, pos_at_or_above = 0;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] >= scores[i]) {
        ++at_or_above;
        pos_at_or_above += static_cast<size_t>(labels[j]);
      }
    }
    total += static_cast<double>(pos_at_or_above) /
             static_cast<double>(at_or_above);
  }
  return total / static_cast<double>(pos);
}

}  // namespace

TEST_CASE("perfect ranking gives both areas = 1") {
  std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};
  std::vector<int> labels = {1, 1, 0, 0};
  CHECK(auroc(scores, labels) == 1.0);
  CHECK(auprc(scores, labels) == 1.0);
}

TEST_CASE("all-tied scores give AuROC 0.5") {
  std::vector<double> scores = {0.5, 0.5, 0.5, 0.5, 0.5};
  std::vector<int> labels = {1, 0, 1, 0, 0};
  CHECK(auroc(scores, labels) == doctest::Approx(0.5));
}

TEST_CASE("single-class inputs raise errors naming the metric") {
  std::vector<double> scores = {0.1, 0.2};
  CHECK_THROWS_WITH_AS(auroc(scores, {1, 1}), doctest::Contains("auroc"),
                       EvalError);
  CHECK_THROWS_WITH_AS(auroc(scores, {0, 0}), doctest::Contains("auroc"),
                       EvalError);
  CHECK_THROWS_WITH_AS(auprc(scores, {0, 0}), doctest::Contains("auprc"),
                       EvalError);
}

TEST_CASE("random instances match the brute-force oracles") {
  Rng rng(314);
  for (int instance = 0; instance < 100; ++instance) {
    const size_t n = static_cast<size_t>(rng.uniform_int(2, 200));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < n; ++i) {
      // Coarse grid so ties actually occur.
      scores[i] = std::round(rng.uniform() * 20.0) / 20.0;
      labels[i] = rng.bernoulli(0.3) ? 1 : 0;
      (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[n - 1] = 0;
    if (n == 2) {
      labels[0] = 1;
      labels[1] = 0;
    }
    CHECK(auroc(scores, labels) == auroc_pairwise(scores, labels));
    CHECK(std::abs(auprc(scores, labels) - auprc_step(scores, labels)) < 1e-9);
  }
}

TEST_CASE("compute_metrics fills counts and both areas") {
  auto report = compute_metrics({0.9, 0.3, 0.6}, {1, 0, 0});
  CHECK(report.positives == 1);
  CHECK(report.negatives == 2);
  CHECK(report.auroc.has_value());
  CHECK(report.auprc.has_value());
  CHECK_FALSE(report.macro_auc.has_value());
}

TEST_CASE("multilabel metrics: macro is the per-label mean") {
  std::vector<std::vector<double>> scores = {{0.9, 0.1, 0.8, 0.2},
                                             {0.4, 0.6, 0.3, 0.7}};
  std::vector<std::vector<int>> labels = {{1, 0, 1, 0}, {1, 0, 0, 1}};
  auto report = compute_multilabel_metrics(scores, labels);
  double macro = (auroc(scores[0], labels[0]) + auroc(scores[1], labels[1])) / 2;
  CHECK(report.macro_auc == doctest::Approx(macro));
  std::vector<double> flat = {0.9, 0.1, 0.8, 0.2, 0.4, 0.6, 0.3, 0.7};
  std::vector<int> flat_labels = {1, 0, 1, 0, 1, 0, 0, 1};
  CHECK(report.micro_auc == doctest::Approx(auroc(flat, flat_labels)));
}

TEST_CASE("bce loss of p=0.5 is ln 2") {
  Tensor p(1, 3, {0.5, 0.5, 0.5});
  CHECK(bce_loss(p, {1, 0, 1}).item() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("bce loss of perfect predictions is ~0 after clamping") {
  Tensor p(1, 2, {1.0, 0.0});
  CHECK(bce_loss(p, {1, 0}).item() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("bce loss matches the hand computation") {
  Tensor p(1, 2, {0.9, 0.2});
  const double want = (-std::log(0.9) - std::log(0.8)) / 2.0;
  CHECK(bce_loss(p, {1, 0}).item() == doctest::Approx(want));
}

TEST_CASE("bce loss validates labels and sizes") {
  Tensor p(1, 2, {0.5, 0.5});
  CHECK_THROWS_AS(bce_loss(p, {1.0, 0.5}), ContractError);
  CHECK_THROWS_AS(bce_loss(p, {1.0}), ShapeError);
}

TEST_CASE("bce gradient matches finite differences") {
  Tensor p(1, 3, {0.7, 0.3, 0.5}, true);
  std::vector<double> labels = {1, 0, 1};
  Tensor loss = bce_loss(p, labels);
  backward(loss);
  for (size_t i = 0; i < 3; ++i) {
    const double eps = 1e-7;
    auto eval = [&](double delta) {
      std::vector<double> values = {0.7, 0.3, 0.5};
      values[i] += delta;
      double total = 0.0;
      for (size_t j = 0; j < 3; ++j)
        total -= labels[j] * std::log(values[j]) +
                 (1 - labels[j]) * std::log(1 - values[j]);
      return total / 3.0;
    };
    const double numeric = (eval(eps) - eval(-eps)) / (2 * eps);
    CHECK(p.grad()[i] == doctest::Approx(numeric).epsilon(1e-5));
  }
}
