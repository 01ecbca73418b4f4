#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kgicu/tensor.hpp"

namespace kgicu {

// Named map of trainable tensors. Iteration order is lexicographic in the
// parameter path, which keeps checkpoints and optimizer traversal
// deterministic.
class ParameterSet {
 public:
  // Registers a tensor under a unique dot-separated path and marks it
  // trainable. Returns the stored handle.
  Tensor& add(const std::string& path, Tensor tensor);

  bool contains(const std::string& path) const;
  Tensor& at(const std::string& path);
  const Tensor& at(const std::string& path) const;

  size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }
  size_t total_values() const;

  void zero_grads();

  // Deep copy: fresh nodes holding the same values (gradients not copied).
  ParameterSet clone() const;
  // Copies values from `other` into this set; paths and shapes must match.
  void load_values(const ParameterSet& other);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Tensor> params_;
};

// Adaptive-moment optimizer state and update rule (bias-corrected).
struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config = {}) : config_(config) {}

  // Applies one update from the accumulated gradients, then zeroes them.
  // Every parameter must have a populated gradient.
  void step(ParameterSet& params);

  int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  int64_t step_count_ = 0;
  std::map<std::string, std::vector<double>> first_moment_;
  std::map<std::string, std::vector<double>> second_moment_;
};

// Compares analytic gradients against central finite differences.
// `loss_fn` must map the parameters to a scalar loss deterministically.
// Returns max over all parameter entries of
//   |analytic - numeric| / max(1, |numeric|).
using LossFn = std::function<Tensor(ParameterSet&)>;
double grad_check(const LossFn& loss_fn, ParameterSet& params,
                  double eps = 1e-5);

}  // namespace kgicu
