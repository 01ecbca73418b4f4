#pragma once

#include <vector>

#include "kgicu/tensor.hpp"

namespace kgicu {

// Mean binary cross-entropy over all entries of `probabilities` against
// fixed 0/1 labels. Probabilities are clamped to [1e-12, 1-1e-12] before
// the logs. Differentiable with respect to the probabilities.
Tensor bce_loss(const Tensor& probabilities, const std::vector<double>& labels);

}  // namespace kgicu
