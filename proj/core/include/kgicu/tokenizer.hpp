#pragma once

#include <string>
#include <vector>

#include "kgicu/optim.hpp"
#include "kgicu/rng.hpp"
#include "kgicu/tensor.hpp"

namespace kgicu {

// Feature tokenizer: one affine map per vital-sign channel plus a learned
// embedding that stands in for the channel when the measurement is missing.
struct TokenizerParams {
  Tensor weight;   // n_vs x d, row j scales measurement j
  Tensor bias;     // n_vs x d
  Tensor missing;  // n_vs x d, row j replaces a masked measurement j

  size_t n_vs() const { return weight.rows(); }
  size_t dim() const { return weight.cols(); }

  static TokenizerParams create(ParameterSet& params, const std::string& prefix,
                                size_t n_vs, size_t dim, Rng& rng);
  static TokenizerParams from(const ParameterSet& params,
                              const std::string& prefix);
};

// Row j of the result is x[j] * W_j + b_j for observed channels and m_j for
// masked ones.
Tensor feature_tokenize(const std::vector<double>& x,
                        const std::vector<bool>& missing_mask,
                        const TokenizerParams& params);

}  // namespace kgicu
