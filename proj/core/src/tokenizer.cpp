#include "kgicu/tokenizer.hpp"

#include <cmath>

#include "kgicu/errors.hpp"

namespace kgicu {

namespace {

Tensor glorot(size_t rows, size_t cols, Rng& rng) {
  const double scale =
      std::sqrt(2.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (double& x : v) x = scale * rng.normal();
  return Tensor(rows, cols, std::move(v));
}

}  // namespace

TokenizerParams TokenizerParams::create(ParameterSet& params,
                                        const std::string& prefix, size_t n_vs,
                                        size_t dim, Rng& rng) {
  TokenizerParams p;
  p.weight = params.add(prefix + ".weight", glorot(n_vs, dim, rng));
  p.bias = params.add(prefix + ".bias", Tensor::zeros(n_vs, dim));
  p.missing = params.add(prefix + ".missing", glorot(n_vs, dim, rng));
  return p;
}

TokenizerParams TokenizerParams::from(const ParameterSet& params,
                                      const std::string& prefix) {
  TokenizerParams p;
  p.weight = params.at(prefix + ".weight");
  p.bias = params.at(prefix + ".bias");
  p.missing = params.at(prefix + ".missing");
  return p;
}

Tensor feature_tokenize(const std::vector<double>& x,
                        const std::vector<bool>& missing_mask,
                        const TokenizerParams& params) {
  const size_t n = params.n_vs();
  if (x.size() != n || missing_mask.size() != n)
    throw ShapeError("feature_tokenize: expected " + std::to_string(n) +
                     " measurements, got " + std::to_string(x.size()) +
                     " values / " + std::to_string(missing_mask.size()) +
                     " mask bits");
  // Diagonal selectors: observed rows get x_j * W_j + b_j, masked rows m_j.
  std::vector<double> dx(n * n, 0.0), dp(n * n, 0.0), dm(n * n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    if (missing_mask[j]) {
      dm[j * n + j] = 1.0;
    } else {
      if (!std::isfinite(x[j]))
        throw DataError("feature_tokenize: non-finite value in channel " +
                        std::to_string(j) + " marked as observed");
      dx[j * n + j] = x[j];
      dp[j * n + j] = 1.0;
    }
  }
  Tensor scaled = matmul(Tensor(n, n, std::move(dx)), params.weight);
  Tensor biased = matmul(Tensor(n, n, std::move(dp)), params.bias);
  Tensor masked = matmul(Tensor(n, n, std::move(dm)), params.missing);
  return add(add(scaled, biased), masked);
}

}  // namespace kgicu
