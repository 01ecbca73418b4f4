#include "kgicu/losses.hpp"

#include <algorithm>
#include <cmath>

#include "kgicu/errors.hpp"

namespace kgicu {

namespace {
constexpr double kClamp = 1e-12;
}

Tensor bce_loss(const Tensor& probabilities, const std::vector<double>& labels) {
  if (!probabilities.defined())
    throw ContractError("bce_loss: undefined probabilities");
  if (labels.size() != probabilities.size())
    throw ShapeError("bce_loss: " + std::to_string(labels.size()) +
                     " labels vs " + std::to_string(probabilities.size()) +
                     " probabilities");
  for (double y : labels)
    if (y != 0.0 && y != 1.0)
      throw ContractError("bce_loss: labels must be 0 or 1");

  const size_t count = labels.size();
  auto p = probabilities.values();
  double total = 0.0;
  for (size_t i = 0; i < count; ++i) {
    const double pc = std::clamp(p[i], kClamp, 1.0 - kClamp);
    total -= labels[i] * std::log(pc) + (1.0 - labels[i]) * std::log(1.0 - pc);
  }
  std::vector<double> out = {total / static_cast<double>(count)};

  return make_op_output(
      1, 1, std::move(out), {probabilities},
      [labels, count](detail::TensorNode& self) {
        auto& parent = *self.parents[0];
        if (!parent.requires_grad) return;
        parent.ensure_grad();
        const double g = self.grad[0] / static_cast<double>(count);
        for (size_t i = 0; i < count; ++i) {
          const double raw = parent.values[i];
          // Zero slope in the clamped region (derivative of the clamp).
          if (raw <= kClamp || raw >= 1.0 - kClamp) continue;
          parent.grad[i] += g * (raw - labels[i]) / (raw * (1.0 - raw));
        }
      });
}

}  // namespace kgicu
