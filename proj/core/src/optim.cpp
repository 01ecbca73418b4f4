#include "kgicu/optim.hpp"

#include <cmath>

#include "kgicu/errors.hpp"

namespace kgicu {

Tensor& ParameterSet::add(const std::string& path, Tensor tensor) {
  if (path.empty()) throw ContractError("parameter path must be nonempty");
  if (!tensor.defined())
    throw ContractError("parameter '" + path + "' is undefined");
  auto [it, inserted] = params_.emplace(path, std::move(tensor));
  if (!inserted)
    throw ContractError("duplicate parameter path '" + path + "'");
  it->second.set_requires_grad(true);
  return it->second;
}

bool ParameterSet::contains(const std::string& path) const {
  return params_.count(path) != 0;
}

Tensor& ParameterSet::at(const std::string& path) {
  auto it = params_.find(path);
  if (it == params_.end())
    throw ContractError("unknown parameter path '" + path + "'");
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& path) const {
  auto it = params_.find(path);
  if (it == params_.end())
    throw ContractError("unknown parameter path '" + path + "'");
  return it->second;
}

size_t ParameterSet::total_values() const {
  size_t total = 0;
  for (const auto& [path, t] : params_) total += t.size();
  return total;
}

void ParameterSet::zero_grads() {
  for (auto& [path, t] : params_) t.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet copy;
  for (const auto& [path, t] : params_)
    copy.add(path, Tensor(t.rows(), t.cols(), t.to_vector()));
  return copy;
}

void ParameterSet::load_values(const ParameterSet& other) {
  if (other.size() != size())
    throw ContractError("load_values: parameter sets differ in size");
  for (auto& [path, t] : params_) {
    const Tensor& src = other.at(path);
    if (src.rows() != t.rows() || src.cols() != t.cols())
      throw ContractError("load_values: shape mismatch for '" + path + "'");
    auto dst = t.values_mut();
    auto sv = src.values();
    std::copy(sv.begin(), sv.end(), dst.begin());
  }
}

void AdamOptimizer::step(ParameterSet& params) {
  for (auto& [path, t] : params)
    if (!t.has_grad())
      throw ContractError("optimizer step: parameter '" + path +
                          "' has no gradient");

  ++step_count_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));

  for (auto& [path, t] : params) {
    auto& m = first_moment_[path];
    auto& v = second_moment_[path];
    if (m.empty()) m.assign(t.size(), 0.0);
    if (v.empty()) v.assign(t.size(), 0.0);
    if (m.size() != t.size() || v.size() != t.size())
      throw ContractError("optimizer step: moment shape mismatch for '" +
                          path + "'");
    auto values = t.values_mut();
    auto grad = t.grad_mut();
    for (size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      values[i] -=
          config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
  params.zero_grads();
}

double grad_check(const LossFn& loss_fn, ParameterSet& params, double eps) {
  if (eps <= 0.0) throw ContractError("grad_check: eps must be positive");

  auto evaluate = [&]() {
    NoGradGuard guard;
    return loss_fn(params).item();
  };

  const double probe1 = evaluate();
  const double probe2 = evaluate();
  if (probe1 != probe2)
    throw ContractError(
        "grad_check: loss function is not deterministic (two evaluations "
        "differ)");

  params.zero_grads();
  Tensor loss = loss_fn(params);
  backward(loss, params);

  std::map<std::string, std::vector<double>> analytic;
  for (auto& [path, t] : params)
    analytic[path].assign(t.grad().begin(), t.grad().end());

  double max_rel = 0.0;
  for (auto& [path, t] : params) {
    auto values = t.values_mut();
    for (size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + eps;
      const double plus = evaluate();
      values[i] = original - eps;
      const double minus = evaluate();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double rel = std::abs(analytic[path][i] - numeric) /
                         std::max(1.0, std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace kgicu
