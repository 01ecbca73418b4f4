#include "kgicu/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "kgicu/errors.hpp"
#include "kgicu/optim.hpp"

namespace kgicu {

namespace detail {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

}  // namespace detail

NoGradGuard::NoGradGuard() : previous_(detail::g_grad_enabled) {
  detail::g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { detail::g_grad_enabled = previous_; }

namespace {

std::string shape_str(size_t r, size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

std::string shape_str(const Tensor& t) { return shape_str(t.rows(), t.cols()); }

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined())
    throw ContractError(std::string(op) + ": undefined tensor operand");
}

}  // namespace

Tensor::Tensor(size_t rows, size_t cols, std::vector<double> values,
               bool requires_grad) {
  if (rows == 0 || cols == 0)
    throw ContractError("tensor: shape dimensions must be positive, got " +
                        shape_str(rows, cols));
  if (values.size() != rows * cols)
    throw ShapeError("tensor: " + std::to_string(values.size()) +
                     " values do not fill shape " + shape_str(rows, cols));
  node_ = std::make_shared<detail::TensorNode>();
  node_->rows = rows;
  node_->cols = cols;
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(size_t rows, size_t cols, bool requires_grad) {
  return Tensor(rows, cols, std::vector<double>(rows * cols, 0.0),
                requires_grad);
}

Tensor Tensor::full(size_t rows, size_t cols, double value) {
  return Tensor(rows, cols, std::vector<double>(rows * cols, value));
}

Tensor Tensor::scalar(double value) { return Tensor(1, 1, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  size_t n = values.size();
  return Tensor(n, 1, std::move(values));
}

size_t Tensor::rows() const { return node_ ? node_->rows : 0; }
size_t Tensor::cols() const { return node_ ? node_->cols : 0; }
size_t Tensor::size() const { return node_ ? node_->size() : 0; }

double Tensor::at(size_t r, size_t c) const {
  require_defined(*this, "at");
  if (r >= rows() || c >= cols())
    throw ShapeError("at: index (" + std::to_string(r) + "," +
                     std::to_string(c) + ") out of bounds for " +
                     shape_str(*this));
  return node_->values[r * cols() + c];
}

double Tensor::item() const {
  require_defined(*this, "item");
  if (size() != 1)
    throw ContractError("item: tensor is " + shape_str(*this) + ", not 1x1");
  return node_->values[0];
}

std::span<const double> Tensor::values() const {
  require_defined(*this, "values");
  return node_->values;
}

std::span<double> Tensor::values_mut() {
  require_defined(*this, "values_mut");
  return node_->values;
}

bool Tensor::requires_grad() const {
  return node_ != nullptr && node_->requires_grad;
}

void Tensor::set_requires_grad(bool value) {
  require_defined(*this, "set_requires_grad");
  node_->requires_grad = value;
}

bool Tensor::has_grad() const {
  return node_ != nullptr && node_->grad.size() == node_->values.size();
}

std::span<const double> Tensor::grad() const {
  require_defined(*this, "grad");
  return node_->grad;
}

std::span<double> Tensor::grad_mut() {
  require_defined(*this, "grad_mut");
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  require_defined(*this, "zero_grad");
  node_->grad.assign(node_->values.size(), 0.0);
}

std::vector<double> Tensor::to_vector() const {
  require_defined(*this, "to_vector");
  return node_->values;
}

// Creates the output node of a forward op. `fn` accumulates the output
// gradient into the parents; it is recorded only when some input needs a
// gradient and recording is enabled.
Tensor make_op_output(size_t rows, size_t cols, std::vector<double> values,
                      std::vector<Tensor> parents,
                      std::function<void(detail::TensorNode&)> fn) {
  Tensor out(rows, cols, std::move(values));
  bool needs = false;
  if (detail::grad_enabled()) {
    for (const Tensor& p : parents)
      if (p.requires_grad()) {
        needs = true;
        break;
      }
  }
  if (needs) {
    auto node = out.node();
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (Tensor& p : parents) node->parents.push_back(p.node());
    node->backprop = std::move(fn);
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions differ, " + shape_str(a) +
                     " * " + shape_str(b));
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    const double* arow = av + i * k;
    for (size_t p = 0; p < k; ++p) {
      const double aval = arow[p];
      if (aval == 0.0) continue;
      const double* brow = bv + p * n;
      for (size_t j = 0; j < n; ++j) orow[j] += aval * brow[j];
    }
  }
  return make_op_output(
      m, n, std::move(out), {a, b}, [m, k, n](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const double* g = self.grad.data();
        if (pa.requires_grad) {
          pa.ensure_grad();
          // dA = dC * B^T
          for (size_t i = 0; i < m; ++i)
            for (size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              const double* grow = g + i * n;
              const double* brow = pb.values.data() + p * n;
              for (size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              pa.grad[i * k + p] += acc;
            }
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          // dB = A^T * dC
          for (size_t i = 0; i < m; ++i) {
            const double* arow = pa.values.data() + i * k;
            const double* grow = g + i * n;
            for (size_t p = 0; p < k; ++p) {
              const double aval = arow[p];
              if (aval == 0.0) continue;
              double* brow = pb.grad.data() + p * n;
              for (size_t j = 0; j < n; ++j) brow[j] += aval * grow[j];
            }
          }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  const bool bias = b.rows() == 1 && b.cols() == a.cols();
  if (!same && !bias)
    throw ShapeError("add: shapes " + shape_str(a) + " and " + shape_str(b) +
                     " are neither equal nor (m x n) + (1 x n)");
  const size_t m = a.rows(), n = a.cols();
  std::vector<double> out(a.values().begin(), a.values().end());
  const double* bv = b.values().data();
  if (same) {
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  } else {
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  }
  return make_op_output(
      m, n, std::move(out), {a, b}, [m, n, same](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
          pa.ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i)
            pa.grad[i] += self.grad[i];
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          if (same) {
            for (size_t i = 0; i < self.grad.size(); ++i)
              pb.grad[i] += self.grad[i];
          } else {
            for (size_t i = 0; i < m; ++i)
              for (size_t j = 0; j < n; ++j) pb.grad[j] += self.grad[i * n + j];
          }
        }
      });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  require_defined(a, "multiply");
  require_defined(b, "multiply");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("multiply: shapes differ, " + shape_str(a) + " vs " +
                     shape_str(b));
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = a.values()[i] * b.values()[i];
  return make_op_output(a.rows(), a.cols(), std::move(out), {a, b},
                        [](detail::TensorNode& self) {
                          auto& pa = *self.parents[0];
                          auto& pb = *self.parents[1];
                          if (pa.requires_grad) {
                            pa.ensure_grad();
                            for (size_t i = 0; i < self.grad.size(); ++i)
                              pa.grad[i] += self.grad[i] * pb.values[i];
                          }
                          if (pb.requires_grad) {
                            pb.ensure_grad();
                            for (size_t i = 0; i < self.grad.size(); ++i)
                              pb.grad[i] += self.grad[i] * pa.values[i];
                          }
                        });
}

Tensor concat_rows(const std::vector<Tensor>& inputs) {
  if (inputs.empty())
    throw ContractError("concat_rows: requires at least one input");
  for (const Tensor& t : inputs) require_defined(t, "concat_rows");
  const size_t n = inputs[0].cols();
  size_t total = 0;
  for (const Tensor& t : inputs) {
    if (t.cols() != n)
      throw ShapeError("concat_rows: column counts differ, " +
                       std::to_string(n) + " vs " + std::to_string(t.cols()));
    total += t.rows();
  }
  std::vector<double> out;
  out.reserve(total * n);
  for (const Tensor& t : inputs)
    out.insert(out.end(), t.values().begin(), t.values().end());
  return make_op_output(total, n, std::move(out), inputs,
                        [n](detail::TensorNode& self) {
                          size_t row = 0;
                          for (auto& parent : self.parents) {
                            if (parent->requires_grad) {
                              parent->ensure_grad();
                              const double* g = self.grad.data() + row * n;
                              for (size_t i = 0; i < parent->size(); ++i)
                                parent->grad[i] += g[i];
                            }
                            row += parent->rows;
                          }
                        });
}

Tensor row_softmax(const Tensor& a) {
  require_defined(a, "row_softmax");
  const size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  for (size_t i = 0; i < m; ++i) {
    const double* x = a.values().data() + i * n;
    double* y = out.data() + i * n;
    double mx = x[0];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (size_t j = 0; j < n; ++j) y[j] /= sum;
  }
  return make_op_output(
      m, n, std::move(out), {a}, [m, n](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < m; ++i) {
          const double* y = self.values.data() + i * n;
          const double* g = self.grad.data() + i * n;
          double dot = 0.0;
          for (size_t j = 0; j < n; ++j) dot += g[j] * y[j];
          for (size_t j = 0; j < n; ++j)
            p.grad[i * n + j] += y[j] * (g[j] - dot);
        }
      });
}

namespace {

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Shared plumbing for elementwise unary ops: dy/dx as a function of (x, y).
template <typename Fwd, typename Dfn>
Tensor unary_elementwise(const Tensor& a, const char* name, Fwd fwd, Dfn dfn) {
  require_defined(a, name);
  std::vector<double> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(a.values()[i]);
  return make_op_output(a.rows(), a.cols(), std::move(out), {a},
                        [dfn](detail::TensorNode& self) {
                          auto& p = *self.parents[0];
                          if (!p.requires_grad) return;
                          p.ensure_grad();
                          for (size_t i = 0; i < self.grad.size(); ++i)
                            p.grad[i] += self.grad[i] *
                                         dfn(p.values[i], self.values[i]);
                        });
}

}  // namespace

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      a, "sigmoid", [](double x) { return sigmoid_scalar(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_op(const Tensor& a) {
  return unary_elementwise(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a) {
  constexpr double kSlope = 0.2;
  return unary_elementwise(
      a, "leaky_relu", [](double x) { return x > 0.0 ? x : kSlope * x; },
      [](double x, double) { return x > 0.0 ? 1.0 : kSlope; });
}

namespace {

enum class Reduce { Sum, Mean, Max };

Tensor reduce_rows(const Tensor& a, Reduce mode, const char* name) {
  require_defined(a, name);
  const size_t m = a.rows(), n = a.cols();
  std::vector<double> out(n, 0.0);
  std::vector<size_t> argmax(mode == Reduce::Max ? n : 0, 0);
  if (mode == Reduce::Max) {
    for (size_t j = 0; j < n; ++j) out[j] = a.values()[j];
    for (size_t i = 1; i < m; ++i)
      for (size_t j = 0; j < n; ++j) {
        double v = a.values()[i * n + j];
        if (v > out[j]) {
          out[j] = v;
          argmax[j] = i;
        }
      }
  } else {
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < n; ++j) out[j] += a.values()[i * n + j];
    if (mode == Reduce::Mean)
      for (size_t j = 0; j < n; ++j) out[j] /= static_cast<double>(m);
  }
  return make_op_output(
      1, n, std::move(out), {a},
      [m, n, mode, argmax = std::move(argmax)](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        switch (mode) {
          case Reduce::Sum:
            for (size_t i = 0; i < m; ++i)
              for (size_t j = 0; j < n; ++j) p.grad[i * n + j] += self.grad[j];
            break;
          case Reduce::Mean: {
            const double inv = 1.0 / static_cast<double>(m);
            for (size_t i = 0; i < m; ++i)
              for (size_t j = 0; j < n; ++j)
                p.grad[i * n + j] += self.grad[j] * inv;
            break;
          }
          case Reduce::Max:
            // Ties route to the first maximal row.
            for (size_t j = 0; j < n; ++j)
              p.grad[argmax[j] * n + j] += self.grad[j];
            break;
        }
      });
}

}  // namespace

Tensor sum_rows(const Tensor& a) { return reduce_rows(a, Reduce::Sum, "sum_rows"); }
Tensor mean_rows(const Tensor& a) {
  return reduce_rows(a, Reduce::Mean, "mean_rows");
}
Tensor max_rows(const Tensor& a) { return reduce_rows(a, Reduce::Max, "max_rows"); }

Tensor slice_rows(const Tensor& a, size_t row_begin, size_t row_end) {
  require_defined(a, "slice_rows");
  if (row_begin >= row_end || row_end > a.rows())
    throw ShapeError("slice_rows: range [" + std::to_string(row_begin) + "," +
                     std::to_string(row_end) + ") invalid for " +
                     shape_str(a));
  const size_t n = a.cols();
  std::vector<double> out(a.values().begin() + row_begin * n,
                          a.values().begin() + row_end * n);
  return make_op_output((row_end - row_begin), n, std::move(out), {a},
                        [row_begin, n](detail::TensorNode& self) {
                          auto& p = *self.parents[0];
                          if (!p.requires_grad) return;
                          p.ensure_grad();
                          double* g = p.grad.data() + row_begin * n;
                          for (size_t i = 0; i < self.grad.size(); ++i)
                            g[i] += self.grad[i];
                        });
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  const size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out[j * m + i] = a.values()[i * n + j];
  return make_op_output(n, m, std::move(out), {a},
                        [m, n](detail::TensorNode& self) {
                          auto& p = *self.parents[0];
                          if (!p.requires_grad) return;
                          p.ensure_grad();
                          for (size_t i = 0; i < m; ++i)
                            for (size_t j = 0; j < n; ++j)
                              p.grad[i * n + j] += self.grad[j * m + i];
                        });
}

namespace {

void expect_arity(OpKind kind, const std::vector<Tensor>& inputs, size_t want) {
  if (inputs.size() != want)
    throw ContractError("forward_op: op kind " +
                        std::to_string(static_cast<int>(kind)) + " expects " +
                        std::to_string(want) + " inputs, got " +
                        std::to_string(inputs.size()));
}

}  // namespace

Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs) {
  switch (kind) {
    case OpKind::MatMul:
      expect_arity(kind, inputs, 2);
      return matmul(inputs[0], inputs[1]);
    case OpKind::Add:
      expect_arity(kind, inputs, 2);
      return add(inputs[0], inputs[1]);
    case OpKind::Multiply:
      expect_arity(kind, inputs, 2);
      return multiply(inputs[0], inputs[1]);
    case OpKind::ConcatRows:
      return concat_rows(inputs);
    case OpKind::RowSoftmax:
      expect_arity(kind, inputs, 1);
      return row_softmax(inputs[0]);
    case OpKind::Sigmoid:
      expect_arity(kind, inputs, 1);
      return sigmoid(inputs[0]);
    case OpKind::Tanh:
      expect_arity(kind, inputs, 1);
      return tanh_op(inputs[0]);
    case OpKind::Relu:
      expect_arity(kind, inputs, 1);
      return relu(inputs[0]);
    case OpKind::LeakyRelu:
      expect_arity(kind, inputs, 1);
      return leaky_relu(inputs[0]);
    case OpKind::SumRows:
      expect_arity(kind, inputs, 1);
      return sum_rows(inputs[0]);
    case OpKind::MeanRows:
      expect_arity(kind, inputs, 1);
      return mean_rows(inputs[0]);
    case OpKind::MaxRows:
      expect_arity(kind, inputs, 1);
      return max_rows(inputs[0]);
    case OpKind::Transpose:
      expect_arity(kind, inputs, 1);
      return transpose(inputs[0]);
    case OpKind::SliceRows:
      throw ContractError("forward_op: slice-rows requires row bounds");
  }
  throw ContractError("forward_op: unknown op kind");
}

Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs,
                  size_t row_begin, size_t row_end) {
  if (kind != OpKind::SliceRows)
    throw ContractError("forward_op: row bounds only apply to slice-rows");
  expect_arity(kind, inputs, 1);
  return slice_rows(inputs[0], row_begin, row_end);
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw ContractError("backward: undefined loss tensor");
  auto root = loss.node();
  if (root->size() != 1)
    throw ContractError("backward: loss must be scalar (1x1), got " +
                        shape_str(loss));
  if (root->spent)
    throw StateError(
        "backward: tape already consumed; re-run the forward pass first");

  // Post-order over parent edges (iterative; tapes can be deep).
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> seen;
  struct Frame {
    detail::TensorNode* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get(), 0});
  seen.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.node->spent)
      throw StateError(
          "backward: encountered a node from an already-consumed tape");
    if (f.next_parent < f.node->parents.size()) {
      detail::TensorNode* p = f.node->parents[f.next_parent++].get();
      if (seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* node = *it;
    if (node->backprop) {
      node->ensure_grad();
      node->backprop(*node);
    }
  }
  // Release the tape: interior nodes drop their closures and buffers, and
  // are flagged so reuse is caught loudly. Leaves keep their gradients.
  for (detail::TensorNode* node : order) {
    if (node->backprop) {
      node->backprop = nullptr;
      node->parents.clear();
      node->grad.clear();
      node->spent = true;
    }
  }
  root->spent = true;
}

void backward(const Tensor& loss, ParameterSet& params) {
  backward(loss);
  for (auto& [path, tensor] : params) tensor.node()->ensure_grad();
}

}  // namespace kgicu
