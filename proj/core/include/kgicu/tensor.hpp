#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace kgicu {

class ParameterSet;

enum class OpKind {
  MatMul,
  Add,
  Multiply,
  ConcatRows,
  RowSoftmax,
  Sigmoid,
  Tanh,
  Relu,
  LeakyRelu,  // fixed slope 0.2
  SumRows,
  MeanRows,
  MaxRows,
  SliceRows,
  Transpose,
};

namespace detail {

struct TensorNode {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;
  std::vector<double> grad;  // empty or values.size()
  bool requires_grad = false;
  // Set once a backward pass has consumed this node's recorded operation.
  bool spent = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;

  size_t size() const { return rows * cols; }
  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

// While a guard is alive, forward ops do not record backprop closures.
bool grad_enabled();

}  // namespace detail

// Suspends tape recording for pure evaluation passes.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Dense 2-D matrix of doubles with reverse-mode gradients. A Tensor is a
// cheap handle; copies share storage. Forward operations record the
// computation so backward() can later populate input gradients. Shapes are
// strictly positive: no 0-row or 0-column tensors exist.
class Tensor {
 public:
  Tensor() = default;
  Tensor(size_t rows, size_t cols, std::vector<double> values,
         bool requires_grad = false);

  static Tensor zeros(size_t rows, size_t cols, bool requires_grad = false);
  static Tensor full(size_t rows, size_t cols, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);     // 1 x n
  static Tensor column(std::vector<double> values);  // n x 1

  bool defined() const { return node_ != nullptr; }
  size_t rows() const;
  size_t cols() const;
  size_t size() const;
  std::vector<size_t> shape() const { return {rows(), cols()}; }

  double at(size_t r, size_t c) const;
  double item() const;  // requires 1x1

  std::span<const double> values() const;
  std::span<double> values_mut();

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void zero_grad();

  std::vector<double> to_vector() const;

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;

  friend Tensor make_op_output(size_t rows, size_t cols,
                               std::vector<double> values,
                               std::vector<Tensor> parents,
                               std::function<void(detail::TensorNode&)> fn);
};

// Internal building block for forward ops: allocates the output node and,
// when recording is enabled and some parent needs gradients, wires the
// parents and the backward closure. Exposed so ops defined outside
// tensor.cpp (e.g. fused losses) can join the tape.
Tensor make_op_output(size_t rows, size_t cols, std::vector<double> values,
                      std::vector<Tensor> parents,
                      std::function<void(detail::TensorNode&)> fn);

Tensor matmul(const Tensor& a, const Tensor& b);
// Elementwise add of equal shapes, or a row-broadcast bias: (m x n) + (1 x n).
Tensor add(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& inputs);
Tensor row_softmax(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a);  // slope 0.2
Tensor sum_rows(const Tensor& a);    // (m x n) -> (1 x n)
Tensor mean_rows(const Tensor& a);
Tensor max_rows(const Tensor& a);
Tensor slice_rows(const Tensor& a, size_t row_begin, size_t row_end);
Tensor transpose(const Tensor& a);

// Dispatcher over the op kinds above. SliceRows requires the overload with
// row bounds.
Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs);
Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs,
                  size_t row_begin, size_t row_end);

// Reverse pass from a scalar loss. Gradients accumulate into every
// requires_grad leaf that participated; the tape is released afterwards and
// a second backward over the same tape raises StateError.
void backward(const Tensor& loss);
// Same, but additionally guarantees each parameter in `params` has an
// allocated (possibly zero) gradient.
void backward(const Tensor& loss, ParameterSet& params);

}  // namespace kgicu
