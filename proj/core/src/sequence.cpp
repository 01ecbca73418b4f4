#include "kgicu/sequence.hpp"

#include <cmath>

#include "kgicu/errors.hpp"

namespace kgicu {

namespace {

Tensor glorot(size_t rows, size_t cols, Rng& rng) {
  const double scale = std::sqrt(2.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (double& x : v) x = scale * rng.normal();
  return Tensor(rows, cols, std::move(v));
}

}  // namespace

RecurrentParams RecurrentParams::create(ParameterSet& params,
                                        const std::string& prefix,
                                        size_t input_dim, size_t hidden_dim,
                                        Rng& rng) {
  RecurrentParams p;
  p.w_input = params.add(prefix + ".w_input", glorot(input_dim, hidden_dim, rng));
  p.w_forget = params.add(prefix + ".w_forget", glorot(input_dim, hidden_dim, rng));
  p.w_output = params.add(prefix + ".w_output", glorot(input_dim, hidden_dim, rng));
  p.w_cell = params.add(prefix + ".w_cell", glorot(input_dim, hidden_dim, rng));
  p.u_input = params.add(prefix + ".u_input", glorot(hidden_dim, hidden_dim, rng));
  p.u_forget = params.add(prefix + ".u_forget", glorot(hidden_dim, hidden_dim, rng));
  p.u_output = params.add(prefix + ".u_output", glorot(hidden_dim, hidden_dim, rng));
  p.u_cell = params.add(prefix + ".u_cell", glorot(hidden_dim, hidden_dim, rng));
  p.b_input = params.add(prefix + ".b_input", Tensor::zeros(1, hidden_dim));
  // Forget gate opens at init so early training retains state.
  p.b_forget = params.add(prefix + ".b_forget", Tensor::full(1, hidden_dim, 1.0));
  p.b_output = params.add(prefix + ".b_output", Tensor::zeros(1, hidden_dim));
  p.b_cell = params.add(prefix + ".b_cell", Tensor::zeros(1, hidden_dim));
  return p;
}

RecurrentParams RecurrentParams::from(const ParameterSet& params,
                                      const std::string& prefix) {
  RecurrentParams p;
  p.w_input = params.at(prefix + ".w_input");
  p.w_forget = params.at(prefix + ".w_forget");
  p.w_output = params.at(prefix + ".w_output");
  p.w_cell = params.at(prefix + ".w_cell");
  p.u_input = params.at(prefix + ".u_input");
  p.u_forget = params.at(prefix + ".u_forget");
  p.u_output = params.at(prefix + ".u_output");
  p.u_cell = params.at(prefix + ".u_cell");
  p.b_input = params.at(prefix + ".b_input");
  p.b_forget = params.at(prefix + ".b_forget");
  p.b_output = params.at(prefix + ".b_output");
  p.b_cell = params.at(prefix + ".b_cell");
  return p;
}

std::vector<Tensor> recurrent_forward(const std::vector<Tensor>& steps,
                                      const RecurrentParams& params) {
  if (steps.empty())
    throw ContractError("recurrent_forward: requires at least one step");
  const size_t d = params.input_dim();
  const size_t h = params.hidden_dim();
  Tensor hidden = Tensor::zeros(1, h);
  Tensor cell = Tensor::zeros(1, h);
  std::vector<Tensor> hiddens;
  hiddens.reserve(steps.size());
  for (const Tensor& x : steps) {
    if (x.rows() != 1 || x.cols() != d)
      throw ShapeError("recurrent_forward: step is " +
                       std::to_string(x.rows()) + "x" +
                       std::to_string(x.cols()) + ", expected 1x" +
                       std::to_string(d));
    auto gate = [&](const Tensor& w, const Tensor& u, const Tensor& b) {
      return add(add(matmul(x, w), matmul(hidden, u)), b);
    };
    Tensor in_gate = sigmoid(gate(params.w_input, params.u_input, params.b_input));
    Tensor forget = sigmoid(gate(params.w_forget, params.u_forget, params.b_forget));
    Tensor out_gate =
        sigmoid(gate(params.w_output, params.u_output, params.b_output));
    Tensor candidate = tanh_op(gate(params.w_cell, params.u_cell, params.b_cell));
    cell = add(multiply(forget, cell), multiply(in_gate, candidate));
    hidden = multiply(out_gate, tanh_op(cell));
    hiddens.push_back(hidden);
  }
  return hiddens;
}

const char* to_string(TaskKind task) {
  switch (task) {
    case TaskKind::Mortality:
      return "mortality";
    case TaskKind::Decompensation:
      return "decomp";
    case TaskKind::Phenotyping:
      return "pheno";
  }
  return "?";
}

size_t task_output_dim(TaskKind task) {
  return task == TaskKind::Phenotyping ? 25 : 1;
}

HeadParams HeadParams::create(ParameterSet& params, const std::string& prefix,
                              size_t hidden_dim, size_t out_dim, Rng& rng) {
  const size_t mid = std::max<size_t>(1, hidden_dim / 2);
  HeadParams head;
  head.w1 = params.add(prefix + ".w1", glorot(hidden_dim, mid, rng));
  head.b1 = params.add(prefix + ".b1", Tensor::zeros(1, mid));
  head.w2 = params.add(prefix + ".w2", glorot(mid, out_dim, rng));
  head.b2 = params.add(prefix + ".b2", Tensor::zeros(1, out_dim));
  return head;
}

HeadParams HeadParams::from(const ParameterSet& params,
                            const std::string& prefix) {
  HeadParams head;
  head.w1 = params.at(prefix + ".w1");
  head.b1 = params.at(prefix + ".b1");
  head.w2 = params.at(prefix + ".w2");
  head.b2 = params.at(prefix + ".b2");
  return head;
}

Tensor apply_head(const Tensor& hidden, const HeadParams& head) {
  Tensor mid = relu(add(matmul(hidden, head.w1), head.b1));
  return sigmoid(add(matmul(mid, head.w2), head.b2));
}

std::vector<Tensor> predict(TaskKind task, const std::vector<Tensor>& hiddens,
                            const HeadParams& head) {
  if (hiddens.empty()) throw ContractError("predict: no hidden states");
  switch (task) {
    case TaskKind::Mortality:
      if (hiddens.size() < kMortalityWindowSteps)
        throw EvalError("mortality prediction requires at least " +
                        std::to_string(kMortalityWindowSteps) +
                        " steps, episode has " +
                        std::to_string(hiddens.size()));
      return {apply_head(hiddens[kMortalityWindowSteps - 1], head)};
    case TaskKind::Decompensation: {
      std::vector<Tensor> out;
      out.reserve(hiddens.size());
      for (const Tensor& h : hiddens) out.push_back(apply_head(h, head));
      return out;
    }
    case TaskKind::Phenotyping:
      return {apply_head(hiddens.back(), head)};
  }
  throw ContractError("predict: unknown task");
}

}  // namespace kgicu
