#pragma once

#include <string>
#include <vector>

#include "kgicu/optim.hpp"
#include "kgicu/rng.hpp"
#include "kgicu/tensor.hpp"

namespace kgicu {

// Gated recurrent cell (LSTM) parameters: per-gate input and recurrent
// transforms plus biases.
struct RecurrentParams {
  Tensor w_input, w_forget, w_output, w_cell;  // d x h
  Tensor u_input, u_forget, u_output, u_cell;  // h x h
  Tensor b_input, b_forget, b_output, b_cell;  // 1 x h

  size_t input_dim() const { return w_input.rows(); }
  size_t hidden_dim() const { return w_input.cols(); }

  static RecurrentParams create(ParameterSet& params, const std::string& prefix,
                                size_t input_dim, size_t hidden_dim, Rng& rng);
  static RecurrentParams from(const ParameterSet& params,
                              const std::string& prefix);
};

// Runs the cell over the sequence from zero initial state and returns the
// hidden state at every step.
std::vector<Tensor> recurrent_forward(const std::vector<Tensor>& steps,
                                      const RecurrentParams& params);

enum class TaskKind { Mortality, Decompensation, Phenotyping };

const char* to_string(TaskKind task);
size_t task_output_dim(TaskKind task);

// Mortality consumes exactly the first 48 hourly steps of a stay.
inline constexpr size_t kMortalityWindowSteps = 48;

// Two-layer feed-forward head: hidden -> hidden/2 -> out, relu between,
// sigmoid on the way out.
struct HeadParams {
  Tensor w1, b1;  // h x h/2
  Tensor w2, b2;  // h/2 x out

  static HeadParams create(ParameterSet& params, const std::string& prefix,
                           size_t hidden_dim, size_t out_dim, Rng& rng);
  static HeadParams from(const ParameterSet& params, const std::string& prefix);
};

Tensor apply_head(const Tensor& hidden, const HeadParams& head);

// Task predictions as probability tensors:
//   mortality       -> one 1x1 tensor from the hidden state at hour 48
//   decompensation  -> one 1x1 tensor per step
//   phenotyping     -> one 1x25 tensor from the final hidden state
std::vector<Tensor> predict(TaskKind task, const std::vector<Tensor>& hiddens,
                            const HeadParams& head);

}  // namespace kgicu
