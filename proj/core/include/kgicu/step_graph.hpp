#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kgicu/tensor.hpp"

namespace kgicu {

// Tags each node of a per-timestep graph. Index layout is fixed: vitals
// occupy 0..n_vs-1, the text node sits at n_vs, knowledge-graph nodes
// follow.
struct NodeRole {
  enum class Kind { Vital, Text, Kg };
  Kind kind = Kind::Vital;
  int vital_index = -1;
  std::string concept_id;

  static NodeRole vital(int index) { return {Kind::Vital, index, {}}; }
  static NodeRole text() { return {Kind::Text, -1, {}}; }
  static NodeRole kg(std::string concept_id) {
    return {Kind::Kg, -1, std::move(concept_id)};
  }
};

// The dynamic per-timestep graph: node features live on the tape so the
// step embedding is differentiable end to end.
struct StepGraph {
  Tensor node_features;  // n x d
  std::vector<NodeRole> roles;
  std::vector<std::pair<size_t, size_t>> edges;  // u < v, no self-loops

  size_t node_count() const { return roles.size(); }
};

}  // namespace kgicu
