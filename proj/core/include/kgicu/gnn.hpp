#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgicu/kg.hpp"
#include "kgicu/optim.hpp"
#include "kgicu/rng.hpp"
#include "kgicu/step_graph.hpp"

namespace kgicu {

enum class GnnKind { Gcn, Attention, SampleAggregate };
enum class AggregateMode { Sum, Mean, Max };
enum class VsnConnectivity { Full, Grouped };

const char* to_string(GnnKind kind);
const char* to_string(AggregateMode mode);

// One message-passing layer. Gcn and Attention transform with a d x d
// matrix; SampleAggregate concatenates self and neighbor means, so its
// weight is 2d x d. The attention kind additionally scores edges with a
// 2d-dimensional vector.
struct GnnLayerParams {
  GnnKind kind = GnnKind::SampleAggregate;
  Tensor weight;
  Tensor attention;  // 2d x 1, attention kind only

  size_t dim() const { return weight.cols(); }

  static GnnLayerParams create(ParameterSet& params, const std::string& prefix,
                               GnnKind kind, size_t dim, Rng& rng);
  static GnnLayerParams from(const ParameterSet& params,
                             const std::string& prefix, GnnKind kind);
};

// Attention coefficients of one (timestep, layer): dense row-major matrix,
// zero where no edge, plus the node-role index map.
struct AttentionRecord {
  size_t layer = 0;
  size_t timestep = 0;
  size_t n = 0;
  std::vector<double> alpha;  // n * n
  std::vector<NodeRole> roles;

  double at(size_t u, size_t v) const { return alpha[u * n + v]; }
};

// Vital-vital edges by full connectivity or within prior groups; the text
// node (index n_vs) connects to every vital in both modes.
std::vector<std::pair<size_t, size_t>> build_vsn_edges(
    size_t n_vs, VsnConnectivity connectivity,
    const std::map<int, int>* groups = nullptr);

// Splices the knowledge subgraph onto the vitals-and-text graph: stacked
// features, re-indexed KG edges, and the complete bipartite join between
// the two node sets.
StepGraph assemble_step_graph(
    const Tensor& vsn_features,
    const std::vector<std::pair<size_t, size_t>>& vsn_edges,
    const KGSubgraph& kg_subgraph);

struct GnnForwardResult {
  Tensor node_features;
  std::vector<AttentionRecord> attention;
};

// Runs the layer stack over one step graph. Depth zero is the identity.
// Attention layers emit one AttentionRecord each; set collect_attention to
// false to skip the copies during training.
GnnForwardResult gnn_forward(const StepGraph& graph,
                             const std::vector<GnnLayerParams>& layers,
                             size_t timestep = 0,
                             bool collect_attention = true);

// Column-wise reduction of the node features into the step embedding (1 x d).
Tensor aggregate_nodes(const Tensor& node_features, AggregateMode mode);

}  // namespace kgicu
