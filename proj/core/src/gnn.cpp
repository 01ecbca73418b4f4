#include "kgicu/gnn.hpp"

#include <cmath>

#include "kgicu/errors.hpp"

namespace kgicu {

const char* to_string(GnnKind kind) {
  switch (kind) {
    case GnnKind::Gcn:
      return "gcn";
    case GnnKind::Attention:
      return "attention";
    case GnnKind::SampleAggregate:
      return "sample-aggregate";
  }
  return "?";
}

const char* to_string(AggregateMode mode) {
  switch (mode) {
    case AggregateMode::Sum:
      return "sum";
    case AggregateMode::Mean:
      return "mean";
    case AggregateMode::Max:
      return "max";
  }
  return "?";
}

namespace {

Tensor glorot(size_t rows, size_t cols, Rng& rng) {
  const double scale = std::sqrt(2.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (double& x : v) x = scale * rng.normal();
  return Tensor(rows, cols, std::move(v));
}

// Large negative additive mask; exp() underflows to exactly 0 under the
// shifted softmax, so non-edges carry exactly zero attention.
constexpr double kMaskedScore = -1e30;

std::vector<std::vector<size_t>> adjacency_lists(
    size_t n, const std::vector<std::pair<size_t, size_t>>& edges) {
  std::vector<std::vector<size_t>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

}  // namespace

GnnLayerParams GnnLayerParams::create(ParameterSet& params,
                                      const std::string& prefix, GnnKind kind,
                                      size_t dim, Rng& rng) {
  GnnLayerParams layer;
  layer.kind = kind;
  const size_t in_dim = kind == GnnKind::SampleAggregate ? 2 * dim : dim;
  layer.weight = params.add(prefix + ".weight", glorot(in_dim, dim, rng));
  if (kind == GnnKind::Attention)
    layer.attention = params.add(prefix + ".attention", glorot(2 * dim, 1, rng));
  return layer;
}

GnnLayerParams GnnLayerParams::from(const ParameterSet& params,
                                    const std::string& prefix, GnnKind kind) {
  GnnLayerParams layer;
  layer.kind = kind;
  layer.weight = params.at(prefix + ".weight");
  if (kind == GnnKind::Attention)
    layer.attention = params.at(prefix + ".attention");
  return layer;
}

std::vector<std::pair<size_t, size_t>> build_vsn_edges(
    size_t n_vs, VsnConnectivity connectivity,
    const std::map<int, int>* groups) {
  std::vector<std::pair<size_t, size_t>> edges;
  if (connectivity == VsnConnectivity::Grouped) {
    if (groups == nullptr)
      throw ConfigError("grouped VS-N connectivity requires a group map");
    for (size_t j = 0; j < n_vs; ++j)
      if (!groups->count(static_cast<int>(j)))
        throw ConfigError("group map does not cover vital feature " +
                          std::to_string(j));
    for (size_t u = 0; u < n_vs; ++u)
      for (size_t v = u + 1; v < n_vs; ++v)
        if (groups->at(static_cast<int>(u)) == groups->at(static_cast<int>(v)))
          edges.emplace_back(u, v);
  } else {
    for (size_t u = 0; u < n_vs; ++u)
      for (size_t v = u + 1; v < n_vs; ++v) edges.emplace_back(u, v);
  }
  // The text node is connected to all vitals.
  for (size_t u = 0; u < n_vs; ++u) edges.emplace_back(u, n_vs);
  return edges;
}

StepGraph assemble_step_graph(
    const Tensor& vsn_features,
    const std::vector<std::pair<size_t, size_t>>& vsn_edges,
    const KGSubgraph& kg_subgraph) {
  const size_t n_vsn = vsn_features.rows();
  const size_t d = vsn_features.cols();
  const size_t k = kg_subgraph.size();
  if (k > 0 && kg_subgraph.dim != d)
    throw ContractError("assemble_step_graph: KG feature dimension " +
                        std::to_string(kg_subgraph.dim) +
                        " does not match step dimension " + std::to_string(d));

  StepGraph graph;
  for (size_t j = 0; j + 1 < n_vsn; ++j)
    graph.roles.push_back(NodeRole::vital(static_cast<int>(j)));
  graph.roles.push_back(NodeRole::text());
  for (const std::string& id : kg_subgraph.node_ids)
    graph.roles.push_back(NodeRole::kg(id));

  if (k == 0) {
    graph.node_features = vsn_features;
  } else {
    std::vector<double> kg_values;
    kg_values.reserve(k * d);
    for (const auto& row : kg_subgraph.features)
      kg_values.insert(kg_values.end(), row.begin(), row.end());
    graph.node_features =
        concat_rows({vsn_features, Tensor(k, d, std::move(kg_values))});
  }

  graph.edges = vsn_edges;
  for (auto [u, v] : kg_subgraph.edges)
    graph.edges.emplace_back(n_vsn + u, n_vsn + v);
  // Bipartite join: every VS-N node to every KG node.
  for (size_t u = 0; u < n_vsn; ++u)
    for (size_t j = 0; j < k; ++j) graph.edges.emplace_back(u, n_vsn + j);
  return graph;
}

namespace {

Tensor gcn_layer(const StepGraph& graph, const Tensor& h,
                 const GnnLayerParams& layer) {
  const size_t n = graph.node_count();
  // Symmetric normalization of A + I; self-loops keep isolated nodes defined.
  std::vector<double> a(n * n, 0.0);
  std::vector<double> degree(n, 1.0);
  for (size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (auto [u, v] : graph.edges) {
    a[u * n + v] = 1.0;
    a[v * n + u] = 1.0;
    degree[u] += 1.0;
    degree[v] += 1.0;
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      a[i * n + j] /= std::sqrt(degree[i] * degree[j]);
  return relu(matmul(Tensor(n, n, std::move(a)), matmul(h, layer.weight)));
}

Tensor sample_aggregate_layer(const StepGraph& graph, const Tensor& h,
                              const GnnLayerParams& layer) {
  const size_t n = graph.node_count();
  const size_t d = h.cols();
  if (layer.weight.rows() != 2 * d)
    throw ShapeError("sample-aggregate weight expects 2d rows");
  auto adj = adjacency_lists(n, graph.edges);
  // Row-normalized neighbor averaging; rows of isolated nodes stay zero.
  std::vector<double> mean_adj(n * n, 0.0);
  for (size_t u = 0; u < n; ++u) {
    if (adj[u].empty()) continue;
    const double w = 1.0 / static_cast<double>(adj[u].size());
    for (size_t v : adj[u]) mean_adj[u * n + v] = w;
  }
  Tensor neighbor_mean = matmul(Tensor(n, n, std::move(mean_adj)), h);
  Tensor w_self = slice_rows(layer.weight, 0, d);
  Tensor w_neigh = slice_rows(layer.weight, d, 2 * d);
  return relu(add(matmul(h, w_self), matmul(neighbor_mean, w_neigh)));
}

struct AttentionLayerOut {
  Tensor features;
  Tensor alpha;
};

AttentionLayerOut attention_layer(const StepGraph& graph, const Tensor& h,
                                  const GnnLayerParams& layer) {
  const size_t n = graph.node_count();
  const size_t d = h.cols();
  if (!layer.attention.defined())
    throw ContractError("attention layer missing its attention vector");
  Tensor hw = matmul(h, layer.weight);
  Tensor a_src = slice_rows(layer.attention, 0, d);
  Tensor a_dst = slice_rows(layer.attention, d, 2 * d);
  Tensor src_scores = matmul(hw, a_src);  // n x 1
  Tensor dst_scores = matmul(hw, a_dst);  // n x 1
  // Pairwise scores e[u][v] = src[u] + dst[v] via rank-one expansions.
  Tensor ones_row = Tensor::full(1, n, 1.0);
  Tensor ones_col = Tensor::full(n, 1, 1.0);
  Tensor pair_scores =
      add(matmul(src_scores, ones_row), matmul(ones_col, transpose(dst_scores)));
  Tensor activated = leaky_relu(pair_scores);
  // Softmax support is the closed neighborhood N(u) u {u}.
  std::vector<double> mask(n * n, kMaskedScore);
  for (size_t i = 0; i < n; ++i) mask[i * n + i] = 0.0;
  for (auto [u, v] : graph.edges) {
    mask[u * n + v] = 0.0;
    mask[v * n + u] = 0.0;
  }
  Tensor alpha = row_softmax(add(activated, Tensor(n, n, std::move(mask))));
  Tensor out = relu(matmul(alpha, hw));
  return {out, alpha};
}

}  // namespace

GnnForwardResult gnn_forward(const StepGraph& graph,
                             const std::vector<GnnLayerParams>& layers,
                             size_t timestep, bool collect_attention) {
  GnnForwardResult result;
  result.node_features = graph.node_features;
  for (size_t li = 0; li < layers.size(); ++li) {
    const GnnLayerParams& layer = layers[li];
    switch (layer.kind) {
      case GnnKind::Gcn:
        result.node_features = gcn_layer(graph, result.node_features, layer);
        break;
      case GnnKind::SampleAggregate:
        result.node_features =
            sample_aggregate_layer(graph, result.node_features, layer);
        break;
      case GnnKind::Attention: {
        AttentionLayerOut out =
            attention_layer(graph, result.node_features, layer);
        result.node_features = out.features;
        if (collect_attention) {
          AttentionRecord record;
          record.layer = li;
          record.timestep = timestep;
          record.n = graph.node_count();
          record.alpha = out.alpha.to_vector();
          record.roles = graph.roles;
          result.attention.push_back(std::move(record));
        }
        break;
      }
    }
  }
  return result;
}

Tensor aggregate_nodes(const Tensor& node_features, AggregateMode mode) {
  if (!node_features.defined())
    throw ContractError("aggregate_nodes: empty graph");
  switch (mode) {
    case AggregateMode::Sum:
      return sum_rows(node_features);
    case AggregateMode::Mean:
      return mean_rows(node_features);
    case AggregateMode::Max:
      return max_rows(node_features);
  }
  throw ContractError("aggregate_nodes: unknown mode");
}

}  // namespace kgicu
