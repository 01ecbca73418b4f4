#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace kgicu {

using ConceptEdge = std::pair<std::string, std::string>;  // lexicographic order
using ConceptEdgeSet = std::set<ConceptEdge>;

inline ConceptEdge make_concept_edge(std::string u, std::string v) {
  if (v < u) std::swap(u, v);
  return {std::move(u), std::move(v)};
}

// Supplies frozen node feature vectors for concepts.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const std::string& concept_id) const = 0;
  virtual size_t dim() const = 0;
};

// Deterministic stand-in for pretrained node descriptors: unit-norm vectors
// drawn from a generator seeded by (concept_id, seed).
class SeededEmbeddingProvider final : public EmbeddingProvider {
 public:
  SeededEmbeddingProvider(size_t dim, uint64_t seed) : dim_(dim), seed_(seed) {}
  std::vector<double> embed(const std::string& concept_id) const override;
  size_t dim() const override { return dim_; }

 private:
  size_t dim_;
  uint64_t seed_;
};

// Embeddings loaded from a TSV file: concept_id followed by d floats.
class TableEmbeddingProvider final : public EmbeddingProvider {
 public:
  static TableEmbeddingProvider load_tsv(const std::string& path);
  std::vector<double> embed(const std::string& concept_id) const override;
  size_t dim() const override { return dim_; }

 private:
  size_t dim_ = 0;
  std::map<std::string, std::vector<double>> table_;
};

std::vector<double> embed_node(const std::string& concept_id, size_t dim,
                               uint64_t seed);

// The global graph: nodes are every concept observed anywhere in the
// dataset, edges are the ontology edges restricted to those nodes.
struct GlobalKnowledgeGraph {
  std::vector<std::string> nodes;  // sorted, unique
  ConceptEdgeSet edges;            // canonical order, no self-loops
  std::map<std::string, std::vector<double>> embeddings;
  size_t embedding_dim = 0;

  bool has_node(const std::string& id) const;
  bool has_edge(const std::string& u, const std::string& v) const;
};

// Per-timestep restriction of the global graph.
struct KGSubgraph {
  std::vector<std::string> node_ids;               // index map order
  std::vector<std::pair<size_t, size_t>> edges;    // local indices, u < v
  std::vector<std::vector<double>> features;       // |node_ids| rows of dim
  size_t dim = 0;

  size_t size() const { return node_ids.size(); }
  bool empty() const { return node_ids.empty(); }
};

GlobalKnowledgeGraph build_global_kg(
    const std::vector<std::set<std::string>>& concept_sets,
    const ConceptEdgeSet& ontology_edges, const EmbeddingProvider& provider);

// Keeps the candidate concepts present in the graph; above max_kg_nodes,
// the most frequently occurring win, ties broken by ascending concept_id.
KGSubgraph query_subgraph(const GlobalKnowledgeGraph& graph,
                          const std::set<std::string>& concepts,
                          const std::map<std::string, int>& occurrence_counts,
                          size_t max_kg_nodes);

// Edge file: two concept ids per line, tab-separated, '#' comments allowed.
ConceptEdgeSet load_ontology_edges(const std::string& path);
void write_ontology_edges(const std::string& path, const ConceptEdgeSet& edges);

}  // namespace kgicu
