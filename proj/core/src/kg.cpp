#include "kgicu/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kgicu/errors.hpp"
#include "kgicu/rng.hpp"

namespace kgicu {

std::vector<double> embed_node(const std::string& concept_id, size_t dim,
                               uint64_t seed) {
  if (dim < 1) throw ContractError("embed_node: dimension must be >= 1");
  Rng rng(mix_seed(fnv1a64(concept_id), seed));
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm_sq += x * x;
  }
  if (norm_sq == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

std::vector<double> SeededEmbeddingProvider::embed(
    const std::string& concept_id) const {
  return embed_node(concept_id, dim_, seed_);
}

TableEmbeddingProvider TableEmbeddingProvider::load_tsv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("embedding table: cannot open " + path);
  TableEmbeddingProvider provider;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string id;
    if (!std::getline(ss, id, '\t'))
      throw DataError("embedding table: " + path + ":" +
                      std::to_string(line_no) + ": missing concept_id");
    std::vector<double> values;
    std::string field;
    while (std::getline(ss, field, '\t')) values.push_back(std::stod(field));
    if (values.empty())
      throw DataError("embedding table: " + path + ":" +
                      std::to_string(line_no) + ": no values for " + id);
    if (provider.dim_ == 0) provider.dim_ = values.size();
    if (values.size() != provider.dim_)
      throw DataError("embedding table: " + path + ":" +
                      std::to_string(line_no) + ": dimension " +
                      std::to_string(values.size()) + " != " +
                      std::to_string(provider.dim_));
    provider.table_[id] = std::move(values);
  }
  return provider;
}

std::vector<double> TableEmbeddingProvider::embed(
    const std::string& concept_id) const {
  auto it = table_.find(concept_id);
  if (it == table_.end())
    throw DataError("embedding table: no entry for concept " + concept_id);
  return it->second;
}

bool GlobalKnowledgeGraph::has_node(const std::string& id) const {
  return std::binary_search(nodes.begin(), nodes.end(), id);
}

bool GlobalKnowledgeGraph::has_edge(const std::string& u,
                                    const std::string& v) const {
  return edges.count(make_concept_edge(u, v)) != 0;
}

GlobalKnowledgeGraph build_global_kg(
    const std::vector<std::set<std::string>>& concept_sets,
    const ConceptEdgeSet& ontology_edges, const EmbeddingProvider& provider) {
  GlobalKnowledgeGraph graph;
  std::set<std::string> nodes;
  for (const auto& cs : concept_sets) nodes.insert(cs.begin(), cs.end());
  graph.nodes.assign(nodes.begin(), nodes.end());
  for (const ConceptEdge& e : ontology_edges) {
    if (e.first == e.second) continue;  // no self-loops
    if (nodes.count(e.first) && nodes.count(e.second))
      graph.edges.insert(make_concept_edge(e.first, e.second));
  }
  graph.embedding_dim = provider.dim();
  for (const std::string& id : graph.nodes)
    graph.embeddings[id] = provider.embed(id);
  return graph;
}

KGSubgraph query_subgraph(const GlobalKnowledgeGraph& graph,
                          const std::set<std::string>& concepts,
                          const std::map<std::string, int>& occurrence_counts,
                          size_t max_kg_nodes) {
  KGSubgraph sub;
  sub.dim = graph.embedding_dim;
  if (max_kg_nodes == 0) return sub;

  std::vector<std::string> candidates;
  for (const std::string& id : concepts)
    if (graph.has_node(id)) candidates.push_back(id);

  auto count_of = [&](const std::string& id) {
    auto it = occurrence_counts.find(id);
    return it == occurrence_counts.end() ? 0 : it->second;
  };
  // Count-descending, concept_id-ascending: a pure function of the inputs,
  // so index maps are reproducible.
  std::sort(candidates.begin(), candidates.end(),
            [&](const std::string& a, const std::string& b) {
              const int ca = count_of(a), cb = count_of(b);
              if (ca != cb) return ca > cb;
              return a < b;
            });
  if (candidates.size() > max_kg_nodes) candidates.resize(max_kg_nodes);

  sub.node_ids = candidates;
  for (size_t i = 0; i < sub.node_ids.size(); ++i) {
    for (size_t j = i + 1; j < sub.node_ids.size(); ++j)
      if (graph.has_edge(sub.node_ids[i], sub.node_ids[j]))
        sub.edges.emplace_back(std::min(i, j), std::max(i, j));
    sub.features.push_back(graph.embeddings.at(sub.node_ids[i]));
  }
  return sub;
}

ConceptEdgeSet load_ontology_edges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("ontology edges: cannot open " + path);
  ConceptEdgeSet edges;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("ontology edges: " + path + ":" +
                      std::to_string(line_no) + ": expected two columns");
    std::string u = line.substr(0, tab);
    std::string v = line.substr(tab + 1);
    if (auto extra = v.find('\t'); extra != std::string::npos)
      v.resize(extra);
    if (u.empty() || v.empty())
      throw DataError("ontology edges: " + path + ":" +
                      std::to_string(line_no) + ": empty concept_id");
    if (u == v)
      throw DataError("ontology edges: " + path + ":" +
                      std::to_string(line_no) + ": self-loop on " + u);
    edges.insert(make_concept_edge(std::move(u), std::move(v)));
  }
  return edges;
}

void write_ontology_edges(const std::string& path, const ConceptEdgeSet& edges) {
  std::ofstream out(path);
  if (!out) throw DataError("ontology edges: cannot write " + path);
  out << "# concept_id\tconcept_id\n";
  for (const ConceptEdge& e : edges) out << e.first << '\t' << e.second << '\n';
}

}  // namespace kgicu
