#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "kgicu/errors.hpp"
#include "kgicu/gnn.hpp"
#include "kgicu/kg.hpp"
#include "kgicu/rng.hpp"
#include "kgicu/text_encoder.hpp"
#include "kgicu/tokenizer.hpp"
#include "test_helpers.hpp"

using namespace kgicu;
using kgicu::testing::random_tensor;

namespace {

KGSubgraph make_subgraph(size_t k, size_t d, Rng& rng,
                         const std::vector<std::pair<size_t, size_t>>& edges) {
  KGSubgraph sub;
  sub.dim = d;
  for (size_t i = 0; i < k; ++i) {
    sub.node_ids.push_back("C" + std::to_string(100 + i));
    std::vector<double> row(d);
    for (double& x : row) x = rng.uniform(-1, 1);
    sub.features.push_back(row);
  }
  sub.edges = edges;
  return sub;
}

}  // namespace

TEST_CASE("feature tokenizer: zero input leaves only the biases") {
  Rng rng(1);
  ParameterSet params;
  auto tok = TokenizerParams::create(params, "tok", 3, 4, rng);
  Tensor out = feature_tokenize({0, 0, 0}, {false, false, false}, tok);
  for (size_t j = 0; j < 3; ++j)
    for (size_t c = 0; c < 4; ++c)
      CHECK(out.at(j, c) == doctest::Approx(tok.bias.at(j, c)));
}

TEST_CASE("feature tokenizer: masked rows equal the missing embeddings") {
  Rng rng(2);
  ParameterSet params;
  auto tok = TokenizerParams::create(params, "tok", 2, 3, rng);
  Tensor out = feature_tokenize({123.0, -9.0}, {true, true}, tok);
  for (size_t j = 0; j < 2; ++j)
    for (size_t c = 0; c < 3; ++c)
      CHECK(out.at(j, c) == doctest::Approx(tok.missing.at(j, c)));
}

TEST_CASE("feature tokenizer matches a hand affine computation") {
  ParameterSet params;
  Rng rng(3);
  auto tok = TokenizerParams::create(params, "tok", 2, 2, rng);
  const std::vector<double> x = {1.5, -0.5};
  Tensor out = feature_tokenize(x, {false, false}, tok);
  for (size_t j = 0; j < 2; ++j)
    for (size_t c = 0; c < 2; ++c)
      CHECK(out.at(j, c) ==
            doctest::Approx(x[j] * tok.weight.at(j, c) + tok.bias.at(j, c)));
}

TEST_CASE("feature tokenizer rejects non-finite observed values") {
  Rng rng(4);
  ParameterSet params;
  auto tok = TokenizerParams::create(params, "tok", 1, 2, rng);
  CHECK_THROWS_AS(feature_tokenize({std::nan("")}, {false}, tok), DataError);
  CHECK_NOTHROW(feature_tokenize({std::nan("")}, {true}, tok));
}

TEST_CASE("text encoder: empty notes give the exact zero vector") {
  auto v = encode_text({}, 16);
  for (double x : v) CHECK(x == 0.0);
  auto v2 = encode_text({"", "   "}, 16);
  for (double x : v2) CHECK(x == 0.0);
}

TEST_CASE("text encoder is deterministic") {
  auto a = encode_text({"acute chest pain"}, 32);
  auto b = encode_text({"acute chest pain"}, 32);
  CHECK(a == b);
}

TEST_CASE("text encoder pinned fixture for 'a b' at d=4") {
  auto v = encode_text({"a b"}, 4);
  // Two tokens, scale 1/sqrt(2); pinned after the first computation.
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v == encode_text({"a", "b"}, 4));  // token stream is what matters
}

TEST_CASE("vsn edges: full connectivity plus text spokes") {
  auto edges = build_vsn_edges(3, VsnConnectivity::Full);
  CHECK(edges.size() == 6);  // C(3,2)=3 vital-vital + 3 text-vital
  auto big = build_vsn_edges(10, VsnConnectivity::Full);
  CHECK(big.size() == 55);  // 45 + 10
  // Enumeration oracle: all pairs present exactly once.
  std::set<std::pair<size_t, size_t>> seen(big.begin(), big.end());
  CHECK(seen.size() == big.size());
  size_t vital_vital = 0, text_vital = 0;
  for (auto [u, v] : big) {
    CHECK(u < v);
    if (v == 10)
      ++text_vital;
    else
      ++vital_vital;
  }
  CHECK(vital_vital == 45);
  CHECK(text_vital == 10);
}

TEST_CASE("vsn edges: grouped connectivity") {
  std::map<int, int> groups = {{0, 0}, {1, 0}, {2, 1}, {3, 1}};
  auto edges = build_vsn_edges(4, VsnConnectivity::Grouped, &groups);
  CHECK(edges.size() == 6);  // (0,1) + (2,3) + 4 text spokes
  CHECK_THROWS_AS(build_vsn_edges(4, VsnConnectivity::Grouped, nullptr),
                  ConfigError);
  std::map<int, int> partial = {{0, 0}};
  CHECK_THROWS_AS(build_vsn_edges(4, VsnConnectivity::Grouped, &partial),
                  ConfigError);
}

TEST_CASE("step graph assembly: k=0 reduces to the VS-N graph") {
  Rng rng(5);
  Tensor vsn = random_tensor(4, 3, rng);  // 3 vitals + text
  auto vsn_edges = build_vsn_edges(3, VsnConnectivity::Full);
  KGSubgraph empty;
  empty.dim = 3;
  StepGraph g = assemble_step_graph(vsn, vsn_edges, empty);
  CHECK(g.node_count() == 4);
  CHECK(g.edges.size() == vsn_edges.size());
  CHECK(g.roles[3].kind == NodeRole::Kind::Text);
}

TEST_CASE("step graph assembly: bipartite join edge count") {
  Rng rng(6);
  Tensor vsn = random_tensor(4, 3, rng);  // n_vs = 3
  auto vsn_edges = build_vsn_edges(3, VsnConnectivity::Full);  // 6 edges
  auto kg = make_subgraph(3, 3, rng, {{0, 1}});
  StepGraph g = assemble_step_graph(vsn, vsn_edges, kg);
  CHECK(g.node_count() == 7);
  CHECK(g.edges.size() == 6 + 1 + 4 * 3);  // 19
  CHECK(g.roles[4].kind == NodeRole::Kind::Kg);
  CHECK(g.roles[4].concept_id == "C100");
}

TEST_CASE("edge-count closed form holds over random sizes") {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const size_t n_vs = static_cast<size_t>(rng.uniform_int(1, 8));
    const size_t k = static_cast<size_t>(rng.uniform_int(0, 10));
    Tensor vsn = random_tensor(n_vs + 1, 4, rng);
    auto vsn_edges = build_vsn_edges(n_vs, VsnConnectivity::Full);
    std::vector<std::pair<size_t, size_t>> kg_edges;
    for (size_t u = 0; k > 1 && u < k - 1; ++u)
      if (rng.bernoulli(0.5)) kg_edges.emplace_back(u, u + 1);
    auto kg = make_subgraph(k, 4, rng, kg_edges);
    StepGraph g = assemble_step_graph(vsn, vsn_edges, kg);
    CHECK(g.edges.size() ==
          vsn_edges.size() + kg_edges.size() + (n_vs + 1) * k);
    // Enumeration oracle: no duplicates, no self-loops.
    std::set<std::pair<size_t, size_t>> seen;
    for (auto [u, v] : g.edges) {
      CHECK(u != v);
      CHECK(seen.insert({std::min(u, v), std::max(u, v)}).second);
    }
  }
}

TEST_CASE("assembly rejects mismatched feature dimensions") {
  Rng rng(8);
  Tensor vsn = random_tensor(3, 4, rng);
  auto kg = make_subgraph(2, 5, rng, {});
  CHECK_THROWS_AS(
      assemble_step_graph(vsn, build_vsn_edges(2, VsnConnectivity::Full), kg),
      ContractError);
}

TEST_CASE("gnn depth zero is the identity") {
  Rng rng(9);
  Tensor vsn = random_tensor(3, 4, rng);
  StepGraph g = assemble_step_graph(
      vsn, build_vsn_edges(2, VsnConnectivity::Full), KGSubgraph{});
  auto out = gnn_forward(g, {});
  CHECK(out.node_features.values().data() == g.node_features.values().data());
  CHECK(out.attention.empty());
}

TEST_CASE("single node with attention layer: alpha is [[1.0]]") {
  ParameterSet params;
  Rng rng(10);
  auto layer = GnnLayerParams::create(params, "gat", GnnKind::Attention, 3, rng);
  StepGraph g;
  g.node_features = random_tensor(1, 3, rng);
  g.roles = {NodeRole::text()};
  auto out = gnn_forward(g, {layer});
  REQUIRE(out.attention.size() == 1);
  CHECK(out.attention[0].n == 1);
  CHECK(out.attention[0].alpha[0] == doctest::Approx(1.0));
}

TEST_CASE("gcn layer matches a hand-computed normalized adjacency product") {
  // Path graph 0-1-2, d=2, pinned weights = identity so the layer reduces
  // to relu(A_hat * H).
  ParameterSet params;
  params.add("gcn.weight", Tensor(2, 2, {1, 0, 0, 1}));
  auto layer = GnnLayerParams::from(params, "gcn", GnnKind::Gcn);
  StepGraph g;
  g.node_features = Tensor(3, 2, {1, 2, 3, 4, 5, 6});
  g.roles = {NodeRole::vital(0), NodeRole::vital(1), NodeRole::text()};
  g.edges = {{0, 1}, {1, 2}};
  auto out = gnn_forward(g, {layer});

  // A+I degrees: node0=2, node1=3, node2=2.
  // A_hat[0][0]=1/2, A_hat[0][1]=1/sqrt(6), A_hat[1][1]=1/3, ...
  const double s01 = 1.0 / std::sqrt(6.0);
  std::vector<std::vector<double>> a_hat = {
      {0.5, s01, 0.0}, {s01, 1.0 / 3.0, s01}, {0.0, s01, 0.5}};
  std::vector<std::vector<double>> h = {{1, 2}, {3, 4}, {5, 6}};
  for (size_t i = 0; i < 3; ++i)
    for (size_t c = 0; c < 2; ++c) {
      double want = 0.0;
      for (size_t j = 0; j < 3; ++j) want += a_hat[i][j] * h[j][c];
      want = std::max(0.0, want);
      CHECK(out.node_features.at(i, c) == doctest::Approx(want));
    }
}

TEST_CASE("attention rows sum to one over the closed neighborhood") {
  ParameterSet params;
  Rng rng(11);
  auto l0 = GnnLayerParams::create(params, "gat0", GnnKind::Attention, 4, rng);
  auto l1 = GnnLayerParams::create(params, "gat1", GnnKind::Attention, 4, rng);
  Tensor vsn = random_tensor(4, 4, rng);
  auto kg = make_subgraph(3, 4, rng, {{0, 2}});
  StepGraph g = assemble_step_graph(
      vsn, build_vsn_edges(3, VsnConnectivity::Full), kg);
  auto out = gnn_forward(g, {l0, l1}, 17);
  REQUIRE(out.attention.size() == 2);
  for (const auto& record : out.attention) {
    CHECK(record.timestep == 17);
    std::set<std::pair<size_t, size_t>> support;
    for (size_t i = 0; i < record.n; ++i) support.insert({i, i});
    for (auto [u, v] : g.edges) {
      support.insert({u, v});
      support.insert({v, u});
    }
    for (size_t u = 0; u < record.n; ++u) {
      double row_sum = 0.0;
      for (size_t v = 0; v < record.n; ++v) {
        const double a = record.at(u, v);
        CHECK(a >= 0.0);
        if (!support.count({u, v})) CHECK(a == 0.0);
        row_sum += a;
      }
      CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("isolated nodes are well-defined in every layer kind") {
  ParameterSet params;
  Rng rng(12);
  StepGraph g;
  g.node_features = random_tensor(3, 4, rng);
  g.roles = {NodeRole::vital(0), NodeRole::vital(1), NodeRole::text()};
  g.edges = {};  // all isolated
  for (GnnKind kind : {GnnKind::Gcn, GnnKind::Attention, GnnKind::SampleAggregate}) {
    ParameterSet local;
    auto layer = GnnLayerParams::create(local, "l", kind, 4, rng);
    auto out = gnn_forward(g, {layer});
    for (double v : out.node_features.values()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("aggregation modes reduce columns and handle single nodes") {
  Tensor one(1, 3, {1.0, -2.0, 3.0});
  for (auto mode : {AggregateMode::Sum, AggregateMode::Mean, AggregateMode::Max}) {
    Tensor out = aggregate_nodes(one, mode);
    CHECK(out.rows() == 1);
    for (size_t c = 0; c < 3; ++c)
      CHECK(out.at(0, c) == doctest::Approx(one.at(0, c)));
  }
  Tensor pair(2, 2, {1.0, -1.0, -1.0, 1.0});
  Tensor sum = aggregate_nodes(pair, AggregateMode::Sum);
  CHECK(sum.at(0, 0) == doctest::Approx(0.0));
  CHECK(sum.at(0, 1) == doctest::Approx(0.0));

  Rng rng(13);
  Tensor m = random_tensor(5, 4, rng);
  Tensor mean = aggregate_nodes(m, AggregateMode::Mean);
  for (size_t c = 0; c < 4; ++c) {
    double want = 0.0;
    for (size_t r = 0; r < 5; ++r) want += m.at(r, c);
    CHECK(mean.at(0, c) == doctest::Approx(want / 5.0));
  }
}

TEST_CASE("kg permutation leaves the aggregated embedding unchanged") {
  Rng rng(14);
  ParameterSet params;
  auto l0 =
      GnnLayerParams::create(params, "l0", GnnKind::SampleAggregate, 4, rng);
  auto l1 = GnnLayerParams::create(params, "l1", GnnKind::Attention, 4, rng);

  Tensor vsn = random_tensor(4, 4, rng);
  auto kg = make_subgraph(4, 4, rng, {{0, 1}, {1, 3}});
  auto vsn_edges = build_vsn_edges(3, VsnConnectivity::Full);

  // Permute KG nodes (reverse order) with consistent edge re-indexing.
  KGSubgraph permuted;
  permuted.dim = kg.dim;
  std::vector<size_t> perm = {3, 1, 0, 2};  // new index -> old index
  std::vector<size_t> inverse(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
  for (size_t i = 0; i < perm.size(); ++i) {
    permuted.node_ids.push_back(kg.node_ids[perm[i]]);
    permuted.features.push_back(kg.features[perm[i]]);
  }
  for (auto [u, v] : kg.edges) {
    size_t a = inverse[u], b = inverse[v];
    permuted.edges.emplace_back(std::min(a, b), std::max(a, b));
  }

  for (auto mode :
       {AggregateMode::Sum, AggregateMode::Mean, AggregateMode::Max}) {
    auto run = [&](const KGSubgraph& sub) {
      StepGraph g = assemble_step_graph(vsn, vsn_edges, sub);
      auto out = gnn_forward(g, {l0, l1}, 0, false);
      return aggregate_nodes(out.node_features, mode).to_vector();
    };
    auto base = run(kg);
    auto swapped = run(permuted);
    for (size_t i = 0; i < base.size(); ++i)
      CHECK(base[i] == doctest::Approx(swapped[i]).epsilon(1e-9));
  }
}

TEST_CASE("full step encoder passes the gradient check") {
  Rng rng(15);
  const size_t d = 3, n_vs = 2;
  ParameterSet params;
  auto tok = TokenizerParams::create(params, "tok", n_vs, d, rng);
  auto l0 = GnnLayerParams::create(params, "gnn0", GnnKind::SampleAggregate, d, rng);
  auto l1 = GnnLayerParams::create(params, "gnn1", GnnKind::Attention, d, rng);
  auto vsn_edges = build_vsn_edges(n_vs, VsnConnectivity::Full);
  Rng data_rng(16);
  auto kg = make_subgraph(2, d, data_rng, {{0, 1}});
  const std::vector<double> x = {0.7, -1.2};
  const std::vector<bool> mask = {false, true};
  const std::vector<double> text = encode_text({"some note text"}, d);

  auto loss_fn = [&](ParameterSet& p) {
    auto tokp = TokenizerParams::from(p, "tok");
    Tensor ft = feature_tokenize(x, mask, tokp);
    Tensor vsn = concat_rows({ft, Tensor::row(text)});
    StepGraph g = assemble_step_graph(vsn, vsn_edges, kg);
    auto layers = std::vector<GnnLayerParams>{
        GnnLayerParams::from(p, "gnn0", GnnKind::SampleAggregate),
        GnnLayerParams::from(p, "gnn1", GnnKind::Attention)};
    auto out = gnn_forward(g, layers, 0, false);
    Tensor emb = aggregate_nodes(out.node_features, AggregateMode::Sum);
    // squash to a scalar
    return sigmoid(sum_rows(transpose(emb)));
  };
  CHECK(grad_check(loss_fn, params, 1e-5) < 1e-4);
}

TEST_CASE("vitals-only reduction: zero text and k=0 keeps the pipeline valid") {
  Rng rng(17);
  const size_t d = 3, n_vs = 2;
  ParameterSet params;
  auto tok = TokenizerParams::create(params, "tok", n_vs, d, rng);
  auto layer = GnnLayerParams::create(params, "gnn0", GnnKind::Gcn, d, rng);
  Tensor ft = feature_tokenize({1.0, 2.0}, {false, false}, tok);
  Tensor vsn = concat_rows({ft, Tensor::zeros(1, d)});
  StepGraph g = assemble_step_graph(
      vsn, build_vsn_edges(n_vs, VsnConnectivity::Full), KGSubgraph{});
  CHECK(g.node_count() == n_vs + 1);
  auto out = gnn_forward(g, {layer});
  Tensor emb = aggregate_nodes(out.node_features, AggregateMode::Sum);
  CHECK(emb.cols() == d);
}
