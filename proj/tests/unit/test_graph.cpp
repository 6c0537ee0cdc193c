#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "glinkx/error.hpp"
#include "glinkx/graph.hpp"
#include "oracles.hpp"

using namespace glinkx;

TEST_CASE("build_graph: degrees of a small directed path") {
  std::vector<Edge> e{{0, 1}, {1, 2}};
  auto g = build_graph(e, 3);
  CHECK(g.num_edges() == 2);
  CHECK(g.out_degree(0) == 1);
  CHECK(g.out_degree(1) == 1);
  CHECK(g.out_degree(2) == 0);
  CHECK(g.in_degree(0) == 0);
  CHECK(g.in_degree(1) == 1);
  CHECK(g.in_degree(2) == 1);
}

TEST_CASE("build_graph: symmetrize adds the reverse edge") {
  std::vector<Edge> e{{0, 1}};
  auto g = build_graph(e, 2, true);
  CHECK(g.num_edges() == 2);
  REQUIRE(g.in_neighbors(0).size() == 1);
  CHECK(g.in_neighbors(0)[0] == 1);
  CHECK(g.is_symmetric());
}

TEST_CASE("build_graph: errors and edge cases") {
  std::vector<Edge> bad{{0, 3}};
  CHECK_THROWS_AS(build_graph(bad, 3), InvalidArgument);
  auto empty = build_graph({}, 4);
  CHECK(empty.num_nodes() == 4);
  CHECK(empty.num_edges() == 0);

  std::vector<Edge> dup{{0, 1}, {0, 1}, {1, 1}};
  CHECK(build_graph(dup, 2, false, true).num_edges() == 2);
  CHECK(build_graph(dup, 2, false, false).num_edges() == 3);
  // self-loop survives symmetrization exactly once
  auto s = build_graph(dup, 2, true, true);
  CHECK(s.num_edges() == 3);
  CHECK(s.has_edge(1, 1));
}

TEST_CASE("in-adjacency is the transpose of a dense oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 50;
    auto edges = oracle::random_edges(n, 200, rng, true);
    auto g = build_graph(edges, n);
    Matrix a = oracle::dense_adjacency(edges, n, false);
    Matrix in = Matrix::Zero(n, n);
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j : g.in_neighbors(i)) in(i, j) += 1;
    CHECK((in - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((oracle::dense_of(g) - a).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("transpose round trip and degree sums") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 17u, 120u, 200u}) {
    auto edges = oracle::random_edges(n, n * 3, rng, true);
    auto g = build_graph(edges, n, false, false);
    std::vector<Edge> rev;
    for (NodeId v = 0; v < n; ++v)
      for (NodeId u : g.in_neighbors(v)) rev.push_back({u, v});
    auto back = build_graph(rev, n, false, false);
    CHECK(back.edges() == g.edges());
    auto sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    CHECK(g.edges() == sorted);

    std::size_t so = 0, si = 0;
    for (NodeId v = 0; v < n; ++v) {
      so += g.out_degree(v);
      si += g.in_degree(v);
    }
    CHECK(so == g.num_edges());
    CHECK(si == g.num_edges());
    CHECK(g.out_offsets().size() == n + 1);
    CHECK(std::is_sorted(g.out_offsets().begin(), g.out_offsets().end()));
    CHECK(g.out_offsets().back() == g.num_edges());
  }
}

TEST_CASE("induced subgraph keeps only internal edges") {
  std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  auto g = build_graph(e, 4);
  std::vector<NodeId> keep{1, 2, 3};
  auto s = induced_subgraph(g, keep);
  CHECK(s.num_nodes() == 3);
  CHECK(s.num_edges() == 2);
  CHECK(s.has_edge(0, 1));
  CHECK(s.has_edge(1, 2));
}

TEST_CASE("split masks and labels validate") {
  CHECK_THROWS_AS(SplitMasks({Role::test, Role::valid}), InvalidArgument);
  SplitMasks m({Role::train, Role::test, Role::valid, Role::train});
  CHECK(m.train() == std::vector<NodeId>{0, 3});
  CHECK(m.valid() == std::vector<NodeId>{2});
  CHECK(m.test() == std::vector<NodeId>{1});
  CHECK(parse_role("valid") == Role::valid);
  CHECK_THROWS_AS(parse_role("dev"), InvalidArgument);

  CHECK_THROWS_AS(LabelVector({0, 1}, 1), InvalidArgument);
  CHECK_THROWS_AS(LabelVector({0, 2}, 2), InvalidArgument);
  LabelVector y({0, LabelVector::kUnknown}, 2);
  CHECK(!y.all_known());
}

namespace {

double edge_scan(const std::vector<Edge>& edges, const std::vector<int>& y) {
  double same = 0;
  for (auto e : edges) same += y[e.src] == y[e.dst];
  return same / static_cast<double>(edges.size());
}

CsrGraph complete_bipartite_22() {
  std::vector<Edge> e{{0, 2}, {0, 3}, {1, 2}, {1, 3}};
  return build_graph(e, 4, true);
}

}  // namespace

TEST_CASE("edge homophily") {
  std::vector<Edge> clique{{0, 1}, {1, 0}};
  CHECK(edge_homophily(build_graph(clique, 2), LabelVector({1, 1}, 2)) == 1.0);
  CHECK(edge_homophily(complete_bipartite_22(), LabelVector({0, 0, 1, 1}, 2)) == 0.0);
  CHECK_THROWS_AS(edge_homophily(build_graph({}, 3), LabelVector({0, 1, 0}, 2)), InvalidArgument);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> lab(0, 2);
  for (int t = 0; t < 10; ++t) {
    auto edges = oracle::random_edges(30, 90, rng);
    std::vector<int> y(30);
    for (auto& v : y) v = lab(rng);
    auto g = build_graph(edges, 30, false, false);
    CHECK(edge_homophily(g, LabelVector(y, 3)) == doctest::Approx(edge_scan(edges, y)).epsilon(1e-15));
  }
}

TEST_CASE("node and class-insensitive homophily") {
  std::vector<Edge> tri{{0, 1}, {1, 2}, {2, 0}};
  auto g = build_graph(tri, 3, true);
  LabelVector same({1, 1, 1}, 2);
  CHECK(node_homophily(g, same) == 1.0);
  CHECK(edge_homophily(g, same) == 1.0);

  CHECK(node_homophily(complete_bipartite_22(), LabelVector({0, 0, 1, 1}, 2)) == 0.0);
  CHECK(class_insensitive_homophily(complete_bipartite_22(), LabelVector({0, 0, 1, 1}, 2)) == 0.0);
  CHECK_THROWS_AS(node_homophily(build_graph({}, 2), LabelVector({0, 1}, 2)), InvalidArgument);

  // two disjoint same-label pairs: h_k = 1 and |C_k|/n = 1/2 for both
  // classes, so (1/(2-1)) * (0.5 + 0.5) = 1
  std::vector<Edge> pairs{{0, 1}, {2, 3}};
  CHECK(class_insensitive_homophily(build_graph(pairs, 4, true), LabelVector({0, 0, 1, 1}, 2)) ==
        doctest::Approx(1.0));
  // a 3-class version with one class isolated: (1/2) * (1 - 2/6 + 1 - 2/6 + 0) = 2/3
  std::vector<Edge> three{{0, 1}, {2, 3}};
  CHECK(class_insensitive_homophily(build_graph(three, 6, true), LabelVector({0, 0, 1, 1, 2, 2}, 3)) ==
        doctest::Approx(2.0 / 3.0));
}

TEST_CASE("homophily metrics are relabel invariant and bounded") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 40;
    auto edges = oracle::random_edges(n, 120, rng);
    std::vector<int> y(n);
    for (auto& v : y) v = lab(rng);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> pe;
    for (auto e : edges) pe.push_back({perm[e.src], perm[e.dst]});
    std::vector<int> py(n);
    for (NodeId v = 0; v < n; ++v) py[perm[v]] = y[v];
    auto g = build_graph(edges, n, true);
    auto h = build_graph(pe, n, true);
    LabelVector a(y, 4), b(py, 4);
    for (auto f : {edge_homophily, node_homophily, class_insensitive_homophily}) {
      const double x = f(g, a);
      CHECK(x == doctest::Approx(f(h, b)).epsilon(1e-12));
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
}
