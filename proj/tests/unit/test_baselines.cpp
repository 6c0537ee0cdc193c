#include <numeric>

#include "doctest.h"
#include "glinkx/baselines.hpp"
#include "glinkx/error.hpp"
#include "oracles.hpp"

using namespace glinkx;

namespace {

SplitMasks split_of(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, 3);
  std::vector<Role> r(n);
  for (auto& x : r) {
    const int k = u(rng);
    x = k < 2 ? Role::train : k == 2 ? Role::valid : Role::test;
  }
  r[0] = Role::train;
  return SplitMasks(r);
}

Matrix dense_two_hop_support(const Matrix& a, bool subtract) {
  Matrix a2 = a * a;
  Matrix m = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i == j) continue;
      const double v = subtract ? a2(i, j) - a(i, j) : a2(i, j);
      m(i, j) = v >= 1 ? 1 : 0;
    }
  return m;
}

}  // namespace

TEST_CASE("LP: small alpha keeps train labels; path graph tie goes to class 0") {
  std::mt19937_64 rng(1);
  auto edges = oracle::random_edges(30, 60, rng);
  auto g = build_graph(edges, 30);
  std::uniform_int_distribution<int> lab(0, 2);
  std::vector<int> y(30);
  for (auto& v : y) v = lab(rng);
  auto masks = split_of(30, rng);
  LpConfig cfg;
  cfg.alpha = 0.01;
  auto r = label_prop(g, LabelVector(y, 3), masks, cfg);
  for (NodeId v : masks.train()) CHECK(r.predictions[v] == y[v]);

  std::vector<Edge> path{{0, 1}, {1, 2}};
  auto p = build_graph(path, 3);
  SplitMasks m({Role::train, Role::test, Role::train});
  auto pr = label_prop(p, LabelVector({0, 1, 1}, 2), m, LpConfig{});
  CHECK(pr.scores(1, 0) == doctest::Approx(pr.scores(1, 1)).epsilon(1e-14));
  CHECK(pr.predictions[1] == 0);
}

TEST_CASE("LP matches the dense iteration oracle") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int t = 0; t < 10; ++t) {
    auto edges = oracle::random_edges(30, 70, rng, true);
    std::vector<int> y(30);
    for (auto& v : y) v = lab(rng);
    auto masks = split_of(30, rng);
    Matrix y0 = Matrix::Zero(30, 4);
    for (NodeId v : masks.train()) y0(v, y[v]) = 1;
    for (int hops : {1, 2}) {
      LpConfig cfg;
      cfg.alpha = 0.75;
      cfg.hops = hops;
      cfg.iterations = 20;
      auto r = label_prop(build_graph(edges, 30), LabelVector(y, 4), masks, cfg);
      Matrix a = oracle::dense_adjacency(edges, 30, true);
      if (hops == 2) a = dense_two_hop_support(a, false);
      Matrix want = oracle::label_prop(a, y0, cfg.alpha, cfg.iterations);
      CHECK((r.scores - want).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("LP clamp re-imposes train rows") {
  std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}};
  auto g = build_graph(e, 4);
  SplitMasks m({Role::train, Role::test, Role::test, Role::train});
  LpConfig cfg;
  cfg.clamp = true;
  auto r = label_prop(g, LabelVector({0, 0, 0, 1}, 2), m, cfg);
  CHECK(r.scores.row(0) == RowVector::Unit(2, 0));
  CHECK(r.scores.row(3) == RowVector::Unit(2, 1));
}

TEST_CASE("LP: isolated test node falls back to the train majority") {
  std::vector<Edge> e{{0, 1}};
  auto g = build_graph(e, 4);
  SplitMasks m({Role::train, Role::train, Role::train, Role::test});
  auto r = label_prop(g, LabelVector({1, 1, 0, 0}, 2), m, LpConfig{});
  CHECK(r.fallback[3]);
  CHECK(r.predictions[3] == 1);
  CHECK(!r.fallback[0]);
}

TEST_CASE("LP: deterministic, permutation invariant, hops=2 equals hops=1 on the square support") {
  std::mt19937_64 rng(3);
  const std::size_t n = 25;
  auto edges = oracle::random_edges(n, 50, rng);
  std::uniform_int_distribution<int> lab(0, 2);
  std::vector<int> y(n);
  for (auto& v : y) v = lab(rng);
  auto masks = split_of(n, rng);
  LabelVector ly(y, 3);
  auto g = build_graph(edges, n);
  LpConfig cfg;
  auto a = label_prop(g, ly, masks, cfg);
  auto b = label_prop(g, ly, masks, cfg);
  CHECK(a.scores == b.scores);

  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Edge> pe;
  for (auto e : edges) pe.push_back({perm[e.src], perm[e.dst]});
  std::vector<int> py(n);
  std::vector<Role> pr(n);
  for (NodeId v = 0; v < n; ++v) {
    py[perm[v]] = y[v];
    pr[perm[v]] = masks.role(v);
  }
  auto p = label_prop(build_graph(pe, n), LabelVector(py, 3), SplitMasks(pr), cfg);
  for (NodeId v = 0; v < n; ++v) CHECK(p.predictions[perm[v]] == a.predictions[v]);

  cfg.hops = 2;
  auto h2 = label_prop(g, ly, masks, cfg);
  LpConfig one = cfg;
  one.hops = 1;
  auto h1 = label_prop_on(two_hop_graph(symmetrized(g)), ly, masks, one);
  CHECK(h2.scores == h1.scores);
}

TEST_CASE("masked two-hop support") {
  std::vector<Edge> tri{{0, 1}, {1, 2}, {2, 0}};
  auto t = build_graph(tri, 3, true);
  CHECK(masked_two_hop_graph(t).num_edges() == 0);
  SplitMasks m({Role::train, Role::train, Role::test});
  CHECK_THROWS_WITH_AS(label_prop_masked(t, LabelVector({0, 1, 0}, 2), m, LpConfig{}),
                       "no 2-hop-exclusive structure", InvalidArgument);

  std::vector<Edge> path{{0, 1}, {1, 2}};
  auto p = masked_two_hop_graph(build_graph(path, 3, true));
  CHECK(p.num_edges() == 2);
  CHECK(p.has_edge(0, 2));
  CHECK(p.has_edge(2, 0));

  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    auto edges = oracle::random_edges(20, 30, rng);
    auto g = build_graph(edges, 20, true);
    Matrix want = dense_two_hop_support(oracle::dense_adjacency(edges, 20, true), true);
    CHECK((oracle::dense_of(masked_two_hop_graph(g)) - want).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("LP config validation") {
  LpConfig c;
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = LpConfig{};
  c.hops = 3;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = LpConfig{};
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

namespace {

StageConfig small_stage() {
  StageConfig s;
  s.hidden = 16;
  s.train.epochs = 60;
  s.train.batch_size = 64;
  s.train.optimizer.lr = 0.01;
  return s;
}

}  // namespace

TEST_CASE("LINKX separates two cliques from adjacency rows alone") {
  const NodeId size = 30;
  std::vector<Edge> e;
  for (NodeId b : {NodeId(0), size})
    for (NodeId i = 0; i < size; ++i)
      for (NodeId j = i + 1; j < size; ++j) e.push_back({b + i, b + j});
  auto g = build_graph(e, 2 * size, true);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0, 1);
  Matrix x(2 * size, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = noise(rng);
  std::vector<int> y(2 * size);
  for (NodeId v = 0; v < 2 * size; ++v) y[v] = v < size ? 0 : 1;
  auto masks = split_of(2 * size, rng);
  auto r = linkx_baseline(g, x, LabelVector(y, 2), masks, small_stage(), 0);
  CHECK(r.test_accuracy >= 0.95);
  CHECK(r.spec.use_position);
  CHECK(!r.spec.use_propagated);
}

TEST_CASE("feature MLP beats the majority class on label-correlated features") {
  const std::size_t n = 300;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0, 1);
  std::vector<int> y(n);
  Matrix x(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 3);
    for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = noise(rng) + (j == y[i] ? 2.0 : 0.0);
  }
  auto masks = split_of(n, rng);
  auto r = feature_mlp_baseline(x, LabelVector(y, 3), masks, small_stage(), 0);
  std::vector<int> count(3, 0);
  for (NodeId v : masks.test()) ++count[y[v]];
  const double majority = *std::max_element(count.begin(), count.end()) / double(masks.test().size());
  CHECK(r.test_accuracy > majority + 0.2);
  CHECK(!r.spec.use_position);
}

TEST_CASE("LP sweep over splits and alphas matches one-at-a-time LP") {
  std::mt19937_64 rng(31);
  const std::size_t n = 60;
  auto g = symmetrized(build_graph(oracle::random_edges(n, 150, rng), n));
  std::vector<int> labels(n);
  for (auto& v : labels) v = static_cast<int>(rng() % 3);
  const LabelVector y(labels, 3);
  std::vector<SplitMasks> splits;
  for (int s = 0; s < 3; ++s) {
    std::vector<Role> roles(n);
    for (auto& r : roles) r = rng() % 3 == 0 ? Role::train : Role::test;
    roles[static_cast<std::size_t>(s)] = Role::train;
    splits.emplace_back(roles);
  }
  const std::vector<double> alphas{0.01, 0.5, 0.99};
  for (const CsrGraph& support : {g, two_hop_graph(g)}) {
    const auto sweep = label_prop_sweep(support, y, splits, alphas, 50);
    REQUIRE(sweep.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        LpConfig cfg;
        cfg.alpha = alphas[a];
        const auto one = label_prop_on(support, y, splits[s], cfg);
        CHECK((sweep[s][a].scores - one.scores).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(sweep[s][a].predictions == one.predictions);
      }
  }
  const double bad[] = {1.0};
  CHECK_THROWS_AS(label_prop_sweep(g, y, splits, bad, 50), InvalidArgument);
}
