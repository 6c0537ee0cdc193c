#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "glinkx/error.hpp"
#include "glinkx/kge.hpp"
#include "oracles.hpp"

using namespace glinkx;

namespace {

CsrGraph two_cliques(std::size_t size) {
  std::vector<Edge> e;
  for (NodeId base : {NodeId(0), static_cast<NodeId>(size)})
    for (NodeId i = 0; i < size; ++i)
      for (NodeId j = 0; j < size; ++j)
        if (i != j) e.push_back({base + i, base + j});
  return build_graph(e, 2 * size);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("glinkx_unit_" + name);
}

}  // namespace

TEST_CASE("distmult score") {
  std::vector<float> h{1, 2}, t{3, 4};
  CHECK(distmult_score(h, t) == 11.0);
  std::vector<float> z(2, 0.0f);
  CHECK(distmult_score(z, t) == 0.0);
  CHECK(distmult_score(h, t) == distmult_score(t, h));
  std::vector<float> bad{1};
  CHECK_THROWS_AS(distmult_score(h, bad), DimensionError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> a(400), b(400);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    CHECK(std::abs(distmult_score(a, b) - oracle::dot(a, b)) < 1e-9);
    CHECK(distmult_score(a, b) == distmult_score(b, a));
  }
}

TEST_CASE("softmax and margin losses against brute force") {
  KgeConfig cfg;
  const double pos = 0.7;
  std::vector<double> negs{0.2, -1.0, 1.5};
  double denom = std::exp(pos);
  for (double s : negs) denom += std::exp(s);
  auto t = kge_loss(pos, negs, cfg);
  CHECK(t.loss == doctest::Approx(-std::log(std::exp(pos) / denom)).epsilon(1e-14));

  // coefficients are d(loss)/d(score): central differences on the scores
  auto numeric = [&](std::size_t k) {
    std::vector<double> all{pos, negs[0], negs[1], negs[2]};
    const double h = 1e-6;
    all[k] += h;
    const double up = kge_loss(all[0], std::span<const double>(all).subspan(1), cfg).loss;
    all[k] -= 2 * h;
    const double down = kge_loss(all[0], std::span<const double>(all).subspan(1), cfg).loss;
    return (up - down) / (2 * h);
  };
  for (std::size_t k = 0; k < 4; ++k) CHECK(t.coef[k] == doctest::Approx(numeric(k)).epsilon(1e-7));

  cfg.loss = KgeLoss::margin;
  cfg.margin = 1.0;
  auto m = kge_loss(pos, negs, cfg);
  // max(0, 1 - 0.7 + s): 0.5, 0 (clipped), 1.8
  CHECK(m.loss == doctest::Approx(0.5 + 1.8));
  CHECK(m.coef[0] == -2.0);
  CHECK(m.coef[1] == 1.0);
  CHECK(m.coef[2] == 0.0);
  CHECK(m.coef[3] == 1.0);
}

TEST_CASE("one positive, one negative: at most the four endpoint rows change") {
  std::vector<Edge> e{{0, 1}};
  auto g = build_graph(e, 6);
  KgeConfig cfg;
  cfg.dim = 4;
  cfg.negatives = 1;
  cfg.batch = 1;
  KgeTrainer t(g, cfg, 9);
  const KgeTable before = t.table();
  std::vector<NodeId> touched;
  t.step(e, &touched);
  std::set<NodeId> allowed(touched.begin(), touched.end());
  CHECK(allowed.count(0));
  CHECK(allowed.count(1));
  CHECK(allowed.size() <= 4);
  for (NodeId r = 0; r < 6; ++r) {
    bool changed = false;
    for (std::size_t k = 0; k < 4; ++k) changed |= before.row(r)[k] != t.table().row(r)[k];
    if (changed) CHECK(allowed.count(r));
  }
}

TEST_CASE("two disjoint cliques separate and training is deterministic") {
  auto g = two_cliques(10);
  for (auto loss : {KgeLoss::softmax, KgeLoss::margin}) {
    KgeConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 50;
    cfg.negatives = 10;
    cfg.batch = 20;
    cfg.lr = 0.1;
    cfg.loss = loss;
    auto a = kge_train(g, cfg, 4);
    auto b = kge_train(g, cfg, 4);
    CHECK(a.table == b.table);
    double intra = 0, cross = 0;
    std::size_t ni = 0, nc = 0;
    for (NodeId i = 0; i < 20; ++i)
      for (NodeId j = 0; j < 20; ++j) {
        if (i == j) continue;
        const double s = distmult_score(a.table.row(i), a.table.row(j));
        if ((i < 10) == (j < 10)) {
          intra += s;
          ++ni;
        } else {
          cross += s;
          ++nc;
        }
      }
    CHECK(intra / ni > cross / nc);
  }
}

TEST_CASE("negative sampling on a complete graph falls back after 100 tries") {
  std::vector<Edge> e;
  for (NodeId i = 0; i < 3; ++i)
    for (NodeId j = 0; j < 3; ++j) e.push_back({i, j});
  auto g = build_graph(e, 3);
  KgeConfig cfg;
  cfg.dim = 2;
  cfg.negatives = 2;
  cfg.epochs = 1;
  auto r = kge_train(g, cfg, 0);
  CHECK(r.fallback_negatives == 9 * 2);
}

TEST_CASE("KGE config validation and empty graphs") {
  KgeConfig cfg;
  cfg.negatives = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = KgeConfig{};
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  auto empty = build_graph({}, 3);
  CHECK_THROWS_AS(KgeTrainer(empty, KgeConfig{}, 0), InvalidArgument);
  CHECK(parse_kge_loss("margin") == KgeLoss::margin);
  CHECK_THROWS_AS(parse_kge_loss("hinge"), InvalidArgument);
}

TEST_CASE("export/import round trip and typed errors") {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> g(0, 1);
  std::vector<float> v(7 * 5);
  for (auto& x : v) x = g(rng);
  v[3] = -0.0f;
  KgeTable t(7, 5, v);
  auto path = temp_file("pe.dmat");
  export_kge(t, path);
  auto back = import_kge(path, 7);
  CHECK(back == t);
  CHECK(std::signbit(back.row(0)[3]));
  CHECK_THROWS_AS(import_kge(path, 8), DimensionError);

  auto bytes = read_file_bytes(path);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_kge(bytes), FormatError);
  auto cut = read_file_bytes(path);
  cut.resize(cut.size() - 3);
  CHECK_THROWS_AS(decode_kge(cut), FormatError);
  std::filesystem::remove(path);
}
