// Small end-to-end experiments on planted graphs. Thresholds are loose
// enough for a handful of seeds; each case runs in a few seconds.
#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "glinkx/baselines.hpp"
#include "glinkx/kge.hpp"
#include "glinkx/mlap.hpp"
#include "glinkx/synth.hpp"

using namespace glinkx;

namespace {

PipelineConfig config(int epochs, std::size_t hidden = 32) {
  PipelineConfig cfg;
  for (StageConfig* s : {&cfg.stage2, &cfg.stage3}) {
    s->hidden = hidden;
    s->train.epochs = epochs;
    s->train.batch_size = 512;
    s->train.optimizer.lr = 0.01;
  }
  return cfg;
}

PlantedGraph planted(Regime r, std::uint64_t seed, std::size_t n, double centroid_scale = 1.0,
                     double homophily = 0.9) {
  PlantedConfig pc;
  pc.homophily = homophily;
  pc.n = n;
  pc.c = 4;
  pc.k = 10;
  pc.d = 8;
  pc.regime = r;
  pc.centroid_scale = centroid_scale;
  pc.seed = seed;
  return generate_planted(pc);
}

PipelineInputs inputs_of(const Dataset& d) {
  return PipelineInputs{&d.graph, &d.features, &d.labels, &d.splits[0], PeSource::adjacency, nullptr};
}

double accuracy_on(const std::vector<int>& pred, const LabelVector& y, std::span<const NodeId> rows) {
  double hit = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) hit += pred[k] == y.y[rows[k]];
  return hit / static_cast<double>(rows.size());
}

}  // namespace

TEST_CASE("stage 3 fed the true labels as y' is near perfect") {
  auto pg = planted(Regime::heterophilous, 11, 400, 0.2);
  const Dataset& d = pg.data;
  Matrix leak = Matrix::Zero(400, 4);
  for (NodeId v = 0; v < 400; ++v) leak(v, d.labels.y[v]) = 1;
  auto in = inputs_of(d);
  in.yprime_override = &leak;
  auto art = run_pipeline(in, config(40));
  CHECK(!art.stage2_ran);
  CHECK(art.test_accuracy >= 0.99);
}

TEST_CASE("uniform y' matches the ego+PE ablation") {
  double uniform = 0, ablated = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto pg = planted(Regime::homophilous, 20 + s, 1000, 0.3, 0.4);
    const Dataset& d = pg.data;
    const Matrix flat = Matrix::Constant(1000, 4, 0.25);
    auto in = inputs_of(d);
    auto cfg = config(40);
    cfg.seed = s;
    in.yprime_override = &flat;
    uniform += run_pipeline(in, cfg).test_accuracy;
    in.yprime_override = nullptr;
    ablated += run_pipeline(in, ablate(cfg, AblationTarget::propagation, AblationScope::stage3)).test_accuracy;
  }
  MESSAGE("uniform y' ", uniform / 5, " vs ego+pe ", ablated / 5);
  CHECK(std::abs(uniform - ablated) / 5 <= 0.02);
}

TEST_CASE("propagation carries monophily that symmetric KGE PEs cannot") {
  // DistMult scores are symmetric, so the two sides of a paired class
  // block get similar embeddings; only the propagated neighbour
  // distribution tells them apart.
  double full = 0, without = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    PlantedConfig pc;
    pc.n = 1000;
    pc.c = 4;
    pc.k = 20;
    pc.regime = Regime::heterophilous;
    pc.centroid_scale = 0.3;
    pc.seed = s;
    auto pg = generate_planted(pc);
    const Dataset& d = pg.data;
    KgeConfig kc;
    kc.dim = 16;
    kc.epochs = 10;
    kc.negatives = 50;
    kc.batch = 1000;
    const Matrix pe = kge_train(d.graph, kc, s).table.to_matrix();
    PipelineInputs in{&d.graph, &d.features, &d.labels, &d.splits[0], PeSource::kge, &pe};
    auto cfg = config(50);
    cfg.seed = s;
    full += run_pipeline(in, cfg).test_accuracy;
    without += run_pipeline(in, ablate(cfg, AblationTarget::propagation, AblationScope::all)).test_accuracy;
  }
  MESSAGE("full ", full / 3, " without propagation ", without / 3);
  CHECK((full - without) / 3 >= 0.10);
}

TEST_CASE("GLINKX is at least as accurate as 1-hop LP on a homophilous graph") {
  double ours = 0, lp = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto pg = planted(Regime::homophilous, 40 + s, 800, 0.3, 0.4);
    const Dataset& d = pg.data;
    auto cfg = config(60);
    cfg.seed = s;
    ours += run_pipeline(inputs_of(d), cfg).test_accuracy;
    const auto r = label_prop(d.graph, d.labels, d.splits[0], LpConfig{});
    std::vector<int> pred;
    for (NodeId v : d.splits[0].test()) pred.push_back(r.predictions[v]);
    lp += accuracy_on(pred, d.labels, d.splits[0].test());
  }
  MESSAGE("glinkx ", ours / 3, " lp ", lp / 3);
  CHECK(ours >= lp);
}

TEST_CASE("inductive predictions on held-out nodes track transductive accuracy") {
  auto pg = planted(Regime::homophilous, 50, 1000, 0.3, 0.4);
  const Dataset& d = pg.data;
  const std::size_t n = 1000;

  // Move 10% of the test nodes to the end of the id range so that the
  // known graph is the prefix [0, m).
  std::vector<NodeId> test = d.splits[0].test();
  const std::size_t hold = n / 10;
  std::vector<char> held(n, 0);
  for (std::size_t k = 0; k < hold; ++k) held[test[k]] = 1;
  std::vector<NodeId> order;
  for (NodeId v = 0; v < n; ++v)
    if (!held[v]) order.push_back(v);
  const std::size_t m = order.size();
  for (NodeId v = 0; v < n; ++v)
    if (held[v]) order.push_back(v);
  std::vector<NodeId> pos(n);
  for (std::size_t k = 0; k < n; ++k) pos[order[k]] = static_cast<NodeId>(k);

  std::vector<Edge> edges;
  for (const Edge& e : d.graph.edges()) edges.push_back({pos[e.src], pos[e.dst]});
  const CsrGraph full = build_graph(edges, n);
  Matrix x(n, d.features.cols());
  std::vector<int> labels(n);
  std::vector<Role> roles(n);
  for (std::size_t k = 0; k < n; ++k) {
    x.row(static_cast<Eigen::Index>(k)) = d.features.row(order[k]);
    labels[k] = d.labels.y[order[k]];
    roles[k] = d.splits[0].role(order[k]);
  }
  const LabelVector y(labels, 4);
  const SplitMasks all_masks(roles);
  std::vector<NodeId> fresh(hold);
  std::iota(fresh.begin(), fresh.end(), static_cast<NodeId>(m));

  auto cfg = config(60);
  PipelineInputs trans{&full, &x, &y, &all_masks, PeSource::adjacency, nullptr};
  const auto t = run_pipeline(trans, cfg);
  std::vector<int> tpred;
  for (NodeId v : fresh) tpred.push_back(argmax_row(t.final_probs, v));

  std::vector<NodeId> known(m);
  std::iota(known.begin(), known.end(), 0);
  const CsrGraph sub = induced_subgraph(full, known);
  const Matrix xs = x.topRows(static_cast<Eigen::Index>(m));
  const LabelVector ys(std::vector<int>(labels.begin(), labels.begin() + static_cast<long>(m)), 4);
  const SplitMasks ms(std::vector<Role>(roles.begin(), roles.begin() + static_cast<long>(m)));
  PipelineInputs ind{&sub, &xs, &ys, &ms, PeSource::adjacency, nullptr};
  const auto art = run_pipeline(ind, cfg);
  const auto pred = inductive_predict(make_inductive_model(ind, cfg, art), full, x, fresh);

  const double ta = accuracy_on(tpred, y, fresh), ia = accuracy_on(pred.predictions, y, fresh);
  MESSAGE("transductive ", ta, " inductive ", ia);
  CHECK(ia >= ta - 0.05);
}
