#include "glinkx/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "glinkx/error.hpp"

namespace glinkx {

void LpConfig::validate() const {
  if (!(alpha > 0 && alpha < 1)) throw InvalidArgument("LP alpha must lie in (0,1)");
  if (hops != 1 && hops != 2) throw InvalidArgument("LP hops must be 1 or 2");
  if (iterations < 1) throw InvalidArgument("LP iterations must be >= 1");
}

namespace {

// Calls emit(i, j, count) for every j reachable from i by a 2-step walk,
// with count = (A^2)_ij.
template <class Emit>
void for_each_two_hop(const CsrGraph& g, Emit&& emit) {
  const std::size_t n = g.num_nodes();
  std::vector<std::uint32_t> count(n, 0);
  std::vector<NodeId> seen;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId k : g.out_neighbors(i))
      for (NodeId j : g.out_neighbors(k)) {
        if (count[j]++ == 0) seen.push_back(j);
      }
    std::sort(seen.begin(), seen.end());
    for (NodeId j : seen) {
      emit(i, j, count[j]);
      count[j] = 0;
    }
    seen.clear();
  }
}

}  // namespace

CsrGraph two_hop_graph(const CsrGraph& g) {
  std::vector<Edge> edges;
  for_each_two_hop(g, [&](NodeId i, NodeId j, std::uint32_t) {
    if (i != j) edges.push_back({i, j});
  });
  return build_graph(edges, g.num_nodes(), false, false);
}

CsrGraph masked_two_hop_graph(const CsrGraph& g) {
  std::vector<Edge> edges;
  for_each_two_hop(g, [&](NodeId i, NodeId j, std::uint32_t c) {
    if (i == j) return;
    const long v = static_cast<long>(c) - (g.has_edge(i, j) ? 1 : 0);
    if (v >= 1) edges.push_back({i, j});
  });
  return build_graph(edges, g.num_nodes(), false, false);
}

namespace {

using LpOperator = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

// S = D^-1/2 (A+I) D^-1/2 with D = out-degree + 1; a stored self-loop is
// counted once in A and once in I.
LpOperator lp_operator(const CsrGraph& s) {
  const std::size_t n = s.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeId i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(s.out_degree(i) + 1));
  std::vector<Eigen::Triplet<double, std::int64_t>> t;
  t.reserve(s.num_edges() + n);
  for (NodeId i = 0; i < n; ++i) {
    t.emplace_back(i, i, inv_sqrt[i] * inv_sqrt[i]);
    for (NodeId j : s.out_neighbors(i)) t.emplace_back(i, j, inv_sqrt[i] * inv_sqrt[j]);
  }
  LpOperator op(static_cast<std::int64_t>(n), static_cast<std::int64_t>(n));
  op.setFromTriplets(t.begin(), t.end());  // duplicates are summed
  return op;
}

struct Seeds {
  Matrix y0;
  int majority = 0;
};

Seeds lp_seeds(const LabelVector& y, const SplitMasks& masks) {
  const auto c = static_cast<Eigen::Index>(y.classes);
  Seeds out{Matrix::Zero(static_cast<Eigen::Index>(y.size()), c), 0};
  std::vector<std::size_t> votes(static_cast<std::size_t>(c), 0);
  for (NodeId v : masks.train()) {
    if (!y.known(v)) throw InvalidArgument("LP: train node " + std::to_string(v) + " has no label");
    out.y0(v, y.y[v]) = 1.0;
    ++votes[static_cast<std::size_t>(y.y[v])];
  }
  out.majority = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  return out;
}

LpResult finish(Matrix scores, int majority) {
  const auto n = static_cast<std::size_t>(scores.rows());
  LpResult out;
  out.predictions.resize(n);
  out.fallback.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (scores.row(r).maxCoeff() <= 0) {
      out.predictions[i] = majority;
      out.fallback[i] = 1;
      continue;
    }
    // scores equal up to rounding are a tie, and ties go to the lowest class
    const double eps = 1e-12 * scores.row(r).maxCoeff();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(r, k) > scores(r, best) + eps) best = k;
    out.predictions[i] = static_cast<int>(best);
  }
  out.scores = std::move(scores);
  return out;
}

}  // namespace

LpResult label_prop_on(const CsrGraph& s, const LabelVector& y, const SplitMasks& masks,
                       const LpConfig& cfg) {
  cfg.validate();
  const std::size_t n = s.num_nodes();
  if (y.size() != n || masks.size() != n) throw DimensionError("LP: labels/masks do not cover the graph");
  const Seeds seeds = lp_seeds(y, masks);
  const LpOperator op = lp_operator(s);
  Matrix cur = seeds.y0, next;
  for (int it = 0; it < cfg.iterations; ++it) {
    next.noalias() = cfg.alpha * (op * cur);
    next += (1 - cfg.alpha) * seeds.y0;
    if (cfg.clamp)
      for (NodeId v : masks.train()) next.row(v) = seeds.y0.row(v);
    std::swap(cur, next);
  }
  return finish(std::move(cur), seeds.majority);
}

std::vector<std::vector<LpResult>> label_prop_sweep(const CsrGraph& s, const LabelVector& y,
                                                    std::span<const SplitMasks> splits,
                                                    std::span<const double> alphas, int iterations) {
  for (double a : alphas) {
    LpConfig check;
    check.alpha = a;
    check.iterations = iterations;
    check.validate();
  }
  const std::size_t n = s.num_nodes();
  const auto c = static_cast<Eigen::Index>(y.classes);
  const auto k = static_cast<Eigen::Index>(splits.size());
  if (y.size() != n) throw DimensionError("LP: labels do not cover the graph");
  Matrix power(static_cast<Eigen::Index>(n), c * k);
  std::vector<int> majority;
  for (Eigen::Index b = 0; b < k; ++b) {
    if (splits[static_cast<std::size_t>(b)].size() != n) throw DimensionError("LP: masks do not cover the graph");
    Seeds sd = lp_seeds(y, splits[static_cast<std::size_t>(b)]);
    power.middleCols(b * c, c) = sd.y0;
    majority.push_back(sd.majority);
  }
  const LpOperator op = lp_operator(s);
  // Unrolled recurrence: Y_T = (1-a) sum_{t<T} a^t S^t Y0 + a^T S^T Y0.
  std::vector<Matrix> acc(alphas.size(), Matrix::Zero(power.rows(), power.cols()));
  std::vector<double> weight(alphas.size(), 1.0);
  Matrix next;
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      acc[a] += ((1 - alphas[a]) * weight[a]) * power;
      weight[a] *= alphas[a];
    }
    next.noalias() = op * power;
    std::swap(power, next);
  }
  std::vector<std::vector<LpResult>> out(splits.size());
  for (Eigen::Index b = 0; b < k; ++b)
    for (std::size_t a = 0; a < alphas.size(); ++a)
      out[static_cast<std::size_t>(b)].push_back(
          finish(acc[a].middleCols(b * c, c) + weight[a] * power.middleCols(b * c, c), majority[static_cast<std::size_t>(b)]));
  return out;
}

LpResult label_prop(const CsrGraph& g, const LabelVector& y, const SplitMasks& masks,
                    const LpConfig& cfg) {
  cfg.validate();
  const CsrGraph base = cfg.symmetrize ? symmetrized(g) : g;
  if (cfg.hops == 1) return label_prop_on(base, y, masks, cfg);
  return label_prop_on(two_hop_graph(base), y, masks, cfg);
}

LpResult label_prop_masked(const CsrGraph& g, const LabelVector& y, const SplitMasks& masks,
                           const LpConfig& cfg) {
  cfg.validate();
  const CsrGraph base = cfg.symmetrize ? symmetrized(g) : g;
  const CsrGraph m = masked_two_hop_graph(base);
  if (m.num_edges() == 0) throw InvalidArgument("no 2-hop-exclusive structure");
  return label_prop_on(m, y, masks, cfg);
}

// ---------------------------------------------------------------------------

namespace {

BaselineResult classifier(const CsrGraph& g, const Matrix& X, const LabelVector& y,
                          const SplitMasks& masks, const StageConfig& cfg, std::uint64_t seed,
                          bool use_adjacency) {
  PipelineConfig pc;
  pc.stage3 = cfg;
  pc.stage3_branches = {true, use_adjacency, false};
  pc.seed = seed;
  PipelineInputs in{&g, &X, &y, &masks, PeSource::adjacency, nullptr};
  PipelineArtifacts art = run_pipeline(in, pc);
  BaselineResult r;
  r.valid_accuracy = art.valid_accuracy;
  r.test_accuracy = art.test_accuracy;
  r.spec = art.stage3_spec;
  r.train = std::move(art.stage3);
  return r;
}

}  // namespace

BaselineResult feature_mlp_baseline(const Matrix& X, const LabelVector& y,
                                    const SplitMasks& masks, const StageConfig& cfg,
                                    std::uint64_t seed) {
  const CsrGraph empty = build_graph({}, static_cast<std::size_t>(X.rows()));
  return classifier(empty, X, y, masks, cfg, seed, false);
}

BaselineResult linkx_baseline(const CsrGraph& g, const Matrix& X, const LabelVector& y,
                              const SplitMasks& masks, const StageConfig& cfg,
                              std::uint64_t seed) {
  return classifier(g, X, y, masks, cfg, seed, true);
}

}  // namespace glinkx
