#include "glinkx/synth.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "glinkx/error.hpp"
#include "glinkx/nn.hpp"

namespace glinkx {

Regime parse_regime(const std::string& s) {
  if (s == "homophilous") return Regime::homophilous;
  if (s == "heterophilous") return Regime::heterophilous;
  if (s == "mixed") return Regime::mixed;
  if (s == "custom") return Regime::custom;
  throw InvalidArgument("unknown regime '" + s + "' (homophilous|heterophilous|mixed)");
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::homophilous: return "homophilous";
    case Regime::heterophilous: return "heterophilous";
    case Regime::mixed: return "mixed";
    case Regime::custom: return "custom";
  }
  return "?";
}

Matrix homophily_mixing(std::size_t c, double p) {
  if (c < 2) throw InvalidArgument("mixing matrix needs c >= 2");
  if (p < 0 || p > 1) throw InvalidArgument("diagonal weight must lie in [0,1]");
  const auto cc = static_cast<Eigen::Index>(c);
  Matrix m = Matrix::Constant(cc, cc, (1 - p) / static_cast<double>(c - 1));
  m.diagonal().setConstant(p);
  return m;
}

Matrix paired_mixing(std::size_t c) {
  if (c < 2 || c % 2) throw InvalidArgument("paired mixing needs an even class count");
  const auto cc = static_cast<Eigen::Index>(c);
  Matrix m = Matrix::Zero(cc, cc);
  for (Eigen::Index a = 0; a < cc; ++a) m(a, a ^ 1) = 1.0;
  return m;
}

double calibrated_diagonal(double h, std::size_t c) {
  if (h < 0 || h > 1) throw InvalidArgument("target homophily must lie in [0,1]");
  const double cd = static_cast<double>(c);
  return h * (cd - 1) / cd + 1 / cd;
}

namespace {

void check_mixing(const Matrix& m, std::size_t c) {
  if (static_cast<std::size_t>(m.rows()) != c || static_cast<std::size_t>(m.cols()) != c)
    throw DimensionError("mixing matrix must be c x c");
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    if ((m.row(a).array() < 0).any() || std::abs(m.row(a).sum() - 1) > 1e-9)
      throw InvalidArgument("mixing matrix row " + std::to_string(a) + " is not on the simplex");
  }
}

}  // namespace

PlantedGraph generate_planted(const PlantedConfig& cfg) {
  const std::size_t n = cfg.n, c = cfg.c;
  if (c < 2) throw InvalidArgument("need c >= 2");
  if (cfg.k < 1) throw InvalidArgument("degree must be >= 1");
  if (cfg.k >= n) throw InvalidArgument("infeasible degree: k >= n");
  if (n < 2 * c) throw InvalidArgument("too few nodes for the class count");
  if (cfg.train_frac <= 0 || cfg.valid_frac < 0 || cfg.train_frac + cfg.valid_frac > 1)
    throw InvalidArgument("split fractions must be positive and sum to at most 1");

  std::array<Matrix, 2> mix;
  switch (cfg.regime) {
    case Regime::homophilous: mix[0] = mix[1] = homophily_mixing(c, cfg.homophily); break;
    case Regime::heterophilous: mix[0] = mix[1] = paired_mixing(c); break;
    case Regime::mixed:
      mix[0] = homophily_mixing(c, cfg.homophily);
      mix[1] = paired_mixing(c);
      break;
    case Regime::custom: mix[0] = mix[1] = cfg.mixing; break;
  }
  check_mixing(mix[0], c);

  Rng rng(cfg.seed);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % c);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<int> region(n, 0);
  if (cfg.regime == Regime::mixed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = n / 2; k < n; ++k) region[perm[k]] = 1;
  }

  std::vector<std::vector<NodeId>> pool(2 * c);
  for (NodeId v = 0; v < n; ++v)
    pool[static_cast<std::size_t>(region[v]) * c + static_cast<std::size_t>(labels[v])].push_back(v);

  std::array<std::vector<std::discrete_distribution<int>>, 2> pick;
  for (int r = 0; r < 2; ++r)
    for (std::size_t a = 0; a < c; ++a) {
      const auto row = mix[r].row(static_cast<Eigen::Index>(a));
      pick[r].emplace_back(row.data(), row.data() + row.size());
    }

  const std::size_t draws = std::max<std::size_t>(1, cfg.k / 2);
  std::vector<Edge> edges;
  edges.reserve(n * draws);
  for (NodeId v = 0; v < n; ++v) {
    const int r = region[v];
    for (std::size_t t = 0; t < draws; ++t) {
      const auto cls = static_cast<std::size_t>(pick[r][static_cast<std::size_t>(labels[v])](rng));
      const auto& cand = pool[static_cast<std::size_t>(r) * c + cls];
      if (cand.empty() || (cand.size() == 1 && cand[0] == v)) continue;
      std::uniform_int_distribution<std::size_t> u(0, cand.size() - 1);
      NodeId w = cand[u(rng)];
      while (w == v) w = cand[u(rng)];
      edges.push_back({v, w});
    }
  }

  PlantedGraph out;
  out.mixing = mix[0];
  out.region = region;
  Dataset& d = out.data;
  d.name = std::string("planted-") + regime_name(cfg.regime);
  d.directed = false;
  d.graph = build_graph(edges, n, true, true);
  d.labels = LabelVector(labels, static_cast<int>(c));

  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix centroids(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(cfg.d));
  for (Eigen::Index i = 0; i < centroids.size(); ++i) centroids.data()[i] = cfg.centroid_scale * gauss(rng);
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.d));
  for (NodeId v = 0; v < n; ++v)
    for (Eigen::Index j = 0; j < d.features.cols(); ++j)
      d.features(v, j) = centroids(labels[v], j) + cfg.sigma * gauss(rng);

  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.train_frac * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(cfg.valid_frac * static_cast<double>(n));
  std::vector<Role> roles(n, Role::test);
  for (std::size_t k = 0; k < n; ++k)
    roles[perm[k]] = k < n_train ? Role::train : k < n_train + n_valid ? Role::valid : Role::test;
  d.splits.emplace_back(std::move(roles));
  d.node_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.node_ids[i] = std::to_string(i);
  return out;
}

double two_hop_agreement(const CsrGraph& g, const LabelVector& y) {
  if (y.size() != g.num_nodes()) throw DimensionError("labels do not cover the graph");
  double same = 0, total = 0;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (NodeId k : g.out_neighbors(i))
      for (NodeId j : g.out_neighbors(k)) {
        if (j == i) continue;
        total += 1;
        same += y.y[i] == y.y[j];
      }
  if (total == 0) throw InvalidArgument("graph has no 2-step walks");
  return same / total;
}

}  // namespace glinkx
