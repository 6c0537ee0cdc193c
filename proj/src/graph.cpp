#include "glinkx/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glinkx/error.hpp"

namespace glinkx {

CsrGraph::CsrGraph() : out_offsets_(1, 0), in_offsets_(1, 0) {}

bool CsrGraph::has_edge(NodeId src, NodeId dst) const {
  auto nbrs = out_neighbors(src);
  return std::binary_search(nbrs.begin(), nbrs.end(), dst);
}

std::vector<Edge> CsrGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : out_neighbors(u)) out.push_back({u, v});
  return out;
}

bool CsrGraph::is_symmetric() const {
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : out_neighbors(u))
      if (!has_edge(v, u)) return false;
  return true;
}

namespace {

// Counting sort of (key, value) pairs into CSR arrays; values inside a row
// are then sorted so neighbor lists are ordered.
void fill_csr(std::size_t n, std::span<const Edge> edges, bool by_src,
              std::vector<std::size_t>& offsets, std::vector<NodeId>& values) {
  offsets.assign(n + 1, 0);
  for (const Edge& e : edges) ++offsets[(by_src ? e.src : e.dst) + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  values.assign(edges.size(), 0);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Edge& e : edges) {
    NodeId key = by_src ? e.src : e.dst;
    values[cursor[key]++] = by_src ? e.dst : e.src;
  }
  for (std::size_t i = 0; i < n; ++i)
    std::sort(values.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
              values.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
}

}  // namespace

CsrGraph build_graph(std::span<const Edge> edges, std::size_t n,
                     bool symmetrize, bool dedup) {
  if (n > std::numeric_limits<NodeId>::max())
    throw InvalidArgument("node count exceeds 32-bit id range");
  std::vector<Edge> all;
  all.reserve(edges.size() * (symmetrize ? 2 : 1));
  std::size_t line = 0;
  for (const Edge& e : edges) {
    if (e.src >= n || e.dst >= n)
      throw InvalidArgument("edge " + std::to_string(line) + " (" +
                            std::to_string(e.src) + "," +
                            std::to_string(e.dst) +
                            ") has an endpoint >= n=" + std::to_string(n));
    all.push_back(e);
    if (symmetrize && e.src != e.dst) all.push_back({e.dst, e.src});
    ++line;
  }
  if (dedup) {
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
  }
  CsrGraph g;
  fill_csr(n, all, true, g.out_offsets_, g.out_targets_);
  fill_csr(n, all, false, g.in_offsets_, g.in_sources_);
  return g;
}

CsrGraph symmetrized(const CsrGraph& g) {
  auto e = g.edges();
  return build_graph(e, g.num_nodes(), true, true);
}

CsrGraph induced_subgraph(const CsrGraph& g, std::span<const NodeId> nodes) {
  constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(g.num_nodes(), kAbsent);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= g.num_nodes())
      throw InvalidArgument("induced_subgraph: node id out of range");
    local[nodes[k]] = static_cast<NodeId>(k);
  }
  std::vector<Edge> kept;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (NodeId v : g.out_neighbors(nodes[k]))
      if (local[v] != kAbsent) kept.push_back({static_cast<NodeId>(k), local[v]});
  return build_graph(kept, nodes.size(), false, false);
}

// ---------------------------------------------------------------------------

const char* role_name(Role r) {
  switch (r) {
    case Role::train: return "train";
    case Role::valid: return "valid";
    case Role::test: return "test";
  }
  return "?";
}

Role parse_role(const std::string& s) {
  if (s == "train") return Role::train;
  if (s == "valid" || s == "val") return Role::valid;
  if (s == "test") return Role::test;
  throw InvalidArgument("unknown split role '" + s + "'");
}

SplitMasks::SplitMasks(std::vector<Role> roles) : roles_(std::move(roles)) {
  for (NodeId v = 0; v < roles_.size(); ++v) {
    switch (roles_[v]) {
      case Role::train: train_.push_back(v); break;
      case Role::valid: valid_.push_back(v); break;
      case Role::test: test_.push_back(v); break;
    }
  }
  if (train_.empty()) throw InvalidArgument("split has no train nodes");
}

const std::vector<NodeId>& SplitMasks::nodes(Role r) const {
  switch (r) {
    case Role::train: return train_;
    case Role::valid: return valid_;
    case Role::test: return test_;
  }
  return train_;
}

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : y(std::move(labels)), classes(num_classes) {
  if (classes < 2) throw InvalidArgument("need at least 2 classes");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != kUnknown && (y[i] < 0 || y[i] >= classes))
      throw InvalidArgument("label " + std::to_string(y[i]) + " of node " +
                            std::to_string(i) + " outside [0," +
                            std::to_string(classes) + ")");
}

bool LabelVector::all_known() const {
  return std::none_of(y.begin(), y.end(), [](int v) { return v == kUnknown; });
}

// ---------------------------------------------------------------------------

namespace {

void require_known(const CsrGraph& g, const LabelVector& y) {
  if (y.size() != g.num_nodes())
    throw DimensionError("label vector length " + std::to_string(y.size()) +
                         " != node count " + std::to_string(g.num_nodes()));
  if (!y.all_known())
    throw InvalidArgument("homophily measures need every label known");
}

}  // namespace

double edge_homophily(const CsrGraph& g, const LabelVector& y) {
  require_known(g, y);
  if (g.num_edges() == 0) throw InvalidArgument("no edges");
  std::size_t same = 0;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.out_neighbors(u)) same += y.y[u] == y.y[v];
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

std::vector<double> node_homophily_values(const CsrGraph& g,
                                          const LabelVector& y) {
  require_known(g, y);
  std::vector<double> h(g.num_nodes(), std::nan(""));
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    auto nbrs = g.out_neighbors(u);
    if (nbrs.empty()) continue;
    std::size_t same = 0;
    for (NodeId v : nbrs) same += y.y[u] == y.y[v];
    h[u] = static_cast<double>(same) / static_cast<double>(nbrs.size());
  }
  return h;
}

double node_homophily(const CsrGraph& g, const LabelVector& y) {
  auto h = node_homophily_values(g, y);
  double sum = 0;
  std::size_t count = 0;
  for (double v : h)
    if (!std::isnan(v)) {
      sum += v;
      ++count;
    }
  if (count == 0) throw InvalidArgument("all nodes isolated");
  return sum / static_cast<double>(count);
}

double class_insensitive_homophily(const CsrGraph& g, const LabelVector& y) {
  require_known(g, y);
  const auto c = static_cast<std::size_t>(y.classes);
  std::vector<double> same(c, 0), total(c, 0), members(c, 0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto k = static_cast<std::size_t>(y.y[u]);
    members[k] += 1;
    for (NodeId v : g.out_neighbors(u)) {
      total[k] += 1;
      same[k] += y.y[u] == y.y[v];
    }
  }
  if (g.num_edges() == 0) throw InvalidArgument("all nodes isolated");
  const double n = static_cast<double>(g.num_nodes());
  double acc = 0;
  for (std::size_t k = 0; k < c; ++k) {
    if (total[k] == 0) continue;  // class without out-edges contributes 0
    acc += std::max(0.0, same[k] / total[k] - members[k] / n);
  }
  return acc / static_cast<double>(c - 1);
}

}  // namespace glinkx
