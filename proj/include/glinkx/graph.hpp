#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace glinkx {

using NodeId = std::uint32_t;

struct Edge {
  NodeId src;
  NodeId dst;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Immutable directed graph stored twice: CSR over out-edges and CSR over
// in-edges (the exact transpose). Neighbor lists are sorted by node id.
class CsrGraph {
 public:
  CsrGraph();

  std::size_t num_nodes() const { return out_offsets_.size() - 1; }
  std::size_t num_edges() const { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId v) const {
    return {out_targets_.data() + out_offsets_[v],
            out_offsets_[v + 1] - out_offsets_[v]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_sources_.data() + in_offsets_[v],
            in_offsets_[v + 1] - in_offsets_[v]};
  }
  std::size_t out_degree(NodeId v) const {
    return out_offsets_[v + 1] - out_offsets_[v];
  }
  std::size_t in_degree(NodeId v) const {
    return in_offsets_[v + 1] - in_offsets_[v];
  }

  bool has_edge(NodeId src, NodeId dst) const;

  // Edges in CSR order (by source, then target).
  std::vector<Edge> edges() const;

  std::span<const std::size_t> out_offsets() const { return out_offsets_; }
  std::span<const NodeId> out_targets() const { return out_targets_; }
  std::span<const std::size_t> in_offsets() const { return in_offsets_; }
  std::span<const NodeId> in_sources() const { return in_sources_; }

  // True when every edge (u,v) has its reverse (v,u).
  bool is_symmetric() const;

 private:
  friend CsrGraph build_graph(std::span<const Edge>, std::size_t, bool, bool);

  std::vector<std::size_t> out_offsets_;
  std::vector<NodeId> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<NodeId> in_sources_;
};

// Builds a graph on nodes 0..n-1. With `symmetrize`, the reverse of every
// edge is added; with `dedup`, repeated (src,dst) pairs collapse to one.
// Self-loops are kept as given and never introduced.
CsrGraph build_graph(std::span<const Edge> edges, std::size_t n,
                     bool symmetrize = false, bool dedup = true);

CsrGraph symmetrized(const CsrGraph& g);

// Subgraph induced by `nodes`; node k of the result is nodes[k].
CsrGraph induced_subgraph(const CsrGraph& g, std::span<const NodeId> nodes);

// ---------------------------------------------------------------------------

enum class Role : std::uint8_t { train = 0, valid = 1, test = 2 };

const char* role_name(Role r);
Role parse_role(const std::string& s);

// One train/valid/test assignment covering every node.
class SplitMasks {
 public:
  SplitMasks() = default;
  explicit SplitMasks(std::vector<Role> roles);

  std::size_t size() const { return roles_.size(); }
  Role role(NodeId v) const { return roles_[v]; }
  const std::vector<Role>& roles() const { return roles_; }

  const std::vector<NodeId>& train() const { return train_; }
  const std::vector<NodeId>& valid() const { return valid_; }
  const std::vector<NodeId>& test() const { return test_; }
  const std::vector<NodeId>& nodes(Role r) const;

  bool is_train(NodeId v) const { return roles_[v] == Role::train; }

 private:
  std::vector<Role> roles_;
  std::vector<NodeId> train_, valid_, test_;
};

// Per-node class ids; kUnknown marks nodes whose label is not available.
struct LabelVector {
  static constexpr int kUnknown = -1;

  std::vector<int> y;
  int classes = 0;

  LabelVector() = default;
  LabelVector(std::vector<int> labels, int num_classes);

  std::size_t size() const { return y.size(); }
  bool known(NodeId v) const { return y[v] != kUnknown; }
  bool all_known() const;
};

// Fraction of edges whose endpoints share a label.
double edge_homophily(const CsrGraph& g, const LabelVector& y);

// Mean over nodes with at least one out-neighbor of the fraction of
// out-neighbors sharing the node's label.
double node_homophily(const CsrGraph& g, const LabelVector& y);

// Per-node same-label neighbor fraction; NaN for nodes without out-edges.
std::vector<double> node_homophily_values(const CsrGraph& g,
                                          const LabelVector& y);

// (1/(C-1)) * sum_k max(0, h_k - |C_k|/n), h_k the edge homophily of the
// out-edges leaving class k.
double class_insensitive_homophily(const CsrGraph& g, const LabelVector& y);

}  // namespace glinkx
