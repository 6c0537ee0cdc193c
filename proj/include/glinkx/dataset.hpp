#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "glinkx/graph.hpp"
#include "glinkx/matrix.hpp"

namespace glinkx {

struct Dataset {
  std::string name;
  CsrGraph graph;
  Matrix features;
  LabelVector labels;
  std::vector<SplitMasks> splits;
  bool directed = true;
  std::vector<std::string> node_ids;  // external id of each dense id

  void validate() const;
};

struct IngestPaths {
  std::filesystem::path edges;
  std::filesystem::path features;  // DMAT1, or tab/space separated text
  std::filesystem::path labels;
  std::vector<std::filesystem::path> splits;
};

struct IngestFlags {
  std::string name = "dataset";
  bool symmetrize = false;
  bool dedup = true;
  int classes = 0;  // 0: one more than the largest label seen
};

// Parses the text/DMAT1 inputs. Node ids are taken from the label file in
// order of appearance; every other file must reference only those ids.
Dataset ingest(const IngestPaths& paths, const IngestFlags& flags);

// Nodes revealed after training. `features` lists "id<TAB>values" rows for
// every new node (ids absent from `known`); `edges` may join new nodes to
// each other or to known ones. The result keeps the known ids [0, n) and
// appends the new ones in feature-file order.
struct Reveal {
  CsrGraph graph;
  Matrix features;
  std::vector<NodeId> new_nodes;
  std::vector<std::string> new_ids;
};
Reveal reveal_nodes(const Dataset& known, const std::filesystem::path& edges,
                    const std::filesystem::path& features);

// Bundle directory: manifest.json, features.dmat, edges.tsv, labels.tsv,
// split_<k>.tsv. The manifest stores counts and FNV-1a checksums of every
// file; load_bundle verifies them.
void save_bundle(const Dataset& d, const std::filesystem::path& dir);
Dataset load_bundle(const std::filesystem::path& dir);

// Serialized files of a bundle keyed by file name (byte-exact round trip).
std::map<std::string, std::vector<std::uint8_t>> serialize_bundle(const Dataset& d);

}  // namespace glinkx
