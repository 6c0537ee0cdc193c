#include "glinkx/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "glinkx/error.hpp"
#include "json.hpp"

namespace glinkx {

void Dataset::validate() const {
  const std::size_t n = graph.num_nodes();
  if (static_cast<std::size_t>(features.rows()) != n)
    throw DimensionError("feature rows " + std::to_string(features.rows()) + " != n=" + std::to_string(n));
  if (labels.size() != n) throw DimensionError("label count != n");
  for (std::size_t k = 0; k < splits.size(); ++k)
    if (splits[k].size() != n) throw DimensionError("split " + std::to_string(k) + " does not cover every node");
  if (!node_ids.empty() && node_ids.size() != n) throw DimensionError("node id table size != n");
}

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

std::vector<Line> read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(path.string(), 0, "cannot open file");
  std::vector<Line> out;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos || text[first] == '#') continue;
    Line line{number, {}};
    std::string field;
    std::istringstream ss(text);
    while (ss >> field) line.fields.push_back(field);
    out.push_back(std::move(line));
  }
  return out;
}

template <class T>
bool parse_number(const std::string& s, T& v) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

class IdMap {
 public:
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  bool add(const std::string& id) {
    if (!index_.emplace(id, static_cast<NodeId>(ids_.size())).second) return false;
    ids_.push_back(id);
    return true;
  }
  NodeId at(const std::string& id, const std::string& file, std::size_t line) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw IngestError(file, line, "unknown node id '" + id + "'");
    return it->second;
  }

 private:
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::string> ids_;
};

struct Parsed {
  IdMap ids;
  std::vector<int> labels;
  int classes = 0;
};

Parsed parse_labels(const std::filesystem::path& path, int classes) {
  const std::string file = path.string();
  Parsed p;
  int max_label = -1;
  for (const Line& l : read_table(path)) {
    if (l.fields.size() != 2) throw IngestError(file, l.number, "expected 'node<TAB>label'");
    if (!p.ids.add(l.fields[0])) throw IngestError(file, l.number, "duplicate node id '" + l.fields[0] + "'");
    int v = LabelVector::kUnknown;
    if (l.fields[1] != "?" && l.fields[1] != "-1") {
      if (!parse_number(l.fields[1], v) || v < 0)
        throw IngestError(file, l.number, "label '" + l.fields[1] + "' is not a class id");
      if (classes > 0 && v >= classes)
        throw IngestError(file, l.number, "label " + std::to_string(v) + " >= c=" + std::to_string(classes));
    }
    max_label = std::max(max_label, v);
    p.labels.push_back(v);
  }
  if (p.ids.size() == 0) throw IngestError(file, 0, "no nodes");
  p.classes = classes > 0 ? classes : max_label + 1;
  if (p.classes < 2) throw IngestError(file, 0, "fewer than 2 classes");
  return p;
}

std::vector<Edge> parse_edges(const std::filesystem::path& path, const IdMap& ids) {
  const std::string file = path.string();
  std::vector<Edge> edges;
  for (const Line& l : read_table(path)) {
    if (l.fields.size() != 2) throw IngestError(file, l.number, "expected 'src<TAB>dst'");
    edges.push_back({ids.at(l.fields[0], file, l.number), ids.at(l.fields[1], file, l.number)});
  }
  return edges;
}

bool is_dmat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[sizeof(kDmatMagic)] = {};
  in.read(magic, sizeof(magic));
  return in && std::equal(std::begin(magic), std::end(magic), std::begin(kDmatMagic));
}

Matrix parse_features(const std::filesystem::path& path, const IdMap& ids) {
  const std::string file = path.string();
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (is_dmat(path)) {
    Matrix x;
    try {
      x = read_dmat(path);
    } catch (const FormatError& e) {
      throw IngestError(file, 0, e.what());
    }
    if (x.rows() != n)
      throw IngestError(file, 0, "feature matrix has " + std::to_string(x.rows()) + " rows, expected n=" +
                                     std::to_string(n));
    return x;
  }
  // Text: "node<TAB>v1 v2 ..." (commas also accepted as separators).
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::size_t dim = 0;
  bool have_dim = false;
  std::size_t count = 0;
  for (Line l : read_table(path)) {
    if (l.fields.size() < 2) throw IngestError(file, l.number, "expected 'node<TAB>values'");
    const NodeId v = ids.at(l.fields[0], file, l.number);
    if (seen[v]) throw IngestError(file, l.number, "duplicate feature row for '" + l.fields[0] + "'");
    seen[v] = 1;
    ++count;
    std::vector<double> vals;
    for (std::size_t k = 1; k < l.fields.size(); ++k) {
      std::string tok;
      std::istringstream ss(l.fields[k]);
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        double d;
        if (!parse_number(tok, d)) throw IngestError(file, l.number, "bad number '" + tok + "'");
        vals.push_back(d);
      }
    }
    if (!have_dim) {
      dim = vals.size();
      have_dim = true;
    } else if (vals.size() != dim) {
      throw IngestError(file, l.number, "row has " + std::to_string(vals.size()) + " values, expected " +
                                            std::to_string(dim));
    }
    rows[v] = std::move(vals);
  }
  if (count != static_cast<std::size_t>(n))
    throw IngestError(file, 0, "feature file has " + std::to_string(count) + " rows, expected n=" +
                                   std::to_string(n));
  Matrix x(n, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) x(i, static_cast<Eigen::Index>(j)) = rows[static_cast<std::size_t>(i)][j];
  if (!x.allFinite()) throw IngestError(file, 0, "non-finite feature value");
  return x;
}

SplitMasks parse_split(const std::filesystem::path& path, const IdMap& ids) {
  const std::string file = path.string();
  std::vector<Role> roles(ids.size(), Role::test);
  std::vector<char> seen(ids.size(), 0);
  for (const Line& l : read_table(path)) {
    if (l.fields.size() != 2) throw IngestError(file, l.number, "expected 'node<TAB>role'");
    const NodeId v = ids.at(l.fields[0], file, l.number);
    if (seen[v]) throw IngestError(file, l.number, "node '" + l.fields[0] + "' listed twice");
    seen[v] = 1;
    try {
      roles[v] = parse_role(l.fields[1]);
    } catch (const InvalidArgument& e) {
      throw IngestError(file, l.number, e.what());
    }
  }
  for (std::size_t v = 0; v < ids.size(); ++v)
    if (!seen[v]) throw IngestError(file, 0, "node '" + ids.ids()[v] + "' has no role");
  try {
    return SplitMasks(std::move(roles));
  } catch (const InvalidArgument& e) {
    throw IngestError(file, 0, e.what());
  }
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string split_name(std::size_t k) { return "split_" + std::to_string(k) + ".tsv"; }

}  // namespace

Dataset ingest(const IngestPaths& paths, const IngestFlags& flags) {
  Parsed p = parse_labels(paths.labels, flags.classes);
  Dataset d;
  d.name = flags.name;
  d.directed = !flags.symmetrize;
  const auto edges = parse_edges(paths.edges, p.ids);
  d.graph = build_graph(edges, p.ids.size(), flags.symmetrize, flags.dedup);
  d.features = parse_features(paths.features, p.ids);
  d.labels = LabelVector(std::move(p.labels), p.classes);
  for (const auto& s : paths.splits) d.splits.push_back(parse_split(s, p.ids));
  d.node_ids = p.ids.ids();
  d.validate();
  return d;
}

Reveal reveal_nodes(const Dataset& known, const std::filesystem::path& edges,
                    const std::filesystem::path& features) {
  const std::string ffile = features.string();
  const std::size_t n = known.graph.num_nodes();
  if (known.node_ids.size() != n) throw InvalidArgument("known dataset has no node id table");
  IdMap ids;
  for (const auto& id : known.node_ids) ids.add(id);
  Reveal r;
  std::vector<std::vector<double>> rows;
  for (const Line& l : read_table(features)) {
    if (l.fields.size() < 2) throw IngestError(ffile, l.number, "expected 'node<TAB>values'");
    if (!ids.add(l.fields[0])) throw IngestError(ffile, l.number, "node '" + l.fields[0] + "' is not new");
    std::vector<double> vals;
    for (std::size_t k = 1; k < l.fields.size(); ++k) {
      std::string tok;
      std::istringstream ss(l.fields[k]);
      while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        double d;
        if (!parse_number(tok, d) || !std::isfinite(d)) throw IngestError(ffile, l.number, "bad number '" + tok + "'");
        vals.push_back(d);
      }
    }
    if (static_cast<Eigen::Index>(vals.size()) != known.features.cols())
      throw IngestError(ffile, l.number, "row has " + std::to_string(vals.size()) + " values, expected " +
                                             std::to_string(known.features.cols()));
    r.new_nodes.push_back(static_cast<NodeId>(n + rows.size()));
    r.new_ids.push_back(l.fields[0]);
    rows.push_back(std::move(vals));
  }
  r.features.resize(static_cast<Eigen::Index>(n + rows.size()), known.features.cols());
  r.features.topRows(static_cast<Eigen::Index>(n)) = known.features;
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < rows[k].size(); ++j)
      r.features(static_cast<Eigen::Index>(n + k), static_cast<Eigen::Index>(j)) = rows[k][j];
  std::vector<Edge> all = known.graph.edges();
  const auto extra = parse_edges(edges, ids);
  all.insert(all.end(), extra.begin(), extra.end());
  r.graph = build_graph(all, n + rows.size(), !known.directed, true);
  return r;
}

std::map<std::string, std::vector<std::uint8_t>> serialize_bundle(const Dataset& d) {
  d.validate();
  auto id = [&](NodeId v) { return d.node_ids.empty() ? std::to_string(v) : d.node_ids[v]; };
  std::map<std::string, std::vector<std::uint8_t>> files;
  files["features.dmat"] = encode_dmat(d.features);
  std::string edges;
  for (NodeId u = 0; u < d.graph.num_nodes(); ++u)
    for (NodeId v : d.graph.out_neighbors(u)) edges += id(u) + "\t" + id(v) + "\n";
  files["edges.tsv"] = to_bytes(edges);
  std::string labels;
  for (NodeId v = 0; v < d.labels.size(); ++v)
    labels += id(v) + "\t" + (d.labels.known(v) ? std::to_string(d.labels.y[v]) : "?") + "\n";
  files["labels.tsv"] = to_bytes(labels);
  for (std::size_t k = 0; k < d.splits.size(); ++k) {
    std::string s;
    for (NodeId v = 0; v < d.splits[k].size(); ++v) s += id(v) + "\t" + role_name(d.splits[k].role(v)) + "\n";
    files[split_name(k)] = to_bytes(s);
  }
  nlohmann::ordered_json m;
  m["format"] = "glinkx-bundle-1";
  m["name"] = d.name;
  m["n"] = d.graph.num_nodes();
  m["m"] = d.graph.num_edges();
  m["d_x"] = d.features.cols();
  m["c"] = d.labels.classes;
  m["directed"] = d.directed;
  m["num_splits"] = d.splits.size();
  nlohmann::ordered_json sums;
  for (const auto& [name, bytes] : files)
    sums[name] = {{"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}};
  m["files"] = sums;
  files["manifest.json"] = to_bytes(m.dump(2) + "\n");
  return files;
}

void save_bundle(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, bytes] : serialize_bundle(d)) write_file_bytes(dir / name, bytes);
}

Dataset load_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const auto raw = read_file_bytes(manifest_path);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  try {
    if (m.at("format") != "glinkx-bundle-1") throw FormatError(manifest_path.string() + ": unknown bundle format");
    for (const auto& [name, entry] : m.at("files").items()) {
      const auto bytes = read_file_bytes(dir / name);
      if (bytes.size() != entry.at("bytes").get<std::size_t>() ||
          hex64(fnv1a64(bytes)) != entry.at("fnv1a64").get<std::string>())
        throw FormatError((dir / name).string() + ": checksum mismatch, bundle is corrupted");
    }
    IngestPaths paths;
    paths.edges = dir / "edges.tsv";
    paths.features = dir / "features.dmat";
    paths.labels = dir / "labels.tsv";
    const std::size_t splits = m.at("num_splits");
    for (std::size_t k = 0; k < splits; ++k) paths.splits.push_back(dir / split_name(k));
    Parsed p = parse_labels(paths.labels, m.at("c").get<int>());
    Dataset d;
    d.name = m.at("name");
    d.directed = m.at("directed");
    d.graph = build_graph(parse_edges(paths.edges, p.ids), p.ids.size(), false, true);
    d.features = parse_features(paths.features, p.ids);
    d.labels = LabelVector(std::move(p.labels), p.classes);
    for (const auto& s : paths.splits) d.splits.push_back(parse_split(s, p.ids));
    d.node_ids = p.ids.ids();
    if (d.graph.num_edges() != m.at("m").get<std::size_t>())
      throw FormatError(manifest_path.string() + ": edge count differs from manifest");
    if (static_cast<std::size_t>(d.features.cols()) != m.at("d_x").get<std::size_t>())
      throw FormatError(manifest_path.string() + ": feature width differs from manifest");
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
}

}  // namespace glinkx
