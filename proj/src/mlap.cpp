#include "glinkx/mlap.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>

#include "glinkx/error.hpp"
#include "json.hpp"

namespace glinkx {

std::size_t SoftLabelMatrix::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

SoftLabelMatrix mlap_forward(const CsrGraph& g, const LabelVector& y, const SplitMasks& masks,
                             PropagationStats* stats) {
  const std::size_t n = g.num_nodes();
  if (y.size() != n || masks.size() != n)
    throw DimensionError("mlap_forward: labels/masks do not cover the graph");
  for (NodeId v : masks.train())
    if (!y.known(v)) throw InvalidArgument("mlap_forward: train node " + std::to_string(v) + " has no label");
  const auto c = static_cast<Eigen::Index>(y.classes);
  SoftLabelMatrix out{Matrix::Zero(static_cast<Eigen::Index>(n), c), std::vector<char>(n, 0)};
  std::atomic<std::size_t> visited{0};
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::size_t seen = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      std::size_t count = 0;
      for (NodeId j : g.in_neighbors(static_cast<NodeId>(i))) {
        ++seen;
        if (!masks.is_train(j)) continue;
        out.values(row, y.y[j]) += 1.0;
        ++count;
      }
      if (count == 0) continue;
      out.values.row(row) /= static_cast<double>(count);
      out.valid[i] = 1;
    }
    visited += seen;
  });
  if (stats) {
    ++stats->edge_passes;
    stats->edges_visited += visited;
    stats->message_width = static_cast<std::size_t>(c);
  }
  return out;
}

SoftLabelMatrix mlap_backward(const CsrGraph& g, const Matrix& ytilde, PropagationStats* stats) {
  const std::size_t n = g.num_nodes();
  if (static_cast<std::size_t>(ytilde.rows()) != n)
    throw DimensionError("mlap_backward: soft-label rows != node count");
  const Eigen::Index c = ytilde.cols();
  SoftLabelMatrix out{Matrix::Zero(static_cast<Eigen::Index>(n), c), std::vector<char>(n, 0)};
  std::atomic<std::size_t> visited{0};
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::size_t seen = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      auto nbrs = g.out_neighbors(static_cast<NodeId>(i));
      seen += nbrs.size();
      if (nbrs.empty()) {
        out.values.row(row).setConstant(1.0 / static_cast<double>(c));
        continue;
      }
      for (NodeId j : nbrs) out.values.row(row) += ytilde.row(j);
      out.values.row(row) /= static_cast<double>(nbrs.size());
      out.valid[i] = 1;
    }
    visited += seen;
  });
  if (stats) {
    ++stats->edge_passes;
    stats->edges_visited += visited;
    stats->message_width = static_cast<std::size_t>(c);
  }
  return out;
}

PeSource parse_pe_source(const std::string& s) {
  if (s == "kge") return PeSource::kge;
  if (s == "adjacency" || s == "adj") return PeSource::adjacency;
  throw InvalidArgument("unknown PE source '" + s + "' (kge|adjacency)");
}

const char* pe_source_name(PeSource p) { return p == PeSource::kge ? "kge" : "adjacency"; }

NetInputs pipeline_net_inputs(const CsrGraph& g, const Matrix& features, PeSource pe,
                              const Matrix* pe_table) {
  NetInputs in;
  in.ego = features;
  if (pe == PeSource::adjacency) {
    in.position_sparse = adjacency_rows(symmetrized(g));
  } else {
    if (!pe_table) throw InvalidArgument("kge PE source needs a PE table");
    if (static_cast<std::size_t>(pe_table->rows()) != g.num_nodes())
      throw DimensionError("PE table has " + std::to_string(pe_table->rows()) +
                           " rows, graph has " + std::to_string(g.num_nodes()) + " nodes");
    in.position = *pe_table;
  }
  return in;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

NetSpec make_spec(const StageConfig& s, const BranchMask& b, bool with_prop,
                  std::size_t ego_dim, std::size_t pos_dim, std::size_t classes,
                  bool sparse) {
  NetSpec spec;
  spec.ego_dim = ego_dim;
  spec.position_dim = pos_dim;
  spec.classes = classes;
  spec.hidden = s.hidden;
  spec.ego_layers = s.layers_x;
  spec.position_layers = s.layers_p;
  spec.propagated_layers = s.layers_prop;
  spec.agg_layers = s.layers_agg;
  spec.use_ego = b.ego;
  spec.use_position = b.pe;
  spec.use_propagated = with_prop;
  spec.position_sparse = sparse;
  spec.dropout = s.dropout;
  return spec;
}

template <class F>
auto in_stage(const char* stage, F&& body) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

double soft_ce_rows(const Matrix& probs, const Matrix& targets) {
  return soft_cross_entropy(probs, targets).loss;
}

}  // namespace

PipelineArtifacts run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg) {
  if (!in.graph || !in.features || !in.labels || !in.masks)
    throw InvalidArgument("run_pipeline: missing input");
  const CsrGraph& g = *in.graph;
  const LabelVector& y = *in.labels;
  const SplitMasks& masks = *in.masks;
  const std::size_t n = g.num_nodes();
  if (static_cast<std::size_t>(in.features->rows()) != n)
    throw DimensionError("feature rows != node count");
  if (y.size() != n || masks.size() != n) throw DimensionError("labels/masks do not cover the graph");
  const auto c = static_cast<std::size_t>(y.classes);

  PipelineArtifacts art;
  const bool sparse = in.pe == PeSource::adjacency;
  const NetInputs base = in_stage("setup", [&] {
    return pipeline_net_inputs(g, *in.features, in.pe, in.pe_table);
  });
  const std::size_t pos_dim = sparse ? n : static_cast<std::size_t>(in.pe_table->cols());
  const std::size_t ego_dim = static_cast<std::size_t>(in.features->cols());
  const CsrGraph sym = cfg.symmetrize ? symmetrized(g) : CsrGraph();
  const CsrGraph& pg = cfg.symmetrize ? sym : g;
  const bool prop = cfg.stage3_branches.prop;
  if (prop && in.yprime_override) {
    const Matrix& yp = *in.yprime_override;
    if (static_cast<std::size_t>(yp.rows()) != n || static_cast<std::size_t>(yp.cols()) != c)
      throw DimensionError("y' override must be n x c");
    art.yprime.values = yp;
    art.yprime.valid.assign(n, 1);
  }

  if (prop && !in.yprime_override) {
    in_stage("stage2", [&] {
      art.yhat = mlap_forward(pg, y, masks, &art.propagation);
      std::vector<NodeId> train_rows, valid_rows, test_rows;
      for (NodeId v : masks.train())
        if (art.yhat.valid[v]) train_rows.push_back(v);
      for (NodeId v : masks.valid())
        if (art.yhat.valid[v]) valid_rows.push_back(v);
      for (NodeId v : masks.test())
        if (art.yhat.valid[v]) test_rows.push_back(v);
      if (train_rows.empty()) throw PipelineError("stage2", "no supervised Stage-2 signal");

      art.stage2_spec = make_spec(cfg.stage2, cfg.stage2_branches, false, ego_dim, pos_dim, c, sparse);
      if (art.stage2_spec.branch_count() == 0)
        throw PipelineError("stage2", "every input branch was removed");
      GlinkxNet net(art.stage2_spec, derive_seed(cfg.seed, 2));

      const NetInputs valid_in = base.gather(valid_rows, art.stage2_spec);
      const NetInputs test_in = base.gather(test_rows, art.stage2_spec);
      const Matrix valid_t = gather_rows(art.yhat.values, valid_rows);
      const Matrix test_t = gather_rows(art.yhat.values, test_rows);
      auto agreement = [](const Matrix& p, const Matrix& t) {
        std::size_t hit = 0;
        for (Eigen::Index i = 0; i < p.rows(); ++i) hit += argmax_row(p, i) == argmax_row(t, i);
        return p.rows() ? static_cast<double>(hit) / static_cast<double>(p.rows()) : 0.0;
      };
      Evaluator eval = [&](const GlinkxNet& m) {
        Evaluation e;
        e.has_valid = !valid_rows.empty();
        if (e.has_valid) {
          const Matrix p = m.predict(valid_in);
          e.valid_score = agreement(p, valid_t);
          e.valid_tiebreak = soft_ce_rows(p, valid_t);
        }
        if (!test_rows.empty()) e.test_score = agreement(m.predict(test_in), test_t);
        return e;
      };
      TrainConfig tc = cfg.stage2.train;
      tc.seed = derive_seed(cfg.seed, 3);
      art.stage2 = train_model(net, base, art.yhat.values, train_rows, eval, tc);
      for (auto& w : art.stage2.warnings) art.warnings.push_back("stage2: " + w);
      art.theta1 = net.params();
      art.ytilde = net.predict(base);
      art.yprime = mlap_backward(pg, art.ytilde, &art.propagation);
      art.stage2_ran = true;
      return 0;
    });
  }

  in_stage("stage3", [&] {
    art.stage3_spec = make_spec(cfg.stage3, cfg.stage3_branches, prop, ego_dim, pos_dim, c, sparse);
    if (art.stage3_spec.branch_count() == 0)
      throw PipelineError("stage3", "every input branch was removed");
    NetInputs in3 = base;
    if (prop) in3.propagated = art.yprime.values;
    GlinkxNet net(art.stage3_spec, derive_seed(cfg.seed, 4));

    // Only train labels enter the target matrix.
    Matrix targets = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
    for (NodeId v : masks.train()) targets(v, y.y[v]) = 1.0;

    const auto& vrows = masks.valid();
    const auto& trows = masks.test();
    const NetInputs valid_in = in3.gather(vrows, art.stage3_spec);
    const NetInputs test_in = in3.gather(trows, art.stage3_spec);
    const Matrix valid_onehot = one_hot_rows(y.y, vrows, c);
    Evaluator eval = [&](const GlinkxNet& m) {
      Evaluation e;
      e.has_valid = !vrows.empty();
      if (e.has_valid) {
        const Matrix p = m.predict(valid_in);
        e.valid_score = accuracy_compact(p, y.y, vrows);
        e.valid_tiebreak = soft_ce_rows(p, valid_onehot);
      }
      if (!trows.empty()) e.test_score = accuracy_compact(m.predict(test_in), y.y, trows);
      return e;
    };
    TrainConfig tc = cfg.stage3.train;
    tc.seed = derive_seed(cfg.seed, 5);
    art.stage3 = train_model(net, in3, targets, masks.train(), eval, tc);
    for (auto& w : art.stage3.warnings) art.warnings.push_back("stage3: " + w);
    art.theta2 = net.params();
    art.final_probs = net.predict(in3);
    art.valid_accuracy = art.stage3.best_eval.valid_score;
    art.test_accuracy = art.stage3.best_eval.test_score;
    return 0;
  });
  return art;
}

// ---------------------------------------------------------------------------

AblationTarget parse_ablation_target(const std::string& s) {
  if (s == "ego") return AblationTarget::ego;
  if (s == "prop" || s == "propagation") return AblationTarget::propagation;
  if (s == "pe") return AblationTarget::pe;
  throw InvalidArgument("unknown ablation target '" + s + "' (ego|prop|pe)");
}

AblationScope parse_ablation_scope(const std::string& s) {
  if (s == "all") return AblationScope::all;
  if (s == "stage3") return AblationScope::stage3;
  throw InvalidArgument("unknown ablation scope '" + s + "' (all|stage3)");
}

PipelineConfig ablate(PipelineConfig cfg, AblationTarget which, AblationScope scope) {
  const bool all = scope == AblationScope::all;
  switch (which) {
    case AblationTarget::ego:
      cfg.stage3_branches.ego = false;
      if (all) cfg.stage2_branches.ego = false;
      break;
    case AblationTarget::pe:
      cfg.stage3_branches.pe = false;
      if (all) cfg.stage2_branches.pe = false;
      break;
    case AblationTarget::propagation:
      // Without the propagated branch Stage 2 has no consumer and is skipped.
      cfg.stage3_branches.prop = false;
      break;
  }
  const BranchMask& s3 = cfg.stage3_branches;
  const BranchMask& s2 = cfg.stage2_branches;
  if (!s3.ego && !s3.pe && !s3.prop) throw InvalidArgument("ablation removes every Stage-3 branch");
  if (s3.prop && !s2.ego && !s2.pe) throw InvalidArgument("ablation removes every Stage-2 branch");
  return cfg;
}

std::vector<RunRecord> run_glinkx(const Dataset& d, PeSource pe, const PipelineConfig& cfg,
                                  std::span<const std::uint64_t> seeds, const Matrix* pe_table,
                                  const std::string& method) {
  if (d.splits.empty()) throw InvalidArgument("dataset has no splits");
  std::vector<RunRecord> out;
  for (std::uint64_t seed : seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t split = static_cast<std::size_t>(seed % d.splits.size());
    PipelineInputs in{&d.graph, &d.features, &d.labels, &d.splits[split], pe, pe_table};
    PipelineConfig c = cfg;
    c.seed = seed;
    const PipelineArtifacts art = run_pipeline(in, c);
    RunRecord r;
    r.method = method.empty() ? std::string("glinkx-") + pe_source_name(pe) : method;
    r.seed = seed;
    r.split = split;
    r.valid_accuracy = art.valid_accuracy;
    r.test_accuracy = art.test_accuracy;
    r.stage2_best_epoch = art.stage2.best_epoch;
    r.stage3_best_epoch = art.stage3.best_epoch;
    if (c.report_auc) r.test_auc = binary_auc(art.final_probs, d.labels.y, d.splits[split].test());
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  }
  return out;
}

std::vector<RunRecord> run_ablation(const Dataset& d, PeSource pe, AblationTarget which,
                                    AblationScope scope, const PipelineConfig& cfg,
                                    std::span<const std::uint64_t> seeds, const Matrix* pe_table) {
  static const char* names[] = {"ego", "prop", "pe"};
  const std::string method = std::string("glinkx-") + pe_source_name(pe) + "-no-" +
                             names[static_cast<int>(which)] +
                             (scope == AblationScope::all ? "-all" : "-stage3");
  return run_glinkx(d, pe, ablate(cfg, which, scope), seeds, pe_table, method);
}

// ---------------------------------------------------------------------------

InductiveModel make_inductive_model(const PipelineInputs& in, const PipelineConfig& cfg,
                                    const PipelineArtifacts& art) {
  InductiveModel m;
  m.pe = in.pe;
  m.symmetrize = cfg.symmetrize;
  m.known_nodes = in.graph->num_nodes();
  m.feature_dim = static_cast<std::size_t>(in.features->cols());
  m.classes = static_cast<std::size_t>(in.labels->classes);
  m.stage2_ran = art.stage2_ran;
  m.stage2_spec = art.stage2_spec;
  m.theta1 = art.theta1;
  m.stage3_spec = art.stage3_spec;
  m.theta2 = art.theta2;
  if (in.pe == PeSource::kge) m.pe_table = *in.pe_table;
  return m;
}

namespace {

GlinkxNet net_with(const NetSpec& spec, const Params& params) {
  GlinkxNet net(spec, 0);
  if (params.size() != net.params().size()) throw FormatError("stored parameters do not fit the network");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].weight.rows() != net.params()[i].weight.rows() ||
        params[i].weight.cols() != net.params()[i].weight.cols() ||
        params[i].bias.size() != net.params()[i].bias.size())
      throw FormatError("stored parameter block " + std::to_string(i) + " has the wrong shape");
  net.params() = params;
  return net;
}

}  // namespace

InductivePrediction inductive_predict(const InductiveModel& m, const CsrGraph& full_graph,
                                      const Matrix& features, std::span<const NodeId> new_nodes) {
  const std::size_t n = full_graph.num_nodes();
  const std::size_t known = m.known_nodes;
  if (n < known) throw DimensionError("revealed graph is smaller than the training graph");
  if (static_cast<std::size_t>(features.rows()) != n)
    throw DimensionError("feature rows != revealed node count");
  if (static_cast<std::size_t>(features.cols()) != m.feature_dim)
    throw DimensionError("feature width differs from training");
  for (NodeId v : new_nodes)
    if (v >= n) throw InvalidArgument("node " + std::to_string(v) + " is not in the revealed graph");

  const CsrGraph sym = symmetrized(full_graph);
  NetInputs base;
  base.ego = features;
  std::vector<char> no_pe(n, 0);
  if (m.pe == PeSource::adjacency) {
    std::vector<Eigen::Triplet<double, std::int64_t>> trips;
    for (NodeId u = 0; u < n; ++u) {
      bool any = false;
      for (NodeId v : sym.out_neighbors(u))
        if (v < known) {
          trips.emplace_back(u, v, 1.0);
          any = true;
        }
      no_pe[u] = !any;
    }
    base.position_sparse.resize(static_cast<std::int64_t>(n), static_cast<std::int64_t>(known));
    base.position_sparse.setFromTriplets(trips.begin(), trips.end());
  } else {
    const Eigen::Index d = m.pe_table.cols();
    base.position = Matrix::Zero(static_cast<Eigen::Index>(n), d);
    base.position.topRows(static_cast<Eigen::Index>(known)) = m.pe_table;
    for (NodeId u = static_cast<NodeId>(known); u < n; ++u) {
      std::size_t count = 0;
      for (NodeId v : sym.out_neighbors(u))
        if (v < known) {
          base.position.row(u) += m.pe_table.row(v);
          ++count;
        }
      if (count)
        base.position.row(u) /= static_cast<double>(count);
      else
        no_pe[u] = 1;
    }
  }

  NetInputs in3 = base;
  if (m.stage2_ran) {
    const GlinkxNet f1 = net_with(m.stage2_spec, m.theta1);
    const Matrix ytilde = f1.predict(base);
    const CsrGraph& pg = m.symmetrize ? sym : full_graph;
    in3.propagated = mlap_backward(pg, ytilde).values;
  }
  const GlinkxNet f2 = net_with(m.stage3_spec, m.theta2);
  InductivePrediction out;
  out.probs = f2.predict(in3.gather(new_nodes, m.stage3_spec));
  for (std::size_t k = 0; k < new_nodes.size(); ++k) {
    out.predictions.push_back(argmax_row(out.probs, static_cast<Eigen::Index>(k)));
    out.no_edges.push_back(no_pe[new_nodes[k]]);
  }
  return out;
}

// --- model directory -----------------------------------------------------------

namespace {

constexpr char kParamMagic[4] = {'P', 'R', 'M', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t& pos) {
  if (pos + 8 > b.size()) throw FormatError("truncated parameter file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

std::vector<std::uint8_t> encode_params(const Params& p) {
  std::vector<std::uint8_t> out(std::begin(kParamMagic), std::end(kParamMagic));
  put_u64(out, p.size());
  for (const Linear& l : p) {
    put_u64(out, static_cast<std::uint64_t>(l.weight.rows()));
    put_u64(out, static_cast<std::uint64_t>(l.weight.cols()));
    for (Eigen::Index i = 0; i < l.weight.size(); ++i)
      put_u64(out, std::bit_cast<std::uint64_t>(l.weight.data()[i]));
    for (Eigen::Index i = 0; i < l.bias.size(); ++i)
      put_u64(out, std::bit_cast<std::uint64_t>(l.bias[i]));
  }
  return out;
}

Params decode_params(std::span<const std::uint8_t> b) {
  if (b.size() < 4 || !std::equal(std::begin(kParamMagic), std::end(kParamMagic), b.begin()))
    throw FormatError("bad magic, not a parameter file");
  std::size_t pos = 4;
  const std::uint64_t blocks = get_u64(b, pos);
  Params p;
  for (std::uint64_t k = 0; k < blocks; ++k) {
    const auto rows = static_cast<Eigen::Index>(get_u64(b, pos));
    const auto cols = static_cast<Eigen::Index>(get_u64(b, pos));
    if (static_cast<std::size_t>(rows * cols + cols) * 8 > b.size() - pos)
      throw FormatError("truncated parameter file");
    Linear l;
    l.weight.resize(rows, cols);
    l.bias.resize(cols);
    for (Eigen::Index i = 0; i < l.weight.size(); ++i)
      l.weight.data()[i] = std::bit_cast<double>(get_u64(b, pos));
    for (Eigen::Index i = 0; i < cols; ++i) l.bias[i] = std::bit_cast<double>(get_u64(b, pos));
    p.push_back(std::move(l));
  }
  if (pos != b.size()) throw FormatError("trailing bytes in parameter file");
  return p;
}

nlohmann::json spec_json(const NetSpec& s) {
  return {{"ego_dim", s.ego_dim},
          {"position_dim", s.position_dim},
          {"classes", s.classes},
          {"hidden", s.hidden},
          {"ego_layers", s.ego_layers},
          {"position_layers", s.position_layers},
          {"propagated_layers", s.propagated_layers},
          {"agg_layers", s.agg_layers},
          {"use_ego", s.use_ego},
          {"use_position", s.use_position},
          {"use_propagated", s.use_propagated},
          {"position_sparse", s.position_sparse},
          {"dropout", s.dropout}};
}

NetSpec spec_from_json(const nlohmann::json& j) {
  NetSpec s;
  s.ego_dim = j.at("ego_dim");
  s.position_dim = j.at("position_dim");
  s.classes = j.at("classes");
  s.hidden = j.at("hidden");
  s.ego_layers = j.at("ego_layers");
  s.position_layers = j.at("position_layers");
  s.propagated_layers = j.at("propagated_layers");
  s.agg_layers = j.at("agg_layers");
  s.use_ego = j.at("use_ego");
  s.use_position = j.at("use_position");
  s.use_propagated = j.at("use_propagated");
  s.position_sparse = j.at("position_sparse");
  s.dropout = j.at("dropout");
  return s;
}

}  // namespace

void save_model(const InductiveModel& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json j = {{"format", "glinkx-model-1"},
                      {"pe", pe_source_name(m.pe)},
                      {"symmetrize", m.symmetrize},
                      {"known_nodes", m.known_nodes},
                      {"feature_dim", m.feature_dim},
                      {"classes", m.classes},
                      {"stage2_ran", m.stage2_ran},
                      {"stage3_spec", spec_json(m.stage3_spec)}};
  if (m.stage2_ran) {
    j["stage2_spec"] = spec_json(m.stage2_spec);
    write_file_bytes(dir / "theta1.prm", encode_params(m.theta1));
  }
  write_file_bytes(dir / "theta2.prm", encode_params(m.theta2));
  if (m.pe == PeSource::kge) write_dmat(dir / "pe.dmat", m.pe_table);
  const std::string text = j.dump(2) + "\n";
  write_file_bytes(dir / "model.json", {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

InductiveModel load_model(const std::filesystem::path& dir) {
  const auto bytes = read_file_bytes(dir / "model.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "model.json").string() + ": " + e.what());
  }
  InductiveModel m;
  try {
    if (j.at("format") != "glinkx-model-1") throw FormatError("unsupported model format");
    m.pe = parse_pe_source(j.at("pe"));
    m.symmetrize = j.at("symmetrize");
    m.known_nodes = j.at("known_nodes");
    m.feature_dim = j.at("feature_dim");
    m.classes = j.at("classes");
    m.stage2_ran = j.at("stage2_ran");
    m.stage3_spec = spec_from_json(j.at("stage3_spec"));
    if (m.stage2_ran) {
      m.stage2_spec = spec_from_json(j.at("stage2_spec"));
      m.theta1 = decode_params(read_file_bytes(dir / "theta1.prm"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "model.json").string() + ": " + e.what());
  }
  m.theta2 = decode_params(read_file_bytes(dir / "theta2.prm"));
  if (m.pe == PeSource::kge) {
    m.pe_table = read_dmat(dir / "pe.dmat");
    if (static_cast<std::size_t>(m.pe_table.rows()) != m.known_nodes)
      throw DimensionError("pe.dmat rows != known node count");
  }
  return m;
}

}  // namespace glinkx
