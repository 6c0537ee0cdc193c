// Python module _glinkx. Arrays cross the boundary as numpy copies;
// hyperparameters go through the same profile + "section.key=value"
// overrides as the CLI.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "glinkx/baselines.hpp"
#include "glinkx/config.hpp"
#include "glinkx/dataset.hpp"
#include "glinkx/error.hpp"
#include "glinkx/harness.hpp"
#include "glinkx/kge.hpp"
#include "glinkx/mlap.hpp"
#include "glinkx/synth.hpp"

namespace py = pybind11;
using namespace glinkx;

namespace {

using EdgeArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

RunConfig make_config(const std::string& profile_name, const std::map<std::string, py::object>& set) {
  RunConfig cfg = profile(profile_name);
  for (const auto& [path, value] : set) {
    const auto dot = path.find('.');
    if (dot == std::string::npos) throw InvalidArgument("override key must be section.key, got '" + path + "'");
    std::string text = py::str(value);
    if (py::isinstance<py::bool_>(value)) text = value.cast<bool>() ? "true" : "false";
    apply_config_text(cfg, "[" + path.substr(0, dot) + "]\n" + path.substr(dot + 1) + " = " + text, "override");
  }
  return cfg;
}

Dataset from_arrays(EdgeArray edges, const Matrix& features, std::vector<int> labels,
                    std::vector<std::vector<int>> splits, bool symmetrize, int classes) {
  if (edges.ndim() != 2 || edges.shape(1) != 2) throw DimensionError("edges must have shape (m, 2)");
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) throw DimensionError("labels and features disagree on the node count");
  std::vector<Edge> list;
  auto e = edges.unchecked<2>();
  for (py::ssize_t i = 0; i < e.shape(0); ++i) {
    if (e(i, 0) < 0 || e(i, 1) < 0 || static_cast<std::size_t>(e(i, 0)) >= n ||
        static_cast<std::size_t>(e(i, 1)) >= n)
      throw InvalidArgument("edge " + std::to_string(i) + " references a node outside [0, n)");
    list.push_back({static_cast<NodeId>(e(i, 0)), static_cast<NodeId>(e(i, 1))});
  }
  Dataset d;
  d.graph = build_graph(list, n, symmetrize);
  d.directed = !symmetrize;
  d.features = features;
  int top = -1;
  for (int y : labels) top = std::max(top, y);
  d.labels = LabelVector(std::move(labels), classes > 0 ? classes : top + 1);
  for (auto& s : splits) {
    if (s.size() != n) throw DimensionError("split role vector must have one entry per node");
    std::vector<Role> roles;
    for (int r : s) {
      if (r < 0 || r > 2) throw InvalidArgument("split roles are 0 train, 1 valid, 2 test");
      roles.push_back(static_cast<Role>(r));
    }
    d.splits.emplace_back(std::move(roles));
  }
  for (std::size_t v = 0; v < n; ++v) d.node_ids.push_back(std::to_string(v));
  return d;
}

py::array_t<std::int64_t> edge_array(const CsrGraph& g) {
  const auto edges = g.edges();
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(edges.size()), py::ssize_t{2}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    w(i, 0) = edges[i].src;
    w(i, 1) = edges[i].dst;
  }
  return out;
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["method"] = r.method;
  d["seed"] = r.seed;
  d["split"] = r.split;
  d["valid_accuracy"] = r.valid_accuracy;
  d["test_accuracy"] = r.test_accuracy;
  d["stage2_best_epoch"] = r.stage2_best_epoch;
  d["stage3_best_epoch"] = r.stage3_best_epoch;
  d["seconds"] = r.seconds;
  if (r.test_auc >= 0) d["test_auc"] = r.test_auc;
  return d;
}

py::list records(const std::vector<RunRecord>& rs) {
  py::list out;
  for (const auto& r : rs) out.append(record_dict(r));
  return out;
}

const SplitMasks& split_of(const Dataset& d, std::size_t split) {
  if (split >= d.splits.size()) throw InvalidArgument("split index out of range");
  return d.splits[split];
}

double accuracy(const std::vector<int>& pred, const LabelVector& y, const std::vector<NodeId>& rows) {
  if (rows.empty()) return 0;
  double hit = 0;
  for (NodeId v : rows) hit += pred[v] == y.y[v];
  return hit / static_cast<double>(rows.size());
}

}  // namespace

PYBIND11_MODULE(_glinkx, m) {
  m.doc() = "three-stage node classification on homophilous and heterophilous graphs";

  // leaked on purpose: the translator may run during interpreter teardown
  static const py::handle error = py::exception<Error>(m, "GlinkxError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = error(py::str(e.what()));
      inst.attr("code") = e.code();
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def_static("from_arrays", &from_arrays, py::arg("edges"), py::arg("features"), py::arg("labels"),
                  py::arg("splits"), py::arg("symmetrize") = false, py::arg("classes") = 0,
                  "edges (m,2) int, features (n,d), labels (n,) with -1 unknown, "
                  "splits: list of (n,) role vectors 0 train / 1 valid / 2 test")
      .def_static("load", [](const std::filesystem::path& p) { return load_bundle(p); })
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_bundle(d, p); })
      .def_readwrite("name", &Dataset::name)
      .def_property_readonly("num_nodes", [](const Dataset& d) { return d.graph.num_nodes(); })
      .def_property_readonly("num_edges", [](const Dataset& d) { return d.graph.num_edges(); })
      .def_property_readonly("num_classes", [](const Dataset& d) { return d.labels.classes; })
      .def_property_readonly("num_splits", [](const Dataset& d) { return d.splits.size(); })
      .def_property_readonly("directed", [](const Dataset& d) { return d.directed; })
      .def_property_readonly("edges", [](const Dataset& d) { return edge_array(d.graph); })
      .def_property_readonly("features", [](const Dataset& d) { return d.features; })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels.y; })
      .def("split", [](const Dataset& d, std::size_t s) {
             std::vector<int> roles;
             for (Role r : split_of(d, s).roles()) roles.push_back(static_cast<int>(r));
             return roles;
           }, py::arg("index") = 0)
      .def("homophily", [](const Dataset& d) {
             py::dict h;
             h["edge"] = edge_homophily(d.graph, d.labels);
             h["node"] = node_homophily(d.graph, d.labels);
             h["class_insensitive"] = class_insensitive_homophily(d.graph, d.labels);
             return h;
           });

  m.def("planted", [](const std::string& regime, std::size_t n, std::size_t c, std::size_t k, std::size_t d,
                      double sigma, double centroid_scale, double homophily, std::uint64_t seed) {
          PlantedConfig pc;
          pc.regime = parse_regime(regime);
          if (pc.regime == Regime::custom) throw InvalidArgument("custom regime needs a mixing matrix; use the CLI");
          pc.n = n;
          pc.c = c;
          pc.k = k;
          pc.d = d;
          pc.sigma = sigma;
          pc.centroid_scale = centroid_scale;
          pc.homophily = homophily;
          pc.seed = seed;
          return generate_planted(pc).data;
        },
        py::arg("regime") = "homophilous", py::arg("n") = 2000, py::arg("c") = 4, py::arg("k") = 20,
        py::arg("d") = 16, py::arg("sigma") = 1.0, py::arg("centroid_scale") = 1.0, py::arg("homophily") = 0.9,
        py::arg("seed") = 0, "planted-partition graph with Gaussian class features and one split");

  m.def("profiles", &profile_names);
  m.def("config_text", [](const std::string& profile_name, const std::map<std::string, py::object>& set) {
          return render_config(make_config(profile_name, set));
        },
        py::arg("profile") = "paper-defaults", py::arg("set") = std::map<std::string, py::object>{});

  m.def("kge_train", [](const Dataset& d, const std::string& profile_name,
                        const std::map<std::string, py::object>& set, std::uint64_t seed) {
          const RunConfig cfg = make_config(profile_name, set);
          KgeResult r;
          {
            py::gil_scoped_release release;
            r = kge_train(d.graph, cfg.kge, seed);
          }
          py::array_t<float> table({static_cast<py::ssize_t>(r.table.rows()), static_cast<py::ssize_t>(r.table.dim())});
          std::copy(r.table.values().begin(), r.table.values().end(), table.mutable_data());
          return py::make_tuple(table, r.epoch_loss);
        },
        py::arg("dataset"), py::arg("profile") = "paper-defaults",
        py::arg("set") = std::map<std::string, py::object>{}, py::arg("seed") = 0,
        "DistMult positional embeddings; returns (table float32 (n, dim), per-epoch loss)");

  auto run = [](const Dataset& d, const std::string& pe, const std::string& profile_name,
                const std::map<std::string, py::object>& set, std::vector<std::uint64_t> seeds,
                std::optional<Matrix> pe_table, std::optional<std::string> ablate_which,
                const std::string& scope) {
    const RunConfig cfg = make_config(profile_name, set);
    const PeSource source = parse_pe_source(pe);
    if (source == PeSource::kge && !pe_table) throw InvalidArgument("pe='kge' needs pe_table (see kge_train)");
    const Matrix* table = pe_table ? &*pe_table : nullptr;
    std::vector<RunRecord> out;
    {
      py::gil_scoped_release release;
      out = ablate_which ? run_ablation(d, source, parse_ablation_target(*ablate_which),
                                        parse_ablation_scope(scope), cfg.pipeline, seeds, table)
                         : run_glinkx(d, source, cfg.pipeline, seeds, table);
    }
    return records(out);
  };
  m.def("run", run, py::arg("dataset"), py::arg("pe") = "adjacency", py::arg("profile") = "paper-defaults",
        py::arg("set") = std::map<std::string, py::object>{}, py::arg("seeds") = std::vector<std::uint64_t>{0},
        py::arg("pe_table") = py::none(), py::arg("ablate") = py::none(), py::arg("scope") = "all",
        "full pipeline, one record per seed on split seed % num_splits; "
        "ablate in {'ego', 'propagation', 'pe'} removes a branch");

  m.def("predict", [](const Dataset& d, std::size_t split, const std::string& pe, const std::string& profile_name,
                      const std::map<std::string, py::object>& set, std::uint64_t seed, std::optional<Matrix> pe_table) {
          RunConfig cfg = make_config(profile_name, set);
          cfg.pipeline.seed = seed;
          const Matrix* table = pe_table ? &*pe_table : nullptr;
          PipelineInputs in{&d.graph, &d.features, &d.labels, &split_of(d, split), parse_pe_source(pe), table};
          PipelineArtifacts art;
          {
            py::gil_scoped_release release;
            art = run_pipeline(in, cfg.pipeline);
          }
          py::dict out;
          out["probs"] = art.final_probs;
          out["yprime"] = art.yprime.values;
          out["valid_accuracy"] = art.valid_accuracy;
          out["test_accuracy"] = art.test_accuracy;
          out["stage2_ran"] = art.stage2_ran;
          out["edge_passes"] = art.propagation.edge_passes;
          out["edges_visited"] = art.propagation.edges_visited;
          out["warnings"] = art.warnings;
          return out;
        },
        py::arg("dataset"), py::arg("split") = 0, py::arg("pe") = "adjacency", py::arg("profile") = "paper-defaults",
        py::arg("set") = std::map<std::string, py::object>{}, py::arg("seed") = 0, py::arg("pe_table") = py::none(),
        "one pipeline run keeping the class probabilities of every node");

  m.def("label_prop", [](const Dataset& d, std::size_t split, double alpha, int hops, int iterations, bool clamp,
                         bool mask_a2) {
          LpConfig lc;
          lc.alpha = alpha;
          lc.hops = hops;
          lc.iterations = iterations;
          lc.clamp = clamp;
          const SplitMasks& s = split_of(d, split);
          const LpResult r = mask_a2 ? label_prop_masked(d.graph, d.labels, s, lc) : label_prop(d.graph, d.labels, s, lc);
          py::dict out;
          out["scores"] = r.scores;
          out["predictions"] = r.predictions;
          out["valid_accuracy"] = accuracy(r.predictions, d.labels, s.valid());
          out["test_accuracy"] = accuracy(r.predictions, d.labels, s.test());
          return out;
        },
        py::arg("dataset"), py::arg("split") = 0, py::arg("alpha") = 0.5, py::arg("hops") = 1,
        py::arg("iterations") = 50, py::arg("clamp") = false, py::arg("mask_a2") = false);

  m.def("linkx", [](const Dataset& d, std::size_t split, const std::string& profile_name,
                    const std::map<std::string, py::object>& set, std::uint64_t seed, bool mlp_only) {
          const RunConfig cfg = make_config(profile_name, set);
          const SplitMasks& s = split_of(d, split);
          BaselineResult r;
          {
            py::gil_scoped_release release;
            r = mlp_only ? feature_mlp_baseline(d.features, d.labels, s, cfg.pipeline.stage3, seed)
                         : linkx_baseline(d.graph, d.features, d.labels, s, cfg.pipeline.stage3, seed);
          }
          py::dict out;
          out["valid_accuracy"] = r.valid_accuracy;
          out["test_accuracy"] = r.test_accuracy;
          return out;
        },
        py::arg("dataset"), py::arg("split") = 0, py::arg("profile") = "paper-defaults",
        py::arg("set") = std::map<std::string, py::object>{}, py::arg("seed") = 0, py::arg("mlp_only") = false,
        "LINKX baseline (features and adjacency rows); mlp_only drops the adjacency branch");

  m.def("counting_slope", [](std::size_t n, std::size_t c, std::size_t trials, std::uint64_t seed) {
          const SlopeCheck s = counting_slope_check(n, c, trials, seed);
          py::list rows;
          for (const auto& r : s.rows) rows.append(py::make_tuple(r.k, r.mean_sup_error));
          return py::make_tuple(s.slope, rows);
        },
        py::arg("n") = 4096, py::arg("c") = 3, py::arg("trials") = 5, py::arg("seed") = 0,
        "log-log slope of the counting estimator error against ring degree, and the (k, error) rows");

  m.def("parametric_vs_counting", [](std::vector<std::uint64_t> seeds, std::size_t n, std::size_t c, std::size_t k) {
          TheoryConfig base;
          base.n = n;
          base.c = c;
          base.k = k;
          py::list out;
          for (const auto& duel : parametric_vs_counting(base, seeds, QSgdConfig{}))
            out.append(py::make_tuple(duel.seed, duel.parametric, duel.counting));
          return out;
        },
        py::arg("seeds"), py::arg("n") = 2000, py::arg("c") = 3, py::arg("k") = 10,
        "(seed, parametric error, counting error) per seed");
}
