// glinkx command-line tool. Results go to stdout (or --out) as JSON lines;
// failures print {"error": ..., "code": ...} on stderr and exit nonzero.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "glinkx/baselines.hpp"
#include "glinkx/config.hpp"
#include "glinkx/dataset.hpp"
#include "glinkx/error.hpp"
#include "glinkx/harness.hpp"
#include "glinkx/kge.hpp"
#include "glinkx/mlap.hpp"
#include "glinkx/report.hpp"
#include "glinkx/synth.hpp"
#include "json.hpp"

using namespace glinkx;
using json = nlohmann::ordered_json;

namespace {

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw InvalidArgument("cannot write " + path);
  }
  void line(const std::string& s) {
    std::ostream& o = file_.is_open() ? file_ : std::cout;
    o << s << '\n';
    o.flush();
  }
  void line(const json& j) { line(j.dump()); }

 private:
  std::ofstream file_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Options shared by run / ablate / linkx.
struct RunOptions {
  std::string data, config, profile, pe, pe_table, seeds, out, save_model;
  bool paper_grid = false, auc = false, symmetrize = false;
  std::vector<std::string> set;

  void attach(CLI::App* c, bool model_opts) {
    c->add_option("--data", data, "dataset bundle directory")->required();
    c->add_option("--config", config, "config file (key = value sections)");
    c->add_option("--profile", profile, "built-in hyperparameter profile");
    c->add_option("--set", set, "override, e.g. stage3.lr=0.001 or kge.dim=64");
    c->add_option("--seeds", seeds, "seed list, e.g. 0..9 or 1,3,5");
    c->add_flag("--paper-grid", paper_grid, "reject values outside the published sweep grids");
    c->add_flag("--symmetrize", symmetrize, "propagate over the symmetrized graph");
    c->add_option("--out", out, "JSON-lines output file (default stdout)");
    if (model_opts) {
      c->add_option("--pe", pe, "positional embeddings: kge | adjacency");
      c->add_option("--pe-table", pe_table, "DMAT1 KGE table (trained on the fly if absent)");
      c->add_flag("--auc", auc, "also record test ROC AUC (binary tasks)");
      c->add_option("--save-model", save_model, "save the first seed's model for `inductive`");
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? profile_or_default() : load_config(config);
    if (!config.empty() && !profile.empty()) apply_config_text(cfg, "profile = " + profile, "--profile");
    for (const auto& kv : set) {
      const auto eq = kv.find('='), dot = kv.find('.');
      if (eq == std::string::npos) throw InvalidArgument("--set expects section.key=value, got '" + kv + "'");
      std::string section = "run", key = kv.substr(0, eq);
      if (dot != std::string::npos && dot < eq) {
        section = kv.substr(0, dot);
        key = kv.substr(dot + 1, eq - dot - 1);
      }
      apply_config_text(cfg, "[" + section + "]\n" + key + " = " + kv.substr(eq + 1), "--set");
    }
    if (!pe.empty()) cfg.pe = parse_pe_source(pe);
    if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
    if (symmetrize) cfg.pipeline.symmetrize = true;
    cfg.pipeline.report_auc = auc;
    if (paper_grid) validate_paper_grid(cfg);
    return cfg;
  }

 private:
  RunConfig profile_or_default() const { return profile.empty() ? glinkx::profile("paper-defaults") : glinkx::profile(profile); }
};

Matrix kge_table_for(const Dataset& d, const RunConfig& cfg, const std::string& path, Sink& sink) {
  if (!path.empty()) return import_kge(path, d.graph.num_nodes()).to_matrix();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = kge_train(d.graph, cfg.kge, cfg.seeds.front());
  sink.line(json{{"type", "kge"}, {"dim", cfg.kge.dim}, {"epochs", cfg.kge.epochs},
                 {"final_loss", r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back()},
                 {"seconds", seconds_since(t0)}});
  return r.table.to_matrix();
}

void emit_runs(Sink& sink, const std::vector<RunRecord>& runs) {
  for (const auto& r : runs) sink.line(run_line(r));
  for (const auto& s : summarize(runs)) sink.line(summary_line(s));
}

int cmd_pipeline(const RunOptions& o, const std::string& which, const std::string& scope) {
  const RunConfig cfg = o.resolve();
  const Dataset d = load_bundle(o.data);
  Sink sink(o.out);
  Matrix table;
  if (cfg.pe == PeSource::kge) table = kge_table_for(d, cfg, o.pe_table, sink);
  const Matrix* pe = cfg.pe == PeSource::kge ? &table : nullptr;
  PipelineConfig pc = cfg.pipeline;
  std::vector<RunRecord> runs;
  if (which.empty()) {
    runs = run_glinkx(d, cfg.pe, pc, cfg.seeds, pe);
  } else {
    runs = run_ablation(d, cfg.pe, parse_ablation_target(which), parse_ablation_scope(scope), pc, cfg.seeds, pe);
    pc = ablate(pc, parse_ablation_target(which), parse_ablation_scope(scope));
  }
  emit_runs(sink, runs);
  if (!o.save_model.empty()) {
    const std::uint64_t seed = cfg.seeds.front();
    pc.seed = seed;
    const PipelineInputs in{&d.graph, &d.features, &d.labels, &d.splits[seed % d.splits.size()], cfg.pe, pe};
    const auto art = run_pipeline(in, pc);
    save_model(make_inductive_model(in, pc, art), o.save_model);
    sink.line(json{{"type", "model"}, {"dir", o.save_model}, {"seed", seed}});
  }
  return 0;
}

int cmd_linkx(const RunOptions& o, bool mlp) {
  const RunConfig cfg = o.resolve();
  const Dataset d = load_bundle(o.data);
  Sink sink(o.out);
  std::vector<RunRecord> runs;
  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t split = seed % d.splits.size();
    const auto r = mlp ? feature_mlp_baseline(d.features, d.labels, d.splits[split], cfg.pipeline.stage3, seed)
                       : linkx_baseline(d.graph, d.features, d.labels, d.splits[split], cfg.pipeline.stage3, seed);
    RunRecord rec;
    rec.method = mlp ? "mlp" : "linkx";
    rec.seed = seed;
    rec.split = split;
    rec.valid_accuracy = r.valid_accuracy;
    rec.test_accuracy = r.test_accuracy;
    rec.stage3_best_epoch = r.train.best_epoch;
    rec.seconds = seconds_since(t0);
    runs.push_back(rec);
  }
  emit_runs(sink, runs);
  return 0;
}

double rows_accuracy(const std::vector<int>& pred, const LabelVector& y, const std::vector<NodeId>& rows) {
  double hit = 0;
  for (NodeId v : rows) hit += pred[v] == y.y[v];
  return rows.empty() ? 0 : hit / static_cast<double>(rows.size());
}

void print_json_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", message}, {"code", code}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("glinkx: three-stage node classification for homophilous and heterophilous graphs");
  app.require_subcommand(1);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "parse text/DMAT1 inputs into a dataset bundle");
  IngestPaths ipaths;
  IngestFlags iflags;
  std::vector<std::string> split_files;
  std::string ingest_out;
  bool no_dedup = false;
  ingest_cmd->add_option("--edges", ipaths.edges, "edge list: src<TAB>dst")->required();
  ingest_cmd->add_option("--features", ipaths.features, "DMAT1 or node<TAB>values text")->required();
  ingest_cmd->add_option("--labels", ipaths.labels, "node<TAB>label ('?' for unknown)")->required();
  ingest_cmd->add_option("--split", split_files, "node<TAB>train|valid|test, repeatable");
  ingest_cmd->add_option("--name", iflags.name, "dataset name");
  ingest_cmd->add_option("--classes", iflags.classes, "class count (default: max label + 1)");
  ingest_cmd->add_flag("--symmetrize", iflags.symmetrize, "treat the graph as undirected");
  ingest_cmd->add_flag("--no-dedup", no_dedup, "keep duplicate edges");
  ingest_cmd->add_option("--out", ingest_out, "bundle directory")->required();

  // kge-train
  auto* kge_cmd = app.add_subcommand("kge-train", "train DistMult positional embeddings");
  std::string kge_data, kge_out, kge_config, kge_loss;
  KgeConfig kcfg;
  std::uint64_t kge_seed = 0;
  kge_cmd->add_option("--data", kge_data, "dataset bundle")->required();
  kge_cmd->add_option("--out", kge_out, "DMAT1 output (f32)")->required();
  kge_cmd->add_option("--config", kge_config, "config file; its [kge] section is used");
  const std::vector<CLI::Option*> kge_flags = {
      kge_cmd->add_option("--dim", kcfg.dim),
      kge_cmd->add_option("--epochs", kcfg.epochs),
      kge_cmd->add_option("--negatives", kcfg.negatives),
      kge_cmd->add_option("--batch", kcfg.batch),
      kge_cmd->add_option("--lr", kcfg.lr),
      kge_cmd->add_option("--margin", kcfg.margin)};
  kge_cmd->add_option("--loss", kge_loss, "softmax | margin");
  kge_cmd->add_option("--seed", kge_seed);

  // run / ablate / linkx / mlp
  RunOptions run_opts, abl_opts, linkx_opts;
  auto* run_cmd = app.add_subcommand("run", "full three-stage pipeline, one run per seed");
  run_opts.attach(run_cmd, true);
  auto* abl_cmd = app.add_subcommand("ablate", "pipeline with one branch removed");
  abl_opts.attach(abl_cmd, true);
  std::string abl_which, abl_scope = "all";
  abl_cmd->add_option("--which", abl_which, "ego | prop | pe")->required();
  abl_cmd->add_option("--scope", abl_scope, "all | stage3");
  auto* linkx_cmd = app.add_subcommand("linkx", "LINKX baseline (features + adjacency rows)");
  linkx_opts.attach(linkx_cmd, false);
  bool linkx_mlp = false;
  linkx_cmd->add_flag("--mlp", linkx_mlp, "features only (MLP baseline)");

  // lp
  auto* lp_cmd = app.add_subcommand("lp", "label propagation baseline on every split");
  std::string lp_data, lp_out;
  LpConfig lcfg;
  bool lp_mask = false, lp_directed = false;
  lp_cmd->add_option("--data", lp_data, "dataset bundle")->required();
  lp_cmd->add_option("--alpha", lcfg.alpha);
  lp_cmd->add_option("--hops", lcfg.hops, "1 or 2");
  lp_cmd->add_option("--iters", lcfg.iterations);
  lp_cmd->add_flag("--mask-a2", lp_mask, "2-hop support with 1-hop edges removed");
  lp_cmd->add_flag("--clamp", lcfg.clamp, "reset train rows every iteration");
  lp_cmd->add_flag("--directed", lp_directed, "do not symmetrize before propagating");
  lp_cmd->add_option("--out", lp_out);

  // inductive
  auto* ind_cmd = app.add_subcommand("inductive", "predict nodes revealed after training");
  std::string ind_model, ind_data, ind_edges, ind_feats, ind_out;
  ind_cmd->add_option("--model-dir", ind_model, "directory written by run --save-model")->required();
  ind_cmd->add_option("--data", ind_data, "bundle the model was trained on")->required();
  ind_cmd->add_option("--new-edges", ind_edges, "edges touching the new nodes")->required();
  ind_cmd->add_option("--new-feats", ind_feats, "node<TAB>values for every new node")->required();
  ind_cmd->add_option("--out", ind_out);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "planted homophily/monophily graph as a bundle");
  PlantedConfig scfg;
  std::string synth_regime = "homophilous", synth_out;
  synth_cmd->add_option("--regime", synth_regime, "homophilous | heterophilous | mixed");
  synth_cmd->add_option("--n", scfg.n);
  synth_cmd->add_option("--k", scfg.k, "mean degree");
  synth_cmd->add_option("--c", scfg.c, "classes");
  synth_cmd->add_option("--d", scfg.d, "feature dimension");
  synth_cmd->add_option("--sigma", scfg.sigma, "feature noise");
  synth_cmd->add_option("--centroid-scale", scfg.centroid_scale);
  synth_cmd->add_option("--homophily", scfg.homophily, "diagonal of the homophilous mixing matrix");
  synth_cmd->add_option("--seed", scfg.seed);
  synth_cmd->add_option("--out", synth_out, "bundle directory")->required();

  // theory
  auto* theory_cmd = app.add_subcommand("theory", "empirical checks of the estimator error bounds");
  std::string theory_check, theory_out, theory_seeds = "0..19";
  std::size_t theory_n = 0, theory_trials = 20;
  theory_cmd->add_option("--check", theory_check, "counting-slope | parametric-vs-counting | two-phase")
      ->required()
      ->check(CLI::IsMember({"counting-slope", "parametric-vs-counting", "two-phase"}));
  theory_cmd->add_option("--n", theory_n, "nodes (default per check: 2048, 5000, 4000)");
  theory_cmd->add_option("--trials", theory_trials, "label resamples for counting-slope");
  theory_cmd->add_option("--seeds", theory_seeds, "instance seeds");
  theory_cmd->add_option("--out", theory_out);

  // report
  auto* report_cmd = app.add_subcommand("report", "aggregate run logs: mean and sample std per method");
  std::vector<std::string> report_in;
  std::string report_out;
  bool report_table = false;
  report_cmd->add_option("inputs", report_in, "JSON-lines logs")->required();
  report_cmd->add_flag("--table", report_table, "print a human-readable table instead");
  report_cmd->add_option("--out", report_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_json_error("usage", e.what());
    return 2;
  }

  try {
    if (*ingest_cmd) {
      iflags.dedup = !no_dedup;
      for (const auto& s : split_files) ipaths.splits.emplace_back(s);
      const Dataset d = ingest(ipaths, iflags);
      save_bundle(d, ingest_out);
      std::cout << json{{"type", "ingest"},       {"name", d.name},
                        {"n", d.graph.num_nodes()}, {"m", d.graph.num_edges()},
                        {"d", d.features.cols()},   {"c", d.labels.classes},
                        {"splits", d.splits.size()}, {"out", ingest_out}}
                       .dump()
                << '\n';
    } else if (*kge_cmd) {
      if (!kge_config.empty()) {
        // explicit flags win over the file
        KgeConfig merged = load_config(kge_config).kge;
        if (kge_flags[0]->count()) merged.dim = kcfg.dim;
        if (kge_flags[1]->count()) merged.epochs = kcfg.epochs;
        if (kge_flags[2]->count()) merged.negatives = kcfg.negatives;
        if (kge_flags[3]->count()) merged.batch = kcfg.batch;
        if (kge_flags[4]->count()) merged.lr = kcfg.lr;
        if (kge_flags[5]->count()) merged.margin = kcfg.margin;
        kcfg = merged;
      }
      if (!kge_loss.empty()) kcfg.loss = parse_kge_loss(kge_loss);
      const Dataset d = load_bundle(kge_data);
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = kge_train(d.graph, kcfg, kge_seed);
      for (std::size_t e = 0; e < r.epoch_loss.size(); ++e)
        std::cout << json{{"type", "kge_epoch"}, {"epoch", e + 1}, {"loss", r.epoch_loss[e]}}.dump() << '\n';
      export_kge(r.table, kge_out);
      std::cout << json{{"type", "kge"},        {"rows", r.table.rows()},
                        {"dim", r.table.dim()}, {"fallback_negatives", r.fallback_negatives},
                        {"seconds", seconds_since(t0)}, {"out", kge_out}}
                       .dump()
                << '\n';
    } else if (*run_cmd) {
      return cmd_pipeline(run_opts, "", "");
    } else if (*abl_cmd) {
      return cmd_pipeline(abl_opts, abl_which, abl_scope);
    } else if (*linkx_cmd) {
      return cmd_linkx(linkx_opts, linkx_mlp);
    } else if (*lp_cmd) {
      lcfg.symmetrize = !lp_directed;
      lcfg.validate();
      const Dataset d = load_bundle(lp_data);
      Sink sink(lp_out);
      const std::string method = lp_mask ? "lp-2hop-masked" : "lp-" + std::to_string(lcfg.hops) + "hop";
      std::vector<RunRecord> runs;
      for (std::size_t k = 0; k < d.splits.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = lp_mask ? label_prop_masked(d.graph, d.labels, d.splits[k], lcfg)
                               : label_prop(d.graph, d.labels, d.splits[k], lcfg);
        RunRecord rec;
        rec.method = method;
        rec.seed = 0;
        rec.split = k;
        rec.valid_accuracy = rows_accuracy(r.predictions, d.labels, d.splits[k].valid());
        rec.test_accuracy = rows_accuracy(r.predictions, d.labels, d.splits[k].test());
        rec.seconds = seconds_since(t0);
        runs.push_back(rec);
      }
      emit_runs(sink, runs);
    } else if (*ind_cmd) {
      const InductiveModel model = load_model(ind_model);
      const Dataset d = load_bundle(ind_data);
      const Reveal rv = reveal_nodes(d, ind_edges, ind_feats);
      const auto pred = inductive_predict(model, rv.graph, rv.features, rv.new_nodes);
      Sink sink(ind_out);
      for (std::size_t k = 0; k < rv.new_nodes.size(); ++k) {
        std::vector<double> p(pred.probs.cols());
        for (Eigen::Index j = 0; j < pred.probs.cols(); ++j) p[static_cast<std::size_t>(j)] = pred.probs(static_cast<Eigen::Index>(k), j);
        sink.line(json{{"type", "prediction"}, {"node", rv.new_ids[k]}, {"class", pred.predictions[k]},
                       {"probs", p}, {"no_edges", static_cast<bool>(pred.no_edges[k])}});
      }
    } else if (*synth_cmd) {
      scfg.regime = parse_regime(synth_regime);
      if (scfg.regime == Regime::custom) throw InvalidArgument("custom mixing is library-only");
      const PlantedGraph pg = generate_planted(scfg);
      save_bundle(pg.data, synth_out);
      const Dataset& d = pg.data;
      std::cout << json{{"type", "synth"},
                        {"regime", synth_regime},
                        {"n", d.graph.num_nodes()},
                        {"m", d.graph.num_edges()},
                        {"c", d.labels.classes},
                        {"edge_homophily", edge_homophily(d.graph, d.labels)},
                        {"class_insensitive_homophily", class_insensitive_homophily(d.graph, d.labels)},
                        {"two_hop_agreement", two_hop_agreement(d.graph, d.labels)},
                        {"out", synth_out}}
                       .dump()
                << '\n';
    } else if (*theory_cmd) {
      Sink sink(theory_out);
      const auto seeds = parse_seeds(theory_seeds);
      const auto t0 = std::chrono::steady_clock::now();
      if (theory_check == "counting-slope") {
        const auto r = counting_slope_check(theory_n ? theory_n : 2048, 4, theory_trials, seeds.front());
        for (const auto& row : r.rows)
          sink.line(json{{"type", "counting"}, {"k", row.k}, {"mean_sup_error", row.mean_sup_error}});
        sink.line(json{{"type", "slope"}, {"slope", r.slope}, {"seconds", seconds_since(t0)}});
      } else if (theory_check == "parametric-vs-counting") {
        TheoryConfig tc;
        tc.n = theory_n ? theory_n : 5000;
        tc.k = 10;
        tc.c = 3;
        int wins = 0;
        for (const auto& d : parametric_vs_counting(tc, seeds, QSgdConfig{})) {
          wins += d.parametric < d.counting;
          sink.line(json{{"type", "duel"}, {"seed", d.seed}, {"parametric", d.parametric},
                         {"counting", d.counting}, {"lr", d.lr}, {"restarts", d.restarts}});
        }
        sink.line(json{{"type", "summary"}, {"parametric_wins", wins}, {"seeds", seeds.size()},
                       {"seconds", seconds_since(t0)}});
      } else {
        TheoryConfig tc;
        tc.n = theory_n ? theory_n : 4000;
        const double grid[] = {0, 0.1, 0.25, 0.5, 0.75, 0.9};
        const auto r = two_phase_check(tc, seeds, 1000, grid, QSgdConfig{}, PhaseConfig{});
        for (std::size_t i = 0; i < r.seeds.size(); ++i)
          sink.line(json{{"type", "gap"}, {"seed", r.seeds[i]}, {"naive", r.naive_gap[i]},
                         {"two_phase", r.two_phase_gap[i]}});
        sink.line(json{{"type", "summary"}, {"lambda", r.lambda}, {"mean_diff", r.test.mean_diff},
                       {"t", r.test.t}, {"p_value", r.test.p_value}, {"pairs", r.test.n},
                       {"seconds", seconds_since(t0)}});
      }
    } else if (*report_cmd) {
      std::string all;
      for (const auto& path : report_in) {
        std::ifstream in(path);
        if (!in) throw InvalidArgument("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        all += ss.str();
        if (!all.empty() && all.back() != '\n') all += '\n';
      }
      Sink sink(report_out);
      if (report_table) {
        const auto rows = summarize(parse_runs(all));
        std::string t = summary_table(rows);
        if (!t.empty() && t.back() == '\n') t.pop_back();
        sink.line(t);
      } else {
        std::string r = report(all);
        if (!r.empty() && r.back() == '\n') r.pop_back();
        sink.line(r);
      }
    }
  } catch (const Error& e) {
    print_json_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_json_error("internal", e.what());
    return 1;
  }
  return 0;
}
