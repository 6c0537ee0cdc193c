#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glinkx/dataset.hpp"
#include "glinkx/graph.hpp"
#include "glinkx/matrix.hpp"
#include "glinkx/nn.hpp"
#include "glinkx/trainer.hpp"

namespace glinkx {

// Edge traversals done by the label propagations of one pipeline run.
struct PropagationStats {
  std::size_t edge_passes = 0;
  std::size_t edges_visited = 0;
  std::size_t message_width = 0;
};

// Rows on the simplex; rows without a contributing neighbor are flagged
// invalid (zero for the forward step, uniform for the backward step).
struct SoftLabelMatrix {
  Matrix values;
  std::vector<char> valid;

  std::size_t valid_count() const;
};

// yhat_i = mean one-hot label over in-neighbors j that are train nodes.
// Computed for every node; train rows are the Stage-2 targets and valid
// rows the Stage-2 validation signal.
SoftLabelMatrix mlap_forward(const CsrGraph& g, const LabelVector& y, const SplitMasks& masks,
                             PropagationStats* stats = nullptr);

// y'_i = mean of ytilde_j over out-neighbors j; zero out-degree -> uniform.
SoftLabelMatrix mlap_backward(const CsrGraph& g, const Matrix& ytilde,
                              PropagationStats* stats = nullptr);

enum class PeSource { kge, adjacency };
PeSource parse_pe_source(const std::string& s);
const char* pe_source_name(PeSource p);

struct StageConfig {
  std::size_t hidden = 64;
  int layers_x = 1;
  int layers_p = 1;
  int layers_prop = 1;
  int layers_agg = 1;
  double dropout = 0.5;
  TrainConfig train;
};

struct BranchMask {
  bool ego = true;
  bool pe = true;
  bool prop = true;  // stage 3 only; false also skips stage 2 entirely
};

struct PipelineConfig {
  StageConfig stage2;
  StageConfig stage3;
  bool symmetrize = false;  // propagate over the symmetrized graph
  BranchMask stage2_branches;
  BranchMask stage3_branches;
  std::uint64_t seed = 0;
  bool report_auc = false;  // binary tasks: run_glinkx also records test AUC
};

struct PipelineInputs {
  const CsrGraph* graph = nullptr;
  const Matrix* features = nullptr;
  const LabelVector* labels = nullptr;
  const SplitMasks* masks = nullptr;
  PeSource pe = PeSource::adjacency;
  const Matrix* pe_table = nullptr;  // required for kge
  // When set, Stage 2 is skipped and this n x c matrix is fed to the
  // Stage-3 propagation branch as y'.
  const Matrix* yprime_override = nullptr;
};

struct PipelineArtifacts {
  bool stage2_ran = false;
  NetSpec stage2_spec;
  Params theta1;
  SoftLabelMatrix yhat;
  Matrix ytilde;
  SoftLabelMatrix yprime;
  TrainResult stage2;
  NetSpec stage3_spec;
  Params theta2;
  TrainResult stage3;
  Matrix final_probs;
  double valid_accuracy = 0;
  double test_accuracy = 0;
  PropagationStats propagation;
  std::vector<std::string> warnings;
};

// Stages 2 and 3 on one split. Stage errors are rethrown as PipelineError
// tagged with the stage name.
PipelineArtifacts run_pipeline(const PipelineInputs& in, const PipelineConfig& cfg);

// Stage-2 network inputs for every node of `g` (features plus PEs).
NetInputs pipeline_net_inputs(const CsrGraph& g, const Matrix& features, PeSource pe,
                              const Matrix* pe_table);

enum class AblationTarget { ego, propagation, pe };
enum class AblationScope { all, stage3 };
AblationTarget parse_ablation_target(const std::string& s);
AblationScope parse_ablation_scope(const std::string& s);
PipelineConfig ablate(PipelineConfig cfg, AblationTarget which, AblationScope scope);

struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t split = 0;
  double valid_accuracy = 0;
  double test_accuracy = 0;
  int stage2_best_epoch = -1;
  int stage3_best_epoch = -1;
  double seconds = 0;
  double test_auc = -1;  // negative when not requested
};

// One pipeline run per seed on split (seed mod #splits).
std::vector<RunRecord> run_glinkx(const Dataset& d, PeSource pe, const PipelineConfig& cfg,
                                  std::span<const std::uint64_t> seeds,
                                  const Matrix* pe_table = nullptr,
                                  const std::string& method = "");
std::vector<RunRecord> run_ablation(const Dataset& d, PeSource pe, AblationTarget which,
                                    AblationScope scope, const PipelineConfig& cfg,
                                    std::span<const std::uint64_t> seeds,
                                    const Matrix* pe_table = nullptr);

// --- inductive prediction ---------------------------------------------------

struct InductiveModel {
  PeSource pe = PeSource::adjacency;
  bool symmetrize = false;
  std::size_t known_nodes = 0;  // ids [0, known_nodes) existed at training time
  std::size_t feature_dim = 0;
  std::size_t classes = 0;
  bool stage2_ran = false;
  NetSpec stage2_spec;
  Params theta1;
  NetSpec stage3_spec;
  Params theta2;
  Matrix pe_table;  // kge mode: trained PEs of the known nodes
};

InductiveModel make_inductive_model(const PipelineInputs& in, const PipelineConfig& cfg,
                                    const PipelineArtifacts& art);

struct InductivePrediction {
  Matrix probs;                  // row k belongs to new_nodes[k]
  std::vector<int> predictions;
  std::vector<char> no_edges;    // node had no revealed edge to a PE-bearing node
};

// `full_graph` and `features` cover the known nodes followed by any newly
// revealed ones.
InductivePrediction inductive_predict(const InductiveModel& m, const CsrGraph& full_graph,
                                      const Matrix& features,
                                      std::span<const NodeId> new_nodes);

void save_model(const InductiveModel& m, const std::filesystem::path& dir);
InductiveModel load_model(const std::filesystem::path& dir);

}  // namespace glinkx
