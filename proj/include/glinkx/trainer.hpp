#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glinkx/nn.hpp"

namespace glinkx {

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 4096;  // batches larger than the train set become full-batch
  AdamWConfig optimizer;
  std::uint64_t seed = 0;
};

// Validation and test numbers for the current parameters. Higher
// valid_score wins; equal scores are broken by lower valid_tiebreak.
struct Evaluation {
  bool has_valid = true;
  double valid_score = 0;
  double valid_tiebreak = 0;
  double test_score = 0;
};

using Evaluator = std::function<Evaluation(const GlinkxNet&)>;

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double valid_score = 0;
  double valid_tiebreak = 0;
  double test_score = 0;
  std::uint64_t param_digest = 0;
};

struct TrainResult {
  Params best;
  int best_epoch = -1;
  Evaluation best_eval;
  bool final_epoch_fallback = false;  // no validation signal was available
  std::vector<EpochRecord> log;
  std::vector<std::string> warnings;
};

// Minibatch AdamW on soft-target cross-entropy over `train_rows`. `targets`
// is indexed by node id like the rows of `inputs`. After training the net
// holds the parameters of the best validation epoch.
TrainResult train_model(GlinkxNet& net, const NetInputs& inputs, const Matrix& targets,
                        std::span<const NodeId> train_rows, const Evaluator& evaluate,
                        const TrainConfig& cfg);

// Fraction of `rows` whose argmax (lowest index on ties) equals labels[row].
double accuracy(const Matrix& probs, std::span<const int> labels,
                std::span<const NodeId> rows);
// Same, with probs row k belonging to rows[k].
double accuracy_compact(const Matrix& probs, std::span<const int> labels,
                        std::span<const NodeId> rows);

int argmax_row(const Matrix& m, Eigen::Index row);

// ROC AUC of column 1 as the score for label 1 over `rows` (node-indexed
// probs), with tied scores sharing their average rank.
double binary_auc(const Matrix& probs, std::span<const int> labels, std::span<const NodeId> rows);

Matrix one_hot(std::span<const int> labels, std::size_t classes);
// Row k is the one-hot of labels[rows[k]].
Matrix one_hot_rows(std::span<const int> labels, std::span<const NodeId> rows,
                    std::size_t classes);

}  // namespace glinkx
