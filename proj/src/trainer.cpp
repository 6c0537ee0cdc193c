#include "glinkx/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "glinkx/error.hpp"

namespace glinkx {

int argmax_row(const Matrix& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j)
    if (m(row, j) > m(row, best)) best = j;
  return static_cast<int>(best);
}

double accuracy(const Matrix& probs, std::span<const int> labels,
                std::span<const NodeId> rows) {
  if (rows.empty()) return 0;
  std::size_t hit = 0;
  for (NodeId r : rows) hit += argmax_row(probs, r) == labels[r];
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

double accuracy_compact(const Matrix& probs, std::span<const int> labels,
                        std::span<const NodeId> rows) {
  if (rows.empty()) return 0;
  std::size_t hit = 0;
  for (std::size_t k = 0; k < rows.size(); ++k)
    hit += argmax_row(probs, static_cast<Eigen::Index>(k)) == labels[rows[k]];
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

double binary_auc(const Matrix& probs, std::span<const int> labels, std::span<const NodeId> rows) {
  if (probs.cols() != 2) throw InvalidArgument("AUC needs a binary task");
  std::vector<std::pair<double, int>> s;
  for (NodeId v : rows) s.push_back({probs(static_cast<Eigen::Index>(v), 1), labels[v]});
  std::sort(s.begin(), s.end());
  double pos = 0, rank_sum = 0;
  for (std::size_t a = 0; a < s.size();) {
    std::size_t b = a;
    while (b < s.size() && s[b].first == s[a].first) ++b;
    const double mid = 0.5 * static_cast<double>(a + 1 + b);
    for (std::size_t k = a; k < b; ++k)
      if (s[k].second == 1) {
        pos += 1;
        rank_sum += mid;
      }
    a = b;
  }
  const double neg = static_cast<double>(s.size()) - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("AUC needs both classes among the rows");
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

Matrix one_hot(std::span<const int> labels, std::size_t classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()),
                          static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return y;
}

Matrix one_hot_rows(std::span<const int> labels, std::span<const NodeId> rows,
                    std::size_t classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(classes));
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (labels[rows[k]] >= 0) y(static_cast<Eigen::Index>(k), labels[rows[k]]) = 1.0;
  return y;
}

namespace {

bool better(const Evaluation& a, const Evaluation& b) {
  if (a.valid_score != b.valid_score) return a.valid_score > b.valid_score;
  return a.valid_tiebreak < b.valid_tiebreak;
}

}  // namespace

TrainResult train_model(GlinkxNet& net, const NetInputs& inputs, const Matrix& targets,
                        std::span<const NodeId> train_rows, const Evaluator& evaluate,
                        const TrainConfig& cfg) {
  if (train_rows.empty()) throw InvalidArgument("train_model: no training rows");
  if (cfg.epochs < 1) throw InvalidArgument("train_model: epochs must be >= 1");
  if (cfg.batch_size == 0) throw InvalidArgument("train_model: batch size must be >= 1");
  if (static_cast<std::size_t>(targets.cols()) != net.spec().classes)
    throw DimensionError("train_model: target width != class count");

  Rng rng(cfg.seed);
  AdamW opt(net.params(), cfg.optimizer);
  std::vector<NodeId> order(train_rows.begin(), train_rows.end());
  const std::size_t batch = std::min(cfg.batch_size, order.size());

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      const std::size_t hi = std::min(order.size(), lo + batch);
      std::span<const NodeId> rows(order.data() + lo, hi - lo);
      const NetInputs in = inputs.gather(rows, net.spec());
      const Matrix t = gather_rows(targets, rows);
      const ForwardResult fwd = net.forward(in, true, &rng);
      const LossResult loss = soft_cross_entropy(fwd.probs, t);
      const Params grads = net.backward(fwd, in, loss.dlogits);
      try {
        opt.step(net.params(), grads);
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      loss_sum += loss.loss * static_cast<double>(rows.size());
    }

    const Evaluation ev = evaluate(net);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.valid_score = ev.valid_score;
    rec.valid_tiebreak = ev.valid_tiebreak;
    rec.test_score = ev.test_score;
    rec.param_digest = digest(net.params());
    result.log.push_back(rec);

    if (!ev.has_valid) {
      result.final_epoch_fallback = true;
      result.best = net.params();
      result.best_epoch = epoch;
      result.best_eval = ev;
    } else if (result.best_epoch < 0 || better(ev, result.best_eval)) {
      result.best = net.params();
      result.best_epoch = epoch;
      result.best_eval = ev;
    }
  }
  if (result.final_epoch_fallback)
    result.warnings.push_back("no validation nodes; using final-epoch parameters");
  net.params() = result.best;
  return result;
}

}  // namespace glinkx
