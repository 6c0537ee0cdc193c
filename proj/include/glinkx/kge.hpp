#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "glinkx/graph.hpp"
#include "glinkx/matrix.hpp"
#include "glinkx/nn.hpp"

namespace glinkx {

enum class KgeLoss { margin, softmax };
KgeLoss parse_kge_loss(const std::string& s);

struct KgeConfig {
  std::size_t dim = 400;
  int epochs = 50;
  std::size_t negatives = 1000;
  std::size_t batch = 10000;
  double lr = 0.1;
  KgeLoss loss = KgeLoss::softmax;
  double margin = 1.0;

  void validate() const;
};

// n x dim float table; the single relation vector is the all-ones vector
// and never stored.
class KgeTable {
 public:
  KgeTable() = default;
  KgeTable(std::size_t n, std::size_t dim);
  KgeTable(std::size_t n, std::size_t dim, std::vector<float> values);

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::span<float> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  const std::vector<float>& values() const { return values_; }
  Matrix to_matrix() const;
  bool operator==(const KgeTable&) const = default;

 private:
  std::size_t n_ = 0, dim_ = 0;
  std::vector<float> values_;
};

// Triple product with an all-ones relation, i.e. the dot product h.t,
// accumulated in double.
double distmult_score(std::span<const float> h, std::span<const float> t);
double distmult_score(std::span<const double> h, std::span<const double> t);

// Loss of one positive against its negatives, and d(loss)/d(score) for
// the positive (coef[0]) and each negative (coef[k+1]).
struct KgeLossTerms {
  double loss = 0;
  std::vector<double> coef;
};
KgeLossTerms kge_loss(double positive, std::span<const double> negatives, const KgeConfig& cfg);

class KgeTrainer {
 public:
  KgeTrainer(const CsrGraph& g, KgeConfig cfg, std::uint64_t seed);

  // One plain-SGD update from the summed loss over `batch`; only rows that
  // appear in a positive or sampled negative pair change. Returns the mean
  // per-positive loss measured before the update.
  double step(std::span<const Edge> batch, std::vector<NodeId>* touched = nullptr);
  // Shuffled pass over every edge; returns the mean per-positive loss.
  double epoch();

  const KgeTable& table() const { return table_; }
  KgeTable take() { return std::move(table_); }
  // Negatives accepted after 100 failed rejection tries.
  std::size_t fallback_negatives() const { return fallbacks_; }

 private:
  Edge corrupt(const Edge& pos);

  const CsrGraph& g_;
  KgeConfig cfg_;
  Rng rng_;
  KgeTable table_;
  std::vector<Edge> edges_;
  std::vector<double> grad_;
  std::vector<char> touched_;
  std::size_t fallbacks_ = 0;
};

struct KgeResult {
  KgeTable table;
  std::vector<double> epoch_loss;
  std::size_t fallback_negatives = 0;
};

KgeResult kge_train(const CsrGraph& g, const KgeConfig& cfg, std::uint64_t seed);

void export_kge(const KgeTable& table, const std::filesystem::path& path);
// expected_rows = 0 skips the node-count check.
KgeTable import_kge(const std::filesystem::path& path, std::size_t expected_rows = 0);
KgeTable decode_kge(std::span<const std::uint8_t> bytes, std::size_t expected_rows = 0);

}  // namespace glinkx
