#include "glinkx/kge.hpp"

#include <algorithm>
#include <cmath>

#include "glinkx/error.hpp"

namespace glinkx {

KgeLoss parse_kge_loss(const std::string& s) {
  if (s == "margin") return KgeLoss::margin;
  if (s == "softmax") return KgeLoss::softmax;
  throw InvalidArgument("unknown KGE loss '" + s + "' (margin|softmax)");
}

void KgeConfig::validate() const {
  if (dim == 0) throw InvalidArgument("KGE dim must be >= 1");
  if (epochs < 0) throw InvalidArgument("KGE epochs must be >= 0");
  if (negatives == 0) throw InvalidArgument("KGE negatives must be >= 1");
  if (batch == 0) throw InvalidArgument("KGE batch must be >= 1");
  if (!(lr > 0)) throw InvalidArgument("KGE lr must be positive");
}

KgeTable::KgeTable(std::size_t n, std::size_t dim) : n_(n), dim_(dim), values_(n * dim, 0.0f) {}

KgeTable::KgeTable(std::size_t n, std::size_t dim, std::vector<float> values)
    : n_(n), dim_(dim), values_(std::move(values)) {
  if (values_.size() != n * dim) throw DimensionError("KGE table size != n*dim");
}

Matrix KgeTable::to_matrix() const {
  Matrix m(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < values_.size(); ++i) m.data()[i] = values_[i];
  return m;
}

double distmult_score(std::span<const float> h, std::span<const float> t) {
  if (h.size() != t.size()) throw DimensionError("distmult_score: dims differ");
  double s = 0;
  for (std::size_t i = 0; i < h.size(); ++i) s += static_cast<double>(h[i]) * t[i];
  return s;
}

double distmult_score(std::span<const double> h, std::span<const double> t) {
  if (h.size() != t.size()) throw DimensionError("distmult_score: dims differ");
  double s = 0;
  for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * t[i];
  return s;
}

KgeLossTerms kge_loss(double positive, std::span<const double> negatives, const KgeConfig& cfg) {
  KgeLossTerms t;
  t.coef.assign(negatives.size() + 1, 0.0);
  if (cfg.loss == KgeLoss::softmax) {
    double mx = positive;
    for (double s : negatives) mx = std::max(mx, s);
    double z = std::exp(positive - mx);
    for (double s : negatives) z += std::exp(s - mx);
    const double lse = mx + std::log(z);
    t.loss = lse - positive;
    t.coef[0] = std::exp(positive - lse) - 1.0;
    for (std::size_t k = 0; k < negatives.size(); ++k) t.coef[k + 1] = std::exp(negatives[k] - lse);
  } else {
    for (std::size_t k = 0; k < negatives.size(); ++k) {
      const double l = cfg.margin - positive + negatives[k];
      if (l <= 0) continue;
      t.loss += l;
      t.coef[0] -= 1.0;
      t.coef[k + 1] = 1.0;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

KgeTrainer::KgeTrainer(const CsrGraph& g, KgeConfig cfg, std::uint64_t seed)
    : g_(g), cfg_(cfg), rng_(seed), table_(g.num_nodes(), cfg.dim), edges_(g.edges()) {
  cfg_.validate();
  if (edges_.empty()) throw InvalidArgument("KGE training needs at least one edge");
  const float bound = static_cast<float>(1.0 / std::sqrt(static_cast<double>(cfg_.dim)));
  std::uniform_real_distribution<float> u(-bound, bound);
  for (std::size_t i = 0; i < table_.rows(); ++i)
    for (float& v : table_.row(i)) v = u(rng_);
  grad_.assign(table_.rows() * cfg_.dim, 0.0);
  touched_.assign(table_.rows(), 0);
}

Edge KgeTrainer::corrupt(const Edge& pos) {
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(g_.num_nodes() - 1));
  std::bernoulli_distribution head(0.5);
  Edge e = pos;
  for (int tries = 0; tries < 100; ++tries) {
    e = pos;
    if (head(rng_))
      e.src = node(rng_);
    else
      e.dst = node(rng_);
    if (!g_.has_edge(e.src, e.dst)) return e;
  }
  ++fallbacks_;
  return e;
}

double KgeTrainer::step(std::span<const Edge> batch, std::vector<NodeId>* touched) {
  const std::size_t d = cfg_.dim;
  std::vector<NodeId> rows;
  auto grad_row = [&](NodeId r) {
    if (!touched_[r]) {
      touched_[r] = 1;
      rows.push_back(r);
    }
    return std::span<double>(grad_.data() + static_cast<std::size_t>(r) * d, d);
  };
  // d(score(h,t)) adds coef * t to h's gradient and coef * h to t's.
  auto accumulate = [&](const Edge& e, double coef) {
    auto gh = grad_row(e.src);
    auto gt = grad_row(e.dst);
    auto h = table_.row(e.src);
    auto t = table_.row(e.dst);
    for (std::size_t k = 0; k < d; ++k) {
      gh[k] += coef * t[k];
      gt[k] += coef * h[k];
    }
  };

  std::vector<Edge> negs(cfg_.negatives);
  std::vector<double> scores(cfg_.negatives + 1);
  double total = 0;
  for (const Edge& pos : batch) {
    for (auto& n : negs) n = corrupt(pos);
    scores[0] = distmult_score(table_.row(pos.src), table_.row(pos.dst));
    for (std::size_t k = 0; k < negs.size(); ++k)
      scores[k + 1] = distmult_score(table_.row(negs[k].src), table_.row(negs[k].dst));

    const auto terms = kge_loss(scores[0], std::span<const double>(scores).subspan(1), cfg_);
    total += terms.loss;
    accumulate(pos, terms.coef[0]);
    for (std::size_t k = 0; k < negs.size(); ++k)
      if (terms.coef[k + 1] != 0) accumulate(negs[k], terms.coef[k + 1]);
  }

  for (NodeId r : rows) {
    auto p = table_.row(r);
    double* g = grad_.data() + static_cast<std::size_t>(r) * d;
    for (std::size_t k = 0; k < d; ++k) {
      p[k] = static_cast<float>(p[k] - cfg_.lr * g[k]);
      g[k] = 0;
    }
    touched_[r] = 0;
  }
  for (NodeId r : rows)
    for (float v : table_.row(r))
      if (!std::isfinite(v)) throw NumericalError("KGE embedding diverged at node " + std::to_string(r));
  if (touched) *touched = std::move(rows);
  return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

double KgeTrainer::epoch() {
  std::shuffle(edges_.begin(), edges_.end(), rng_);
  double total = 0;
  for (std::size_t lo = 0; lo < edges_.size(); lo += cfg_.batch) {
    const std::size_t hi = std::min(edges_.size(), lo + cfg_.batch);
    total += step({edges_.data() + lo, hi - lo}) * static_cast<double>(hi - lo);
  }
  return total / static_cast<double>(edges_.size());
}

KgeResult kge_train(const CsrGraph& g, const KgeConfig& cfg, std::uint64_t seed) {
  KgeTrainer t(g, cfg, seed);
  KgeResult r;
  for (int e = 0; e < cfg.epochs; ++e) r.epoch_loss.push_back(t.epoch());
  r.fallback_negatives = t.fallback_negatives();
  r.table = t.take();
  return r;
}

void export_kge(const KgeTable& table, const std::filesystem::path& path) {
  write_file_bytes(path, encode_dmat(table.values(), table.rows(), table.dim()));
}

KgeTable decode_kge(std::span<const std::uint8_t> bytes, std::size_t expected_rows) {
  std::uint64_t rows = 0, cols = 0;
  auto values = decode_dmat_f32(bytes, rows, cols, "KGE table");
  if (expected_rows != 0 && rows != expected_rows)
    throw DimensionError("KGE table has " + std::to_string(rows) + " rows, graph has " +
                         std::to_string(expected_rows) + " nodes");
  return KgeTable(rows, cols, std::move(values));
}

KgeTable import_kge(const std::filesystem::path& path, std::size_t expected_rows) {
  return decode_kge(read_file_bytes(path), expected_rows);
}

}  // namespace glinkx
