#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "glinkx/matrix.hpp"

namespace glinkx {

using Rng = std::mt19937_64;

// splitmix64 of seed + tag: independent streams per stage or purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// The three input branches of the shallow network.
enum class Branch : std::uint8_t { ego = 0, position = 1, propagated = 2 };
inline constexpr std::array<Branch, 3> kAllBranches = {
    Branch::ego, Branch::position, Branch::propagated};
const char* branch_name(Branch b);

// Dense affine layer y = x W + b, W stored in x out.
struct Linear {
  Matrix weight;
  RowVector bias;
};

// Every trainable block of a network, in a fixed order. Gradients and
// optimizer moments use the same layout.
using Params = std::vector<Linear>;

std::size_t parameter_count(const Params& p);
Params zeros_like(const Params& p);
std::vector<double> flatten(const Params& p);
std::uint64_t digest(const Params& p);
bool all_finite(const Params& p);

struct NetSpec {
  std::size_t ego_dim = 0;
  std::size_t position_dim = 0;
  std::size_t classes = 2;  // output width and propagated-branch input width
  std::size_t hidden = 64;
  int ego_layers = 1;
  int position_layers = 1;
  int propagated_layers = 1;
  int agg_layers = 1;
  bool use_ego = true;
  bool use_position = true;
  bool use_propagated = false;
  bool position_sparse = false;  // position branch consumes SparseRows
  double dropout = 0.5;

  bool uses(Branch b) const;
  int branch_count() const;
  void validate() const;
};

// Row-aligned inputs for a set of nodes. Only the members the network's
// spec uses need to be populated.
struct NetInputs {
  Matrix ego;
  Matrix position;
  SparseRows position_sparse;
  Matrix propagated;

  NetInputs gather(std::span<const NodeId> rows, const NetSpec& spec) const;
};

// Activations kept by a forward pass so the backward pass is exact.
struct ChainTrace {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l, l >= 1
  std::vector<Matrix> pre;     // pre-activation of hidden layer l
  std::vector<Matrix> drop;    // inverted-dropout scale after hidden layer l
};

struct ForwardCache {
  std::array<ChainTrace, 3> branches;
  std::array<Matrix, 3> branch_out;
  Matrix concat_dropped;
  Matrix concat_mask;  // empty when dropout was not applied
  Matrix combine_pre;
  ChainTrace agg;
};

struct ForwardResult {
  Matrix logits;
  Matrix probs;
  ForwardCache cache;
};

// MLP(x) (+) MLP(p) (+) MLP(y') -> concat -> dropout -> linear, plus the
// identity skip from every branch -> ReLU -> aggregation MLP -> c logits.
// Branch MLPs end in a linear layer of width `hidden`.
class GlinkxNet {
 public:
  GlinkxNet() = default;
  GlinkxNet(NetSpec spec, std::uint64_t seed);

  const NetSpec& spec() const { return spec_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  std::size_t parameter_count() const { return glinkx::parameter_count(params_); }

  // Layer range [first, first+count) of a branch inside params().
  std::pair<std::size_t, std::size_t> branch_layers(Branch b) const;
  std::size_t combine_layer() const { return combine_index_; }
  std::pair<std::size_t, std::size_t> agg_layers() const;

  ForwardResult forward(const NetInputs& in, bool training, Rng* rng = nullptr) const;
  Params backward(const ForwardResult& fwd, const NetInputs& in,
                  const Matrix& dlogits) const;

  // Eval-mode class probabilities.
  Matrix predict(const NetInputs& in) const;

 private:
  void check_inputs(const NetInputs& in) const;

  NetSpec spec_;
  Params params_;
  std::array<std::size_t, 3> branch_first_{};
  std::array<std::size_t, 3> branch_count_{};
  std::size_t combine_index_ = 0;
};

Matrix softmax_rows(const Matrix& logits);

inline constexpr double kLogClamp = 1e-12;

struct LossResult {
  double loss = 0;
  Matrix dlogits;
};

// Mean soft-target cross-entropy -(1/B) sum_i sum_l t_il log p_il, with
// log clamped at kLogClamp, and its gradient w.r.t. the logits.
LossResult soft_cross_entropy(const Matrix& probs, const Matrix& targets);

struct AdamWConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled weight decay Adam with bias correction.
class AdamW {
 public:
  AdamW(const Params& like, AdamWConfig cfg);

  // Throws NumericalError (leaving params untouched) on non-finite grads.
  void step(Params& params, const Params& grads);
  long steps() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  AdamWConfig cfg_;
  Params m_, v_;
  long t_ = 0;
};

}  // namespace glinkx
