#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glinkx/graph.hpp"
#include "glinkx/matrix.hpp"
#include "glinkx/mlap.hpp"

namespace glinkx {

struct LpConfig {
  double alpha = 0.5;
  int hops = 1;          // 1: A, 2: off-diagonal support of A^2
  int iterations = 50;
  bool clamp = false;    // re-impose train labels after every iteration
  bool symmetrize = true;

  void validate() const;
};

struct LpResult {
  Matrix scores;
  std::vector<int> predictions;
  std::vector<char> fallback;  // zero score row, predicted by train majority
};

// Off-diagonal support of A^2 (i != j with a common intermediate node).
CsrGraph two_hop_graph(const CsrGraph& g);
// Entry (i,j) kept iff (A^2)_ij - A_ij - I_ij >= 1; diagonal dropped.
CsrGraph masked_two_hop_graph(const CsrGraph& g);

// Y <- alpha S Y + (1-alpha) Y0 for `iterations` steps with
// S = D^-1/2 (A+I) D^-1/2 over `support`; Y0 holds one-hot train labels.
LpResult label_prop_on(const CsrGraph& support, const LabelVector& y, const SplitMasks& masks,
                       const LpConfig& cfg);

LpResult label_prop(const CsrGraph& g, const LabelVector& y, const SplitMasks& masks,
                    const LpConfig& cfg);
// Unclamped LP on one support for every (split, alpha) pair, sharing the
// sequence S^t Y0 across alphas and stacking the splits into one product.
// result[split][alpha]; scores agree with label_prop_on to rounding.
std::vector<std::vector<LpResult>> label_prop_sweep(const CsrGraph& support, const LabelVector& y,
                                                    std::span<const SplitMasks> splits,
                                                    std::span<const double> alphas, int iterations);
// Throws "no 2-hop-exclusive structure" when the mask matrix is empty.
LpResult label_prop_masked(const CsrGraph& g, const LabelVector& y, const SplitMasks& masks,
                           const LpConfig& cfg);

struct BaselineResult {
  double valid_accuracy = 0;
  double test_accuracy = 0;
  NetSpec spec;
  TrainResult train;
};

// Both are Stage-3-style classifiers trained with the same loop:
// MLP(X) alone, and MLP(X) (+) MLP(adjacency rows).
BaselineResult feature_mlp_baseline(const Matrix& X, const LabelVector& y,
                                    const SplitMasks& masks, const StageConfig& cfg,
                                    std::uint64_t seed);
BaselineResult linkx_baseline(const CsrGraph& g, const Matrix& X, const LabelVector& y,
                              const SplitMasks& masks, const StageConfig& cfg,
                              std::uint64_t seed);

}  // namespace glinkx
