#pragma once

#include <cstdint>
#include <vector>

#include "glinkx/theory.hpp"

namespace glinkx {

// Drivers shared by `glinkx theory` and the acceptance binary.

struct SlopeCheck {
  std::vector<CountingRow> rows;
  double slope = 0;
};
// Ring lattices of `n` nodes for k = 8, 16, ..., 1024; K > c^2 is not
// enforced because the small degrees of the sweep violate it for c = 4.
SlopeCheck counting_slope_check(std::size_t n, std::size_t c, std::size_t trials, std::uint64_t seed);

struct EstimatorDuel {
  std::uint64_t seed = 0;
  double parametric = 0;  // mean sup-norm error
  double counting = 0;
  double lr = 0;
  int restarts = 0;
};
std::vector<EstimatorDuel> parametric_vs_counting(const TheoryConfig& base,
                                                  std::span<const std::uint64_t> seeds,
                                                  const QSgdConfig& sgd);

struct TwoPhaseCheck {
  double lambda = 0;  // tuned on the held-out seed
  std::vector<std::uint64_t> seeds;
  std::vector<double> naive_gap;
  std::vector<double> two_phase_gap;
  PairedTest test;    // H1: naive gap > two-phase gap
};
// lambda is chosen from `grid` on the instance of `tune_seed` alone, then
// frozen for the paired seeds.
TwoPhaseCheck two_phase_check(const TheoryConfig& base, std::span<const std::uint64_t> seeds,
                              std::uint64_t tune_seed, std::span<const double> grid,
                              const QSgdConfig& sgd, PhaseConfig phase);

}  // namespace glinkx
