#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glinkx/graph.hpp"
#include "glinkx/matrix.hpp"

namespace glinkx {

struct TheoryConfig {
  std::size_t n = 2000;
  std::size_t c = 3;
  std::size_t k = 10;       // ring degree (even)
  double signal = 2.0;      // scale of the latent-to-logit map
  bool one_hot_p = false;   // P_i = argmax indicator instead of softmax
  bool enforce_min_degree = true;  // require k > c^2
  std::uint64_t seed = 0;
};

// Ring lattice where node i is joined to the k/2 nearest nodes on each
// side. Latent z_i = (cos, sin) of its angle; P_i = softmax(B z_i) with B
// random; Q_i the neighbor mean of P; xi_i = [1, z_i, log Q_i] so the
// softmax-linear q family contains Q exactly.
struct TheoryInstance {
  CsrGraph graph;
  Matrix z;
  Matrix B;   // c x 2
  Matrix P;
  Matrix Q;
  Matrix xi;
  std::vector<int> y;  // y_i ~ P_i
};

inline constexpr double kLogQFloor = 1e-6;

CsrGraph ring_lattice(std::size_t n, std::size_t k);
TheoryInstance generate_theory_instance(const TheoryConfig& cfg);
// Builds Q, xi and samples labels for a given graph and P.
TheoryInstance make_theory_instance(CsrGraph g, Matrix P, Matrix z, std::uint64_t label_seed);
void resample_labels(TheoryInstance& inst, std::uint64_t seed);

// Qhat_i = mean one-hot label over N(i); never reads y_i itself.
Matrix counting_estimator(const CsrGraph& g, std::span<const int> y, std::size_t c);

struct CountingRow {
  std::size_t k = 0;
  double mean_sup_error = 0;  // mean over trials and nodes of ||Q_i - Qhat_i||_inf
};
// One row per k: ring lattice of n nodes, labels resampled per trial.
std::vector<CountingRow> counting_estimator_error(const TheoryConfig& base,
                                                  std::span<const std::size_t> ks,
                                                  std::size_t trials);
// Least-squares slope of log(error) against log(k).
double loglog_slope(std::span<const CountingRow> rows);

// Softmax-linear model: probs_i = softmax(W xi_i), W is c x dim(xi).
Matrix softmax_linear(const Matrix& W, const Matrix& xi);

struct EstimatorError {
  double mean_abs = 0;  // mean over i,j of |q_ij - Q_ij|
  double mean_sup = 0;  // mean over i of max_j |q_ij - Q_ij|
};
EstimatorError estimator_error(const Matrix& est, const Matrix& truth);

struct QSgdConfig {
  std::size_t steps = 0;     // 0 -> n
  double lr_scale = 1.0;     // eta = lr_scale * log(n) / n; tuned on held-out seed 1000
  int max_restarts = 5;
  std::uint64_t seed = 0;
};

struct QSgdResult {
  Matrix theta;
  EstimatorError error;          // parametric q vs Q
  EstimatorError counting_error; // Qhat vs Q on the same labels
  double lr = 0;
  int restarts = 0;
};

// SGD on -1/n sum_i sum_j Qhat_ij log q(j|xi_i; theta), one uniformly drawn
// node per step. A loss above 10x the initial loss halves lr and restarts.
QSgdResult parametric_q_sgd(const TheoryInstance& inst, const QSgdConfig& cfg);

// G(w) = 1/n sum_i sum_j T_ij log p(j|xi_i; w) and its gradient.
double g_objective(const Matrix& W, const Matrix& xi, const Matrix& T);
Matrix g_gradient(const Matrix& W, const Matrix& xi, const Matrix& T);
// G at the maximizer: -mean entropy of P (the family contains P).
double g_optimum(const Matrix& P);
// Phat_i = mean over N(i) of q(.|xi_k; theta1).
Matrix surrogate_targets(const TheoryInstance& inst, const Matrix& theta1);

struct PhaseConfig {
  double lambda = 0.5;
  std::size_t phase1_steps = 300;
  std::size_t phase2_steps = 0;  // 0 -> n
  double lr_scale = 20.0;        // eta = lr_scale * log(n) / n for the SGD steps
  bool record_surrogate = false;
  std::uint64_t seed = 0;
};

struct PhaseResult {
  double naive_gap = 0;      // G(w*) - G(w) after n naive SGD steps from 0
  double two_phase_gap = 0;  // same for the two-phase scheme
  double phase1_gap = 0;     // after Phase I alone
  std::vector<double> phase1_surrogate;  // Ghat along Phase I
  std::vector<double> phase2_surrogate;  // Ghat along Phase II (record_surrogate only)
  Matrix phase1_w;                       // iterate handed to Phase II
};

// SGD on G with g_t = grad log p(y_i | xi_i; w) from `w0`.
Matrix naive_sgd(const TheoryInstance& inst, Matrix w0, std::size_t steps, double lr,
                 std::uint64_t seed);
// Phase I: full-gradient ascent on Ghat with eta = 1/L. Phase II: SGD with
// g_t = (1-lambda) grad log p(y_i|xi_i;w) + lambda grad Ghat(w).
PhaseResult two_phase_sgd(const TheoryInstance& inst, const Matrix& theta1,
                          const PhaseConfig& cfg);

// Smallest mean two-phase gap over `grid` on the given instances.
double tune_lambda(std::span<const TheoryInstance> instances,
                   std::span<const Matrix> thetas, std::span<const double> grid,
                   PhaseConfig cfg);

struct PairedTest {
  double mean_diff = 0;  // mean of (a - b)
  double t = 0;
  double p_value = 1;    // one-sided, H1: mean(a - b) > 0
  std::size_t n = 0;
};
PairedTest paired_one_sided(std::span<const double> a, std::span<const double> b);

}  // namespace glinkx
