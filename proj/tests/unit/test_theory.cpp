#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "glinkx/error.hpp"
#include "glinkx/theory.hpp"

using namespace glinkx;

namespace {

TheoryInstance constant_p(std::size_t n, std::size_t k, RowVector p, std::uint64_t seed) {
  Matrix P(n, p.size());
  P.rowwise() = p;
  Matrix z = Matrix::Zero(n, 2);
  return make_theory_instance(ring_lattice(n, k), P, z, seed);
}

// E|Bin(k, 1/2)/k - 1/2|, exactly.
double binomial_mad(int k) {
  double s = 0;
  for (int j = 0; j <= k; ++j) {
    const double logp = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) - k * std::log(2.0);
    s += std::exp(logp) * std::abs(j / double(k) - 0.5);
  }
  return s;
}

}  // namespace

TEST_CASE("theory instance invariants") {
  TheoryConfig cfg;
  cfg.n = 300;
  auto inst = generate_theory_instance(cfg);
  CHECK(inst.graph.is_symmetric());
  for (NodeId i = 0; i < 300; ++i) {
    CHECK(inst.graph.out_degree(i) == cfg.k);
    RowVector q = RowVector::Zero(3);
    for (NodeId k : inst.graph.out_neighbors(i)) q += inst.P.row(k);
    q /= double(cfg.k);
    CHECK((q - inst.Q.row(i)).cwiseAbs().maxCoeff() < 1e-15);
  }
  cfg.k = 8;
  CHECK_THROWS_AS(generate_theory_instance(cfg), InvalidArgument);
  cfg.enforce_min_degree = false;
  CHECK_NOTHROW(generate_theory_instance(cfg));
  CHECK_THROWS_AS(ring_lattice(10, 3), InvalidArgument);
  CHECK_THROWS_AS(ring_lattice(10, 10), InvalidArgument);
}

TEST_CASE("counting estimator: deterministic labels give zero error") {
  TheoryConfig cfg;
  cfg.n = 400;
  cfg.one_hot_p = true;
  auto inst = generate_theory_instance(cfg);
  auto q = counting_estimator(inst.graph, inst.y, 3);
  CHECK(estimator_error(q, inst.Q).mean_sup < 1e-15);

  auto same = constant_p(100, 10, RowVector::Unit(3, 2), 1);
  CHECK(estimator_error(counting_estimator(same.graph, same.y, 3), same.Q).mean_abs == 0.0);
}

TEST_CASE("counting estimator: binomial closed form at K=100") {
  auto inst = constant_p(2000, 100, RowVector::Constant(2, 0.5), 4);
  double acc = 0;
  for (int t = 0; t < 5; ++t) {
    resample_labels(inst, 100 + t);
    acc += estimator_error(counting_estimator(inst.graph, inst.y, 2), inst.Q).mean_sup;
  }
  const double want = binomial_mad(100);
  CHECK(want == doctest::Approx(0.0398).epsilon(0.01));
  CHECK(acc / 5 == doctest::Approx(want).epsilon(0.1));
}

TEST_CASE("counting estimator: unbiased, on the simplex, never reads its own label") {
  TheoryConfig cfg;
  cfg.n = 40;
  auto inst = generate_theory_instance(cfg);
  const int reps = 10000;
  Matrix sum = Matrix::Zero(40, 3), sq = Matrix::Zero(40, 3);
  for (int r = 0; r < reps; ++r) {
    resample_labels(inst, 1000 + r);
    Matrix q = counting_estimator(inst.graph, inst.y, 3);
    if (r < 50) {
      CHECK(q.minCoeff() >= 0);
      CHECK(q.maxCoeff() <= 1);
      for (Eigen::Index i = 0; i < 40; ++i) CHECK(std::abs(q.row(i).sum() - 1) < 1e-9);
    }
    sum += q;
    sq += q.cwiseProduct(q);
  }
  Matrix mean = sum / reps;
  Matrix var = sq / reps - mean.cwiseProduct(mean);
  int outside = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double se = std::sqrt(std::max(var.data()[i], 1e-30) / reps);
    outside += std::abs(mean.data()[i] - inst.Q.data()[i]) > 3 * se;
  }
  // 120 cells at 3 SE: expect ~0.3 exceedances
  CHECK(outside <= 2);

  resample_labels(inst, 7);
  Matrix before = counting_estimator(inst.graph, inst.y, 3);
  auto y = inst.y;
  y[5] = (y[5] + 1) % 3;
  Matrix after = counting_estimator(inst.graph, y, 3);
  CHECK(before.row(5) == after.row(5));
}

TEST_CASE("log-log slope of exact power laws") {
  std::vector<CountingRow> rows;
  for (std::size_t k : {8u, 16u, 64u, 256u}) rows.push_back({k, 3.0 / std::sqrt(double(k))});
  CHECK(loglog_slope(rows) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("parametric q: easy instance, scaling in n") {
  TheoryConfig cfg;
  cfg.n = 2000;
  cfg.one_hot_p = true;
  auto easy = generate_theory_instance(cfg);
  auto r = parametric_q_sgd(easy, QSgdConfig{});
  CHECK(r.error.mean_sup < 0.02);

  int wins = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    double err[2];
    int idx = 0;
    for (std::size_t n : {200u, 5000u}) {
      TheoryConfig c;
      c.n = n;
      c.seed = s;
      QSgdConfig q;
      q.seed = s;
      err[idx++] = parametric_q_sgd(generate_theory_instance(c), q).error.mean_sup;
    }
    wins += err[1] < err[0];
  }
  CHECK(wins >= 4);
}

TEST_CASE("parametric q: divergence guard halves lr and gives up after the cap") {
  TheoryConfig cfg;
  cfg.n = 500;
  auto inst = generate_theory_instance(cfg);
  QSgdConfig q;
  q.lr_scale = 1e7;
  q.max_restarts = 2;
  CHECK_THROWS_AS(parametric_q_sgd(inst, q), NumericalError);
  q.max_restarts = 40;
  auto r = parametric_q_sgd(inst, q);
  CHECK(r.restarts > 0);
  CHECK(r.lr == doctest::Approx(1e7 * std::log(500.0) / 500 / std::pow(2.0, r.restarts)));
}

TEST_CASE("two-phase: degenerate lambdas") {
  TheoryConfig cfg;
  cfg.n = 600;
  auto inst = generate_theory_instance(cfg);
  auto q = parametric_q_sgd(inst, QSgdConfig{});
  PhaseConfig pc;
  pc.lambda = 0;
  pc.phase1_steps = 50;
  pc.seed = 9;
  auto r0 = two_phase_sgd(inst, q.theta, pc);
  const double eta = pc.lr_scale * std::log(600.0) / 600.0;
  const Matrix w = naive_sgd(inst, r0.phase1_w, 600, eta, pc.seed);
  const double gap = g_optimum(inst.P) - g_objective(w, inst.xi, inst.P);
  CHECK(std::abs(gap - r0.two_phase_gap) < 1e-9);

  pc.lambda = 1;
  pc.record_surrogate = true;
  auto r1 = two_phase_sgd(inst, q.theta, pc);
  for (std::size_t s = 1; s < r1.phase1_surrogate.size(); ++s)
    CHECK(r1.phase1_surrogate[s] >= r1.phase1_surrogate[s - 1] - 1e-12);
  REQUIRE(r1.phase2_surrogate.size() == 600);
  CHECK(r1.phase2_surrogate.front() >= r1.phase1_surrogate.back() - 1e-12);
  for (std::size_t s = 1; s < r1.phase2_surrogate.size(); ++s)
    CHECK(r1.phase2_surrogate[s] >= r1.phase2_surrogate[s - 1] - 1e-12);
  pc.lambda = 1.5;
  CHECK_THROWS_AS(two_phase_sgd(inst, q.theta, pc), InvalidArgument);
}

TEST_CASE("G objective, gradient and optimum") {
  TheoryConfig cfg;
  cfg.n = 100;
  auto inst = generate_theory_instance(cfg);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 0.3);
  Matrix W(3, inst.xi.cols());
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = g(rng);
  Matrix grad = g_gradient(W, inst.xi, inst.P);
  for (Eigen::Index i = 0; i < W.size(); ++i) {
    Matrix a = W, b = W;
    a.data()[i] += 1e-6;
    b.data()[i] -= 1e-6;
    const double num = (g_objective(a, inst.xi, inst.P) - g_objective(b, inst.xi, inst.P)) / 2e-6;
    CHECK(grad.data()[i] == doctest::Approx(num).epsilon(1e-6));
  }
  // G at any W never exceeds the analytic optimum (Gibbs)
  CHECK(g_objective(W, inst.xi, inst.P) <= g_optimum(inst.P));
  CHECK(g_objective(Matrix::Zero(3, inst.xi.cols()), inst.xi, inst.P) == doctest::Approx(-std::log(3.0)));
}

TEST_CASE("paired one-sided t test") {
  std::vector<double> a{1.1, 2.3, 3.0, 4.4, 5.2}, b{1.0, 2.0, 2.9, 4.0, 5.0};
  auto t = paired_one_sided(a, b);
  // differences .1 .3 .1 .4 .2: mean .22, sd .13038, t = 3.77297, df 4 -> p = 0.009777
  CHECK(t.mean_diff == doctest::Approx(0.22));
  CHECK(t.t == doctest::Approx(3.7729688731).epsilon(1e-9));
  CHECK(t.p_value == doctest::Approx(0.0097771063601).epsilon(1e-8));
  auto flipped = paired_one_sided(b, a);
  CHECK(flipped.p_value == doctest::Approx(1 - t.p_value));
  CHECK_THROWS_AS(paired_one_sided(std::vector<double>{1}, std::vector<double>{2}), InvalidArgument);
}
