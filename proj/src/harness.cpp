#include "glinkx/harness.hpp"

#include "glinkx/error.hpp"
#include "glinkx/nn.hpp"

namespace glinkx {

SlopeCheck counting_slope_check(std::size_t n, std::size_t c, std::size_t trials, std::uint64_t seed) {
  TheoryConfig base;
  base.n = n;
  base.c = c;
  base.enforce_min_degree = false;
  base.seed = seed;
  std::vector<std::size_t> ks;
  for (std::size_t k = 8; k <= 1024; k *= 2) ks.push_back(k);
  if (ks.back() >= n) throw InvalidArgument("slope check needs n > 1024");
  SlopeCheck r;
  r.rows = counting_estimator_error(base, ks, trials);
  r.slope = loglog_slope(r.rows);
  return r;
}

namespace {

struct Prepared {
  TheoryInstance inst;
  QSgdResult q;
};

Prepared prepare(const TheoryConfig& base, std::uint64_t seed, QSgdConfig sgd) {
  TheoryConfig tc = base;
  tc.seed = seed;
  Prepared p{generate_theory_instance(tc), {}};
  sgd.seed = derive_seed(seed, 11);
  p.q = parametric_q_sgd(p.inst, sgd);
  return p;
}

}  // namespace

std::vector<EstimatorDuel> parametric_vs_counting(const TheoryConfig& base,
                                                  std::span<const std::uint64_t> seeds,
                                                  const QSgdConfig& sgd) {
  std::vector<EstimatorDuel> out;
  for (std::uint64_t s : seeds) {
    const Prepared p = prepare(base, s, sgd);
    out.push_back({s, p.q.error.mean_sup, p.q.counting_error.mean_sup, p.q.lr, p.q.restarts});
  }
  return out;
}

TwoPhaseCheck two_phase_check(const TheoryConfig& base, std::span<const std::uint64_t> seeds,
                              std::uint64_t tune_seed, std::span<const double> grid,
                              const QSgdConfig& sgd, PhaseConfig phase) {
  TwoPhaseCheck r;
  {
    const Prepared t = prepare(base, tune_seed, sgd);
    phase.seed = derive_seed(tune_seed, 12);
    const TheoryInstance* inst = &t.inst;
    const Matrix* theta = &t.q.theta;
    r.lambda = tune_lambda({inst, 1}, {theta, 1}, grid, phase);
  }
  phase.lambda = r.lambda;
  for (std::uint64_t s : seeds) {
    if (s == tune_seed) throw InvalidArgument("the tuning seed must be held out");
    const Prepared p = prepare(base, s, sgd);
    phase.seed = derive_seed(s, 12);
    const PhaseResult pr = two_phase_sgd(p.inst, p.q.theta, phase);
    r.seeds.push_back(s);
    r.naive_gap.push_back(pr.naive_gap);
    r.two_phase_gap.push_back(pr.two_phase_gap);
  }
  r.test = paired_one_sided(r.naive_gap, r.two_phase_gap);
  return r;
}

}  // namespace glinkx
