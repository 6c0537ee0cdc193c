#include "glinkx/theory.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "glinkx/error.hpp"
#include "glinkx/nn.hpp"

namespace glinkx {

CsrGraph ring_lattice(std::size_t n, std::size_t k) {
  if (k == 0 || k % 2) throw InvalidArgument("ring degree must be a positive even number");
  if (k >= n) throw InvalidArgument("infeasible degree: k >= n");
  std::vector<Edge> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 1; s <= k / 2; ++s) {
      edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + s) % n)});
      edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + n - s) % n)});
    }
  return build_graph(edges, n, false, true);
}

TheoryInstance make_theory_instance(CsrGraph g, Matrix P, Matrix z, std::uint64_t label_seed) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (P.rows() != n || z.rows() != n) throw DimensionError("P/z rows != node count");
  TheoryInstance inst;
  inst.Q = Matrix::Zero(n, P.cols());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.out_neighbors(i);
    if (nb.empty()) throw InvalidArgument("theory instance needs every node to have a neighbor");
    for (NodeId k : nb) inst.Q.row(i) += P.row(k);
    inst.Q.row(i) /= static_cast<double>(nb.size());
  }
  const Eigen::Index c = P.cols(), r = z.cols();
  inst.xi.resize(n, 1 + r + c);
  inst.xi.col(0).setOnes();
  inst.xi.middleCols(1, r) = z;
  inst.xi.rightCols(c) = inst.Q.array().max(kLogQFloor).log().matrix();
  inst.graph = std::move(g);
  inst.P = std::move(P);
  inst.z = std::move(z);
  resample_labels(inst, label_seed);
  return inst;
}

void resample_labels(TheoryInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  inst.y.assign(static_cast<std::size_t>(inst.P.rows()), 0);
  for (Eigen::Index i = 0; i < inst.P.rows(); ++i) {
    double r = u(rng), acc = 0;
    Eigen::Index j = 0;
    for (; j + 1 < inst.P.cols(); ++j) {
      acc += inst.P(i, j);
      if (r < acc) break;
    }
    inst.y[static_cast<std::size_t>(i)] = static_cast<int>(j);
  }
}

TheoryInstance generate_theory_instance(const TheoryConfig& cfg) {
  if (cfg.c < 2) throw InvalidArgument("need c >= 2");
  if (cfg.enforce_min_degree && cfg.k <= cfg.c * cfg.c)
    throw InvalidArgument("minimum degree k=" + std::to_string(cfg.k) + " must exceed c^2=" +
                          std::to_string(cfg.c * cfg.c));
  CsrGraph g = ring_lattice(cfg.n, cfg.k);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto c = static_cast<Eigen::Index>(cfg.c);
  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, cfg.signal);
  Matrix B(c, 2);
  for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = gauss(rng);
  Matrix z(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    z(i, 0) = std::cos(a);
    z(i, 1) = std::sin(a);
  }
  Matrix P = softmax_rows(z * B.transpose());
  if (cfg.one_hot_p) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      P.row(i).maxCoeff(&best);
      P.row(i).setZero();
      P(i, best) = 1.0;
    }
  }
  TheoryInstance inst = make_theory_instance(std::move(g), std::move(P), std::move(z), rng());
  inst.B = std::move(B);
  return inst;
}

Matrix counting_estimator(const CsrGraph& g, std::span<const int> y, std::size_t c) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix q = Matrix::Zero(n, static_cast<Eigen::Index>(c));
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.out_neighbors(i);
    for (NodeId k : nb)
      if (k != i) q(i, y[k]) += 1.0;
    const auto cnt = std::count_if(nb.begin(), nb.end(), [&](NodeId k) { return k != i; });
    if (cnt) q.row(i) /= static_cast<double>(cnt);
  }
  return q;
}

EstimatorError estimator_error(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw DimensionError("estimator and truth differ in shape");
  const Matrix d = (est - truth).cwiseAbs();
  EstimatorError e;
  e.mean_abs = d.mean();
  e.mean_sup = d.rowwise().maxCoeff().mean();
  return e;
}

std::vector<CountingRow> counting_estimator_error(const TheoryConfig& base,
                                                  std::span<const std::size_t> ks,
                                                  std::size_t trials) {
  if (trials == 0) throw InvalidArgument("need at least one trial");
  std::vector<CountingRow> rows;
  for (std::size_t k : ks) {
    TheoryConfig cfg = base;
    cfg.k = k;
    TheoryInstance inst = generate_theory_instance(cfg);
    double acc = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      resample_labels(inst, base.seed * 1000003 + k * 7919 + t);
      acc += estimator_error(counting_estimator(inst.graph, inst.y, base.c), inst.Q).mean_sup;
    }
    rows.push_back({k, acc / static_cast<double>(trials)});
  }
  return rows;
}

double loglog_slope(std::span<const CountingRow> rows) {
  if (rows.size() < 2) throw InvalidArgument("slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.k)), y = std::log(r.mean_sup_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(rows.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Matrix softmax_linear(const Matrix& W, const Matrix& xi) {
  return softmax_rows(xi * W.transpose());
}

// ---------------------------------------------------------------------------

namespace {

double mean_xent(const Matrix& W, const Matrix& xi, const Matrix& T) {
  const Matrix p = softmax_linear(W, xi);
  return -(T.array() * p.array().max(kLogClamp).log()).sum() / static_cast<double>(xi.rows());
}

// w += eta * (t - p sum(t)) outer xi_i
void ascend_row(Matrix& W, const Matrix& xi, Eigen::Index i, const RowVector& t, double eta) {
  RowVector logits = xi.row(i) * W.transpose();
  logits.array() -= logits.maxCoeff();
  RowVector p = logits.array().exp().matrix();
  p /= p.sum();
  const RowVector d = t - p * t.sum();
  W.noalias() += eta * d.transpose() * xi.row(i);
}

double step_size(double scale, std::size_t n) {
  return scale * std::log(static_cast<double>(n)) / static_cast<double>(n);
}

}  // namespace

QSgdResult parametric_q_sgd(const TheoryInstance& inst, const QSgdConfig& cfg) {
  const std::size_t n = inst.graph.num_nodes();
  const std::size_t steps = cfg.steps ? cfg.steps : n;
  const auto c = inst.P.cols();
  const Matrix qhat = counting_estimator(inst.graph, inst.y, static_cast<std::size_t>(c));
  QSgdResult out;
  out.lr = step_size(cfg.lr_scale, n);
  const Matrix zero = Matrix::Zero(c, inst.xi.cols());
  const double initial = mean_xent(zero, inst.xi, qhat);
  const std::size_t check_every = std::max<std::size_t>(1, steps / 20);
  for (;;) {
    Matrix theta = zero;
    Rng rng(cfg.seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(n) - 1);
    bool diverged = false;
    for (std::size_t t = 1; t <= steps; ++t) {
      const Eigen::Index i = pick(rng);
      ascend_row(theta, inst.xi, i, qhat.row(i), out.lr);
      if (t % check_every == 0 || t == steps) {
        const double l = mean_xent(theta, inst.xi, qhat);
        if (!std::isfinite(l) || l > 10 * initial) {
          diverged = true;
          break;
        }
      }
    }
    if (!diverged) {
      out.theta = std::move(theta);
      break;
    }
    if (out.restarts == cfg.max_restarts)
      throw NumericalError("parametric q SGD diverged after " + std::to_string(cfg.max_restarts) +
                           " restarts");
    ++out.restarts;
    out.lr /= 2;
  }
  out.error = estimator_error(softmax_linear(out.theta, inst.xi), inst.Q);
  out.counting_error = estimator_error(qhat, inst.Q);
  return out;
}

double g_objective(const Matrix& W, const Matrix& xi, const Matrix& T) {
  return -mean_xent(W, xi, T);
}

Matrix g_gradient(const Matrix& W, const Matrix& xi, const Matrix& T) {
  const Matrix p = softmax_linear(W, xi);
  const Eigen::VectorXd mass = T.rowwise().sum();
  const Matrix d = T - (p.array().colwise() * mass.array()).matrix();
  return d.transpose() * xi / static_cast<double>(xi.rows());
}

double g_optimum(const Matrix& P) {
  double s = 0;
  for (Eigen::Index i = 0; i < P.size(); ++i) {
    const double v = P.data()[i];
    if (v > 0) s += v * std::log(v);
  }
  return s / static_cast<double>(P.rows());
}

Matrix surrogate_targets(const TheoryInstance& inst, const Matrix& theta1) {
  const Matrix q = softmax_linear(theta1, inst.xi);
  Matrix out = Matrix::Zero(q.rows(), q.cols());
  for (NodeId i = 0; i < inst.graph.num_nodes(); ++i) {
    auto nb = inst.graph.out_neighbors(i);
    for (NodeId k : nb) out.row(i) += q.row(k);
    out.row(i) /= static_cast<double>(nb.size());
  }
  return out;
}

Matrix naive_sgd(const TheoryInstance& inst, Matrix w, std::size_t steps, double lr,
                 std::uint64_t seed) {
  const auto n = inst.xi.rows();
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  RowVector t = RowVector::Zero(inst.P.cols());
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::Index i = pick(rng);
    t.setZero();
    t[inst.y[static_cast<std::size_t>(i)]] = 1.0;
    ascend_row(w, inst.xi, i, t, lr);
  }
  return w;
}

PhaseResult two_phase_sgd(const TheoryInstance& inst, const Matrix& theta1,
                          const PhaseConfig& cfg) {
  if (cfg.lambda < 0 || cfg.lambda > 1) throw InvalidArgument("lambda must lie in [0,1]");
  const std::size_t n = inst.graph.num_nodes();
  const std::size_t steps = cfg.phase2_steps ? cfg.phase2_steps : n;
  const double eta = step_size(cfg.lr_scale, n);
  const double best = g_optimum(inst.P);
  const Matrix phat = surrogate_targets(inst, theta1);
  const Matrix zero = Matrix::Zero(inst.P.cols(), inst.xi.cols());

  PhaseResult r;
  r.naive_gap = best - g_objective(naive_sgd(inst, zero, steps, eta, cfg.seed), inst.xi, inst.P);

  const double L = 0.5 * inst.xi.rowwise().squaredNorm().maxCoeff();
  Matrix w = zero;
  for (std::size_t s = 0; s < cfg.phase1_steps; ++s) {
    w += g_gradient(w, inst.xi, phat) / L;
    r.phase1_surrogate.push_back(g_objective(w, inst.xi, phat));
  }
  r.phase1_gap = best - g_objective(w, inst.xi, inst.P);
  r.phase1_w = w;

  // Same sampling stream as naive_sgd, so lambda = 0 reproduces it exactly.
  Rng rng(cfg.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, inst.xi.rows() - 1);
  RowVector t = RowVector::Zero(inst.P.cols());
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::Index i = pick(rng);
    const Matrix full = cfg.lambda > 0 ? g_gradient(w, inst.xi, phat) : Matrix();
    t.setZero();
    t[inst.y[static_cast<std::size_t>(i)]] = 1.0;
    ascend_row(w, inst.xi, i, t, eta * (1 - cfg.lambda));
    if (cfg.lambda > 0) w += eta * cfg.lambda * full;
    if (cfg.record_surrogate) r.phase2_surrogate.push_back(g_objective(w, inst.xi, phat));
  }
  r.two_phase_gap = best - g_objective(w, inst.xi, inst.P);
  return r;
}

double tune_lambda(std::span<const TheoryInstance> instances, std::span<const Matrix> thetas,
                   std::span<const double> grid, PhaseConfig cfg) {
  if (grid.empty() || instances.size() != thetas.size() || instances.empty())
    throw InvalidArgument("tune_lambda: empty grid or mismatched instances");
  double best_lambda = grid[0], best_gap = INFINITY;
  for (double lam : grid) {
    cfg.lambda = lam;
    double gap = 0;
    for (std::size_t k = 0; k < instances.size(); ++k)
      gap += two_phase_sgd(instances[k], thetas[k], cfg).two_phase_gap;
    if (gap < best_gap) {
      best_gap = gap;
      best_lambda = lam;
    }
  }
  return best_lambda;
}

PairedTest paired_one_sided(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("paired test needs >= 2 pairs");
  PairedTest r;
  r.n = a.size();
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double mean = 0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double ss = 0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(d.size() - 1));
  r.mean_diff = mean;
  if (sd == 0) {
    r.t = mean > 0 ? INFINITY : mean < 0 ? -INFINITY : 0;
    r.p_value = mean > 0 ? 0 : 1;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
  boost::math::students_t dist(static_cast<double>(d.size() - 1));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

}  // namespace glinkx
