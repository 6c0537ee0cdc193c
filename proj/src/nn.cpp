#include "glinkx/nn.hpp"

#include <cmath>

#include "glinkx/error.hpp"

namespace glinkx {

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::ego: return "ego";
    case Branch::position: return "position";
    case Branch::propagated: return "propagated";
  }
  return "?";
}

std::size_t parameter_count(const Params& p) {
  std::size_t n = 0;
  for (const auto& l : p) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Params zeros_like(const Params& p) {
  Params out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i].weight = Matrix::Zero(p[i].weight.rows(), p[i].weight.cols());
    out[i].bias = RowVector::Zero(p[i].bias.size());
  }
  return out;
}

std::vector<double> flatten(const Params& p) {
  std::vector<double> out;
  out.reserve(parameter_count(p));
  for (const auto& l : p) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

std::uint64_t digest(const Params& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : p) {
    h = fnv1a64(std::span<const double>(l.weight.data(), static_cast<std::size_t>(l.weight.size())), h);
    h = fnv1a64(std::span<const double>(l.bias.data(), static_cast<std::size_t>(l.bias.size())), h);
  }
  return h;
}

bool all_finite(const Params& p) {
  for (const auto& l : p)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

// ---------------------------------------------------------------------------

bool NetSpec::uses(Branch b) const {
  switch (b) {
    case Branch::ego: return use_ego;
    case Branch::position: return use_position;
    case Branch::propagated: return use_propagated;
  }
  return false;
}

int NetSpec::branch_count() const {
  return int(use_ego) + int(use_position) + int(use_propagated);
}

void NetSpec::validate() const {
  if (branch_count() == 0) throw InvalidArgument("network has no input branch");
  if (classes < 2) throw InvalidArgument("network needs at least 2 classes");
  if (hidden == 0) throw InvalidArgument("hidden width must be positive");
  if (use_ego && ego_dim == 0) throw InvalidArgument("ego branch with zero input width");
  if (use_position && position_dim == 0)
    throw InvalidArgument("position branch with zero input width");
  for (int layers : {ego_layers, position_layers, propagated_layers, agg_layers})
    if (layers < 1) throw InvalidArgument("every MLP needs at least one layer");
  if (dropout < 0 || dropout >= 1) throw InvalidArgument("dropout must lie in [0,1)");
}

NetInputs NetInputs::gather(std::span<const NodeId> rows, const NetSpec& spec) const {
  NetInputs out;
  if (spec.use_ego) out.ego = gather_rows(ego, rows);
  if (spec.use_position) {
    if (spec.position_sparse)
      out.position_sparse = gather_rows(position_sparse, rows);
    else
      out.position = gather_rows(position, rows);
  }
  if (spec.use_propagated) out.propagated = gather_rows(propagated, rows);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Linear l;
  l.weight.resize(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  l.bias.resize(static_cast<Eigen::Index>(out));
  for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = u(rng);
  return l;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? scale : 0.0;
  return m;
}

Matrix relu_gate(const Matrix& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

template <class Input>
Matrix chain_forward(std::span<const Linear> layers, const Input& input,
                     double dropout, bool training, Rng* rng, ChainTrace& tr) {
  const std::size_t count = layers.size();
  tr.inputs.assign(count, Matrix());
  tr.pre.assign(count, Matrix());
  tr.drop.assign(count, Matrix());
  Matrix z;
  for (std::size_t l = 0; l < count; ++l) {
    if (l == 0)
      z = input * layers[0].weight;
    else
      z = tr.inputs[l] * layers[l].weight;
    z.rowwise() += layers[l].bias;
    if (l + 1 == count) break;
    Matrix a = z.cwiseMax(0.0);
    tr.pre[l] = std::move(z);
    if (training && dropout > 0) {
      tr.drop[l] = dropout_mask(a.rows(), a.cols(), dropout, *rng);
      a = a.cwiseProduct(tr.drop[l]);
    }
    tr.inputs[l + 1] = std::move(a);
  }
  return z;
}

// Accumulates layer gradients into `grads` and returns d(loss)/d(input)
// when requested (otherwise an empty matrix).
template <class Input>
Matrix chain_backward(std::span<const Linear> layers, const Input& input,
                      const ChainTrace& tr, Matrix d, std::span<Linear> grads,
                      bool need_input_grad) {
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (k + 1 < layers.size()) {
      if (tr.drop[k].size() != 0) d = d.cwiseProduct(tr.drop[k]);
      d = d.cwiseProduct(relu_gate(tr.pre[k]));
    }
    if (k == 0)
      grads[0].weight = input.transpose() * d;
    else
      grads[k].weight = tr.inputs[k].transpose() * d;
    grads[k].bias = d.colwise().sum();
    if (k > 0 || need_input_grad)
      d = d * layers[k].weight.transpose();
    else
      d = Matrix();
  }
  return d;
}

}  // namespace

GlinkxNet::GlinkxNet(NetSpec spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  const std::size_t h = spec_.hidden;
  auto add_chain = [&](std::size_t in, std::size_t out, int layers) {
    for (int l = 0; l < layers; ++l) {
      const std::size_t a = l == 0 ? in : h;
      const std::size_t b = l + 1 == layers ? out : h;
      params_.push_back(make_linear(a, b, rng));
    }
  };
  const std::array<std::size_t, 3> in_dims = {spec_.ego_dim, spec_.position_dim, spec_.classes};
  const std::array<int, 3> depth = {spec_.ego_layers, spec_.position_layers, spec_.propagated_layers};
  for (Branch b : kAllBranches) {
    const auto i = static_cast<std::size_t>(b);
    branch_first_[i] = params_.size();
    branch_count_[i] = 0;
    if (!spec_.uses(b)) continue;
    add_chain(in_dims[i], h, depth[i]);
    branch_count_[i] = static_cast<std::size_t>(depth[i]);
  }
  combine_index_ = params_.size();
  params_.push_back(make_linear(h * static_cast<std::size_t>(spec_.branch_count()), h, rng));
  add_chain(h, spec_.classes, spec_.agg_layers);
}

std::pair<std::size_t, std::size_t> GlinkxNet::branch_layers(Branch b) const {
  const auto i = static_cast<std::size_t>(b);
  return {branch_first_[i], branch_count_[i]};
}

std::pair<std::size_t, std::size_t> GlinkxNet::agg_layers() const {
  return {combine_index_ + 1, params_.size() - combine_index_ - 1};
}

void GlinkxNet::check_inputs(const NetInputs& in) const {
  Eigen::Index rows = -1;
  auto check = [&](Eigen::Index r, Eigen::Index c, std::size_t want, const char* name) {
    if (static_cast<std::size_t>(c) != want)
      throw DimensionError(std::string(name) + " input has " + std::to_string(c) +
                           " columns, network expects " + std::to_string(want));
    if (rows >= 0 && r != rows)
      throw DimensionError(std::string(name) + " input row count differs from other branches");
    rows = r;
  };
  if (spec_.use_ego) {
    check(in.ego.rows(), in.ego.cols(), spec_.ego_dim, "ego");
    if (!in.ego.allFinite()) throw NumericalError("non-finite ego input");
  }
  if (spec_.use_position) {
    if (spec_.position_sparse) {
      check(in.position_sparse.rows(), in.position_sparse.cols(), spec_.position_dim, "position");
    } else {
      check(in.position.rows(), in.position.cols(), spec_.position_dim, "position");
      if (!in.position.allFinite()) throw NumericalError("non-finite position input");
    }
  }
  if (spec_.use_propagated) {
    check(in.propagated.rows(), in.propagated.cols(), spec_.classes, "propagated");
    if (!in.propagated.allFinite()) throw NumericalError("non-finite propagated input");
  }
}

ForwardResult GlinkxNet::forward(const NetInputs& in, bool training, Rng* rng) const {
  check_inputs(in);
  if (training && spec_.dropout > 0 && rng == nullptr)
    throw InvalidArgument("training-mode forward with dropout needs an rng");
  const auto h = static_cast<Eigen::Index>(spec_.hidden);
  ForwardResult out;
  ForwardCache& cache = out.cache;
  std::vector<Branch> used;
  for (Branch b : kAllBranches)
    if (spec_.uses(b)) used.push_back(b);

  Eigen::Index batch = 0;
  for (Branch b : used) {
    const auto i = static_cast<std::size_t>(b);
    std::span<const Linear> layers(params_.data() + branch_first_[i], branch_count_[i]);
    Matrix o;
    if (b == Branch::ego)
      o = chain_forward(layers, in.ego, 0.0, training, rng, cache.branches[i]);
    else if (b == Branch::position && spec_.position_sparse)
      o = chain_forward(layers, in.position_sparse, 0.0, training, rng, cache.branches[i]);
    else if (b == Branch::position)
      o = chain_forward(layers, in.position, 0.0, training, rng, cache.branches[i]);
    else
      o = chain_forward(layers, in.propagated, 0.0, training, rng, cache.branches[i]);
    batch = o.rows();
    cache.branch_out[i] = std::move(o);
  }

  Matrix concat(batch, h * static_cast<Eigen::Index>(used.size()));
  for (std::size_t k = 0; k < used.size(); ++k)
    concat.middleCols(static_cast<Eigen::Index>(k) * h, h) =
        cache.branch_out[static_cast<std::size_t>(used[k])];
  if (training && spec_.dropout > 0) {
    cache.concat_mask = dropout_mask(concat.rows(), concat.cols(), spec_.dropout, *rng);
    cache.concat_dropped = concat.cwiseProduct(cache.concat_mask);
  } else {
    cache.concat_dropped = std::move(concat);
  }

  const Linear& comb = params_[combine_index_];
  Matrix u = cache.concat_dropped * comb.weight;
  u.rowwise() += comb.bias;
  for (Branch b : used) u += cache.branch_out[static_cast<std::size_t>(b)];
  cache.combine_pre = std::move(u);
  const Matrix z = cache.combine_pre.cwiseMax(0.0);

  auto [agg_first, agg_count] = agg_layers();
  std::span<const Linear> agg(params_.data() + agg_first, agg_count);
  out.logits = chain_forward(agg, z, spec_.dropout, training, rng, cache.agg);
  out.probs = softmax_rows(out.logits);
  return out;
}

Params GlinkxNet::backward(const ForwardResult& fwd, const NetInputs& in,
                           const Matrix& dlogits) const {
  const ForwardCache& cache = fwd.cache;
  if (dlogits.rows() != fwd.logits.rows() || dlogits.cols() != fwd.logits.cols())
    throw DimensionError("dlogits shape differs from logits");
  const auto h = static_cast<Eigen::Index>(spec_.hidden);
  Params grads(params_.size());
  std::span<Linear> g(grads);

  const Matrix z = cache.combine_pre.cwiseMax(0.0);
  auto [agg_first, agg_count] = agg_layers();
  Matrix dz = chain_backward(std::span<const Linear>(params_.data() + agg_first, agg_count), z,
                             cache.agg, dlogits, g.subspan(agg_first, agg_count), true);
  const Matrix du = dz.cwiseProduct(relu_gate(cache.combine_pre));

  const Linear& comb = params_[combine_index_];
  grads[combine_index_].weight = cache.concat_dropped.transpose() * du;
  grads[combine_index_].bias = du.colwise().sum();
  Matrix dconcat = du * comb.weight.transpose();
  if (cache.concat_mask.size() != 0) dconcat = dconcat.cwiseProduct(cache.concat_mask);

  Eigen::Index col = 0;
  for (Branch b : kAllBranches) {
    if (!spec_.uses(b)) continue;
    const auto i = static_cast<std::size_t>(b);
    Matrix dh = dconcat.middleCols(col, h) + du;
    col += h;
    std::span<const Linear> layers(params_.data() + branch_first_[i], branch_count_[i]);
    auto gl = g.subspan(branch_first_[i], branch_count_[i]);
    if (b == Branch::ego)
      chain_backward(layers, in.ego, cache.branches[i], std::move(dh), gl, false);
    else if (b == Branch::position && spec_.position_sparse)
      chain_backward(layers, in.position_sparse, cache.branches[i], std::move(dh), gl, false);
    else if (b == Branch::position)
      chain_backward(layers, in.position, cache.branches[i], std::move(dh), gl, false);
    else
      chain_backward(layers, in.propagated, cache.branches[i], std::move(dh), gl, false);
  }
  return grads;
}

Matrix GlinkxNet::predict(const NetInputs& in) const {
  return forward(in, false).probs;
}

// ---------------------------------------------------------------------------

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

LossResult soft_cross_entropy(const Matrix& probs, const Matrix& targets) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
    throw DimensionError("soft_cross_entropy: probs and targets differ in shape");
  if (probs.rows() == 0) throw InvalidArgument("soft_cross_entropy: empty batch");
  const double batch = static_cast<double>(probs.rows());
  LossResult r;
  r.loss = -(targets.array() * probs.array().max(kLogClamp).log()).sum() / batch;
  const Eigen::VectorXd mass = targets.rowwise().sum();
  r.dlogits = (probs.array().colwise() * mass.array() - targets.array()).matrix() / batch;
  return r;
}

// ---------------------------------------------------------------------------

AdamW::AdamW(const Params& like, AdamWConfig cfg)
    : cfg_(cfg), m_(zeros_like(like)), v_(zeros_like(like)) {}

void AdamW::step(Params& params, const Params& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw DimensionError("AdamW: parameter layout changed");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].weight.rows() != m_[i].weight.rows() ||
        grads[i].weight.cols() != m_[i].weight.cols() ||
        grads[i].bias.size() != m_[i].bias.size())
      throw DimensionError("AdamW: gradient block " + std::to_string(i) + " has wrong shape");
  }
  if (!all_finite(grads)) throw NumericalError("non-finite gradient; epoch aborted");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto update = [&](double* p, const double* g, double* m, double* v, Eigen::Index n) {
    for (Eigen::Index k = 0; k < n; ++k) {
      p[k] -= cfg_.lr * cfg_.weight_decay * p[k];
      m[k] = cfg_.beta1 * m[k] + (1 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1 - cfg_.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weight.data(), grads[i].weight.data(), m_[i].weight.data(),
           v_[i].weight.data(), params[i].weight.size());
    update(params[i].bias.data(), grads[i].bias.data(), m_[i].bias.data(),
           v_[i].bias.data(), params[i].bias.size());
  }
}

}  // namespace glinkx
