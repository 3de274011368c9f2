#include "sumreward/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sumreward::reward {

namespace {

void require_dims(const Vector& input, const MLPParams& params) {
  if (static_cast<std::size_t>(input.size()) != params.input_dim()) {
    throw std::invalid_argument("mlp: input dimension " + std::to_string(input.size()) +
                                " does not match parameters (" +
                                std::to_string(params.input_dim()) + ")");
  }
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

double log1p_exp(double x) {
  // log(1 + e^x) for any finite x.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

MLPParams MLPParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  const auto in = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  return {Matrix::Zero(h, in), Vector::Zero(h), Vector::Zero(h), 0.0};
}

MLPParams MLPParams::initialize(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw std::invalid_argument("MLPParams: dimensions must be positive");
  }
  MLPParams p = zeros(input_dim, hidden_dim);
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (Eigen::Index r = 0; r < p.w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = rng.uniform(-in_scale, in_scale);
  }
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2[i] = rng.uniform(-out_scale, out_scale);
  return p;
}

std::size_t MLPParams::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1);
}

bool MLPParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2);
}

Vector flatten(const MLPParams& p) {
  Vector flat(static_cast<Eigen::Index>(p.parameter_count()));
  Eigen::Index at = 0;
  flat.segment(at, p.w1.size()) = Eigen::Map<const Vector>(p.w1.data(), p.w1.size());
  at += p.w1.size();
  flat.segment(at, p.b1.size()) = p.b1;
  at += p.b1.size();
  flat.segment(at, p.w2.size()) = p.w2;
  at += p.w2.size();
  flat[at] = p.b2;
  return flat;
}

void unflatten(const Vector& flat, MLPParams& p) {
  if (static_cast<std::size_t>(flat.size()) != p.parameter_count()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  Eigen::Index at = 0;
  Eigen::Map<Vector>(p.w1.data(), p.w1.size()) = flat.segment(at, p.w1.size());
  at += p.w1.size();
  p.b1 = flat.segment(at, p.b1.size());
  at += p.b1.size();
  p.w2 = flat.segment(at, p.w2.size());
  at += p.w2.size();
  p.b2 = flat[at];
}

double mlp_forward(const Vector& input, const MLPParams& params) {
  require_dims(input, params);
  const Vector hidden = (params.w1 * input + params.b1).cwiseMax(0.0);
  return params.w2.dot(hidden) + params.b2;
}

double mlp_forward(const Vector& doc_emb, const Vector& sum_emb, const MLPParams& params) {
  return mlp_forward(concat(doc_emb, sum_emb), params);
}

void mlp_backward(const Vector& input, const MLPParams& params, double upstream,
                  MLPParams& grad) {
  require_dims(input, params);
  const Vector pre = params.w1 * input + params.b1;
  const Vector hidden = pre.cwiseMax(0.0);
  grad.b2 += upstream;
  grad.w2 += upstream * hidden;
  // relu'(z) taken as 0 at z = 0.
  const Vector delta = (pre.array() > 0.0).cast<double>().matrix().cwiseProduct(upstream * params.w2);
  grad.b1 += delta;
  grad.w1.noalias() += delta * input.transpose();
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("mse_loss: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("mse_loss: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = targets[i] - predictions[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

double preference_probability(double r_i, double r_j) {
  if (!std::isfinite(r_i) || !std::isfinite(r_j)) {
    throw std::invalid_argument("preference_probability: non-finite reward");
  }
  const double d = r_i - r_j;
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

double preference_nll(double r_better, double r_worse) {
  if (!std::isfinite(r_better) || !std::isfinite(r_worse)) {
    throw std::invalid_argument("preference_nll: non-finite reward");
  }
  return log1p_exp(r_worse - r_better);
}

double ce_loss(std::span<const corpus::PreferencePair> pairs,
               const std::map<SummaryKey, double>& scores) {
  if (pairs.empty()) throw std::invalid_argument("ce_loss: no preference pairs");
  auto lookup = [&scores](const std::string& id, std::size_t idx) {
    auto it = scores.find({id, idx});
    if (it == scores.end()) {
      throw std::invalid_argument("ce_loss: missing score for " + id + "#" + std::to_string(idx));
    }
    return it->second;
  };
  double sum = 0.0;
  for (const auto& p : pairs) {
    sum += preference_nll(lookup(p.article_id, p.better_index), lookup(p.article_id, p.worse_index));
  }
  return sum / static_cast<double>(pairs.size());
}

namespace {

// Forward pass over the columns of `inputs`; fills the pre-activations.
Vector batch_forward(const Matrix& inputs, const MLPParams& params, Matrix& pre) {
  if (static_cast<std::size_t>(inputs.rows()) != params.input_dim()) {
    throw std::invalid_argument("mlp: input dimension " + std::to_string(inputs.rows()) +
                                " does not match parameters (" +
                                std::to_string(params.input_dim()) + ")");
  }
  pre.noalias() = params.w1 * inputs;
  pre.colwise() += params.b1;
  return ((params.w2.transpose() * pre.cwiseMax(0.0)).transpose().array() + params.b2).matrix();
}

// Overwrites grad with sum_c upstream[c] * d(output_c)/d(params).
void batch_backward(const Matrix& inputs, const Matrix& pre, const MLPParams& params,
                    const Vector& upstream, MLPParams& grad) {
  grad = MLPParams::zeros(params.input_dim(), params.hidden_dim());
  grad.b2 = upstream.sum();
  grad.w2.noalias() = pre.cwiseMax(0.0) * upstream;
  Matrix delta = params.w2 * upstream.transpose();
  delta.array() *= (pre.array() > 0.0).cast<double>();
  grad.b1 = delta.rowwise().sum();
  grad.w1.noalias() = delta * inputs.transpose();
}

}  // namespace

double mse_objective(const MLPParams& params, std::span<const RegressionExample> batch,
                     MLPParams* grad) {
  if (batch.empty()) throw std::invalid_argument("mse_objective: empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  Matrix inputs(static_cast<Eigen::Index>(params.input_dim()), b);
  Vector targets(b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const auto& ex = batch[static_cast<std::size_t>(c)];
    if (static_cast<std::size_t>(ex.input.size()) != params.input_dim()) {
      throw std::invalid_argument("mse_objective: input dimension mismatch");
    }
    inputs.col(c) = ex.input;
    targets[c] = ex.target;
  }
  Matrix pre;
  const Vector residual = batch_forward(inputs, params, pre) - targets;
  const double scale = 1.0 / static_cast<double>(b);
  if (grad) batch_backward(inputs, pre, params, (2.0 * scale) * residual, *grad);
  return residual.squaredNorm() * scale;
}

double ce_objective(const MLPParams& params, std::span<const PairExample> batch, MLPParams* grad) {
  if (batch.empty()) throw std::invalid_argument("ce_objective: empty batch");
  const auto b = static_cast<Eigen::Index>(batch.size());
  // Columns [0, b) hold the preferred summaries, [b, 2b) their counterparts.
  Matrix inputs(static_cast<Eigen::Index>(params.input_dim()), 2 * b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const auto& ex = batch[static_cast<std::size_t>(c)];
    if (static_cast<std::size_t>(ex.better.size()) != params.input_dim() ||
        static_cast<std::size_t>(ex.worse.size()) != params.input_dim()) {
      throw std::invalid_argument("ce_objective: input dimension mismatch");
    }
    inputs.col(c) = ex.better;
    inputs.col(b + c) = ex.worse;
  }
  Matrix pre;
  const Vector out = batch_forward(inputs, params, pre);
  const double scale = 1.0 / static_cast<double>(b);
  double loss = 0.0;
  Vector upstream(2 * b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const double rb = out[c];
    const double rw = out[b + c];
    loss += preference_nll(rb, rw);
    // d/d(rb) of -log sigma(rb - rw) is -(1 - P).
    const double miss = 1.0 - preference_probability(rb, rw);
    upstream[c] = -miss * scale;
    upstream[b + c] = miss * scale;
  }
  if (grad) batch_backward(inputs, pre, params, upstream, *grad);
  return loss * scale;
}

Adam::Adam(std::size_t parameter_count, AdamConfig cfg)
    : cfg_(cfg),
      m_(Vector::Zero(static_cast<Eigen::Index>(parameter_count))),
      v_(Vector::Zero(static_cast<Eigen::Index>(parameter_count))) {
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("Adam: learning rate must be positive");
}

void Adam::step(Vector& params, const Vector& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("Adam::step: size mismatch");
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
}

}  // namespace sumreward::reward
