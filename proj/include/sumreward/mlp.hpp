#pragma once

#include "sumreward/common.hpp"
#include "sumreward/corpus.hpp"
#include "sumreward/rng.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>

namespace sumreward::reward {

// One hidden ReLU layer, linear scalar output:
//   w2 . relu(W1 x + b1) + b2,   x = [doc; summary].
// Gradients use the same layout.
struct MLPParams {
  Matrix w1;  // hidden x input
  Vector b1;  // hidden
  Vector w2;  // hidden
  double b2 = 0.0;

  static MLPParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  // W1 and w2 uniform in +-1/sqrt(fan_in); biases zero.
  static MLPParams initialize(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

Vector flatten(const MLPParams& p);
void unflatten(const Vector& flat, MLPParams& p);

double mlp_forward(const Vector& input, const MLPParams& params);
double mlp_forward(const Vector& doc_emb, const Vector& sum_emb, const MLPParams& params);

// grad += upstream * d(output)/d(params) at `input`.
void mlp_backward(const Vector& input, const MLPParams& params, double upstream, MLPParams& grad);

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

// exp(r_i) / (exp(r_i) + exp(r_j)), evaluated as a logistic of r_i - r_j.
double preference_probability(double r_i, double r_j);
// -log preference_probability(r_better, r_worse) without overflow.
double preference_nll(double r_better, double r_worse);

using SummaryKey = std::pair<std::string, std::size_t>;
double ce_loss(std::span<const corpus::PreferencePair> pairs,
               const std::map<SummaryKey, double>& scores);

struct RegressionExample {
  Vector input;
  double target = 0.0;
};

struct PairExample {
  Vector better;
  Vector worse;
};

// Batch objectives. When `grad` is non-null it is overwritten with the exact
// gradient of the returned loss.
double mse_objective(const MLPParams& params, std::span<const RegressionExample> batch,
                     MLPParams* grad);
double ce_objective(const MLPParams& params, std::span<const PairExample> batch, MLPParams* grad);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t parameter_count, AdamConfig cfg);
  void step(Vector& params, const Vector& grad);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Vector m_;
  Vector v_;
  long t_ = 0;
};

}  // namespace sumreward::reward
