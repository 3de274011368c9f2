#pragma once

#include "sumreward/common.hpp"
#include "sumreward/rng.hpp"

#include <cstddef>

namespace sumreward::rl {

// Scalar value estimate: two tanh hidden layers and a linear output.
class ValueNet {
 public:
  static constexpr std::size_t kDefaultHidden = 64;

  ValueNet() = default;
  ValueNet(std::size_t input_dim, Rng& rng, std::size_t hidden = kDefaultHidden);

  std::size_t input_dim() const { return static_cast<std::size_t>(w1_.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1_.rows()); }
  std::size_t parameter_count() const;

  double value(const Vector& x) const;
  // One value per column.
  Vector values(const Matrix& xs) const;

  // d value / d parameters, in the order of flatten().
  Vector gradient(const Vector& x) const;
  // w <- w + step * grad V(x)
  void ascend(const Vector& x, double step);

  Vector flatten() const;
  void unflatten(const Vector& flat);
  bool all_finite() const;

 private:
  Matrix w1_;
  Vector b1_;
  Matrix w2_;
  Vector b2_;
  Vector w3_;
  double b3_ = 0.0;
};

}  // namespace sumreward::rl
