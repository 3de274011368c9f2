#include "sumreward/value_net.hpp"

#include <cmath>
#include <stdexcept>

namespace sumreward::rl {

namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

}  // namespace

ValueNet::ValueNet(std::size_t input_dim, Rng& rng, std::size_t hidden) {
  if (input_dim == 0 || hidden == 0) throw std::invalid_argument("ValueNet: zero dimension");
  const auto in = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden);
  w1_ = uniform_matrix(h, in, rng);
  b1_ = Vector::Zero(h);
  w2_ = uniform_matrix(h, h, rng);
  b2_ = Vector::Zero(h);
  w3_ = uniform_matrix(1, h, rng).row(0).transpose();
  b3_ = 0.0;
}

std::size_t ValueNet::parameter_count() const {
  return static_cast<std::size_t>(w1_.size() + b1_.size() + w2_.size() + b2_.size() + w3_.size() + 1);
}

double ValueNet::value(const Vector& x) const {
  if (x.size() != w1_.cols()) throw std::invalid_argument("ValueNet: input dimension mismatch");
  const Vector h1 = (w1_ * x + b1_).array().tanh().matrix();
  const Vector h2 = (w2_ * h1 + b2_).array().tanh().matrix();
  return w3_.dot(h2) + b3_;
}

Vector ValueNet::values(const Matrix& xs) const {
  if (xs.rows() != w1_.cols()) throw std::invalid_argument("ValueNet: input dimension mismatch");
  const Matrix h1 = ((w1_ * xs).colwise() + b1_).array().tanh().matrix();
  const Matrix h2 = ((w2_ * h1).colwise() + b2_).array().tanh().matrix();
  return (h2.transpose() * w3_).array() + b3_;
}

Vector ValueNet::gradient(const Vector& x) const {
  if (x.size() != w1_.cols()) throw std::invalid_argument("ValueNet: input dimension mismatch");
  const Vector h1 = (w1_ * x + b1_).array().tanh().matrix();
  const Vector h2 = (w2_ * h1 + b2_).array().tanh().matrix();
  const Vector d2 = (w3_.array() * (1.0 - h2.array().square())).matrix();
  const Vector d1 = ((w2_.transpose() * d2).array() * (1.0 - h1.array().square())).matrix();

  Vector g(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index o = 0;
  const Matrix gw1 = d1 * x.transpose();
  g.segment(o, gw1.size()) = Eigen::Map<const Vector>(gw1.data(), gw1.size());
  o += gw1.size();
  g.segment(o, d1.size()) = d1;
  o += d1.size();
  const Matrix gw2 = d2 * h1.transpose();
  g.segment(o, gw2.size()) = Eigen::Map<const Vector>(gw2.data(), gw2.size());
  o += gw2.size();
  g.segment(o, d2.size()) = d2;
  o += d2.size();
  g.segment(o, h2.size()) = h2;
  o += h2.size();
  g(o) = 1.0;
  return g;
}

void ValueNet::ascend(const Vector& x, double step) {
  unflatten(flatten() + step * gradient(x));
}

Vector ValueNet::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index o = 0;
  auto put = [&](const auto& m) {
    flat.segment(o, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    o += m.size();
  };
  put(w1_);
  put(b1_);
  put(w2_);
  put(b2_);
  put(w3_);
  flat(o) = b3_;
  return flat;
}

void ValueNet::unflatten(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw std::invalid_argument("ValueNet: parameter vector has the wrong length");
  }
  Eigen::Index o = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Vector>(m.data(), m.size()) = flat.segment(o, m.size());
    o += m.size();
  };
  take(w1_);
  take(b1_);
  take(w2_);
  take(b2_);
  take(w3_);
  b3_ = flat(o);
}

bool ValueNet::all_finite() const {
  return w1_.allFinite() && b1_.allFinite() && w2_.allFinite() && b2_.allFinite() &&
         w3_.allFinite() && std::isfinite(b3_);
}

}  // namespace sumreward::rl
