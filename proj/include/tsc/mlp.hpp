#pragma once

// Fully connected ReLU networks with hand-written backpropagation and an
// Adam optimizer with decoupled weight decay. Parameters of a network live in
// one flat vector: for each layer the weight matrix (out x in, column-major)
// followed by the bias.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tsc/rng.hpp"

namespace tsc {

template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  /// Activations retained by forward() for backward().
  struct Cache {
    std::vector<Matrix> activations;  // [0] is the input
  };

  Mlp() = default;

  /// `sizes` = {input, hidden..., output}. Hidden layers use ReLU; the output is linear.
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
      if (sizes_[i] <= 0 || sizes_[i + 1] <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
      offsets_.push_back(n);
      n += static_cast<std::size_t>(sizes_[i + 1]) * (sizes_[i] + 1);
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(n));
  }

  /// He-uniform weights, zero biases; the output layer is scaled by `output_gain`.
  void initialize(CounterRng& rng, double output_gain = 1.0) {
    for (std::size_t i = 0; i < layers(); ++i) {
      const double limit = std::sqrt(6.0 / sizes_[i]) * (i + 1 == layers() ? output_gain : 1.0);
      auto w = weight(i);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
      bias(i).setZero();
    }
  }

  std::size_t layers() const noexcept { return offsets_.size(); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int input_size() const noexcept { return sizes_.front(); }
  int output_size() const noexcept { return sizes_.back(); }
  Eigen::Index parameter_count() const noexcept { return params_.size(); }

  Vector& parameters() noexcept { return params_; }
  const Vector& parameters() const noexcept { return params_; }

  MatrixMap weight(std::size_t i) {
    return MatrixMap(params_.data() + offsets_[i], sizes_[i + 1], sizes_[i]);
  }
  ConstMatrixMap weight(std::size_t i) const {
    return ConstMatrixMap(params_.data() + offsets_[i], sizes_[i + 1], sizes_[i]);
  }
  Eigen::Map<Vector> bias(std::size_t i) {
    return Eigen::Map<Vector>(params_.data() + offsets_[i] + sizes_[i + 1] * sizes_[i], sizes_[i + 1]);
  }
  ConstVectorMap bias(std::size_t i) const {
    return ConstVectorMap(params_.data() + offsets_[i] + sizes_[i + 1] * sizes_[i], sizes_[i + 1]);
  }

  /// Columns of `input` are samples. Returns output x batch.
  Matrix forward(const Matrix& input, Cache* cache = nullptr) const {
    if (input.rows() != input_size()) throw std::invalid_argument("Mlp::forward: input size mismatch");
    if (cache) {
      cache->activations.resize(layers() + 1);
      cache->activations[0] = input;
    }
    Matrix x = input;
    for (std::size_t i = 0; i < layers(); ++i) {
      Matrix y = weight(i) * x;
      y.colwise() += bias(i);
      if (i + 1 < layers()) y = y.cwiseMax(Scalar(0));
      if (cache) cache->activations[i + 1] = y;
      x = std::move(y);
    }
    return x;
  }

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void backward(const Cache& cache, const Matrix& output_grad, Vector& grad) const {
    if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());
    Matrix delta = output_grad;
    for (std::size_t i = layers(); i-- > 0;) {
      const Matrix& in = cache.activations[i];
      MatrixMap gw(grad.data() + offsets_[i], sizes_[i + 1], sizes_[i]);
      gw.noalias() += delta * in.transpose();
      Eigen::Map<Vector>(grad.data() + offsets_[i] + sizes_[i + 1] * sizes_[i], sizes_[i + 1]) +=
          delta.rowwise().sum();
      if (i > 0) {
        Matrix prev = weight(i).transpose() * delta;
        delta = (in.array() > Scalar(0)).select(prev, Scalar(0));
      }
    }
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out(sizes_);
    out.parameters() = params_.template cast<Other>();
    return out;
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  Vector params_;
};

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled: p -= lr * wd * p
};

template <typename Scalar>
class Adam {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Adam() = default;
  Adam(Eigen::Index n, AdamConfig cfg) : cfg_(cfg), m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

  void step(Vector& params, const Vector& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(cfg_.beta1);
    const auto b2 = static_cast<Scalar>(cfg_.beta2);
    m_ = b1 * m_ + (Scalar(1) - b1) * grad;
    v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseProduct(grad);
    const auto lr = static_cast<Scalar>(cfg_.learning_rate);
    const auto decay = static_cast<Scalar>(cfg_.learning_rate * cfg_.weight_decay);
    const auto eps = static_cast<Scalar>(cfg_.epsilon);
    const auto s1 = static_cast<Scalar>(1.0 / c1);
    const auto s2 = static_cast<Scalar>(1.0 / c2);
    params -= decay * params;
    params.array() -= lr * (m_.array() * s1) / ((v_.array() * s2).sqrt() + eps);
  }

  std::int64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  void set_learning_rate(double lr) noexcept { cfg_.learning_rate = lr; }

 private:
  AdamConfig cfg_{};
  Vector m_;
  Vector v_;
  std::int64_t t_ = 0;
};

}  // namespace tsc
