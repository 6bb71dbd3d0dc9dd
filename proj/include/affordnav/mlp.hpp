// Copyright 2026 The affordnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AFFORDNAV_MLP_HPP
#define AFFORDNAV_MLP_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "affordnav/rng.hpp"

namespace affordnav {

/// Output head and loss pairing.
enum class LossKind {
  bce_logits,     // logistic output, binary cross-entropy
  squared_sigmoid  // logistic output, squared error against a [0,1] target
};

/// Fully connected network with ReLU hidden layers and one scalar output
/// logit. Samples are columns of the input matrix.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  Mlp() = default;

  /// sizes = {inputs, hidden..., 1}. He-normal weights, zero biases.
  Mlp(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2 || sizes.back() != 1) throw std::invalid_argument("Mlp: sizes must end with a single output");
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      if (in < 1 || out < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
      Layer layer{Matrix(out, in), Vector::Zero(out)};
      const double scale = std::sqrt(2.0 / in);
      for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) layer.weight(r, c) = static_cast<Scalar>(scale * rng.normal());
      }
      layers_.push_back(std::move(layer));
    }
  }

  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  int input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Row logits(const Matrix& x) const {
    Matrix a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = (layers_[l].weight * a).colwise() + layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(Scalar(0));
      a = std::move(z);
    }
    return a.row(0);
  }

  static Scalar sigmoid(Scalar z) {
    if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (Scalar(1) + e);
  }

  /// Mean loss over the batch; fills `grads` (same shapes as layers) when non-null.
  Scalar loss_and_grad(const Matrix& x, const Row& targets, LossKind kind, std::vector<Layer>* grads) const {
    const auto n = x.cols();
    std::vector<Matrix> acts;  // post-activation inputs to each layer
    acts.reserve(layers_.size());
    acts.push_back(x);
    Matrix z_last;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = (layers_[l].weight * acts.back()).colwise() + layers_[l].bias;
      if (l + 1 < layers_.size()) {
        acts.push_back(z.cwiseMax(Scalar(0)));
      } else {
        z_last = std::move(z);
      }
    }
    Row dz(n);
    Scalar loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar z = z_last(0, i), y = targets(i);
      if (kind == LossKind::bce_logits) {
        loss += std::max(z, Scalar(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
        dz(i) = sigmoid(z) - y;
      } else {
        const Scalar p = sigmoid(z);
        loss += (p - y) * (p - y);
        dz(i) = Scalar(2) * (p - y) * p * (Scalar(1) - p);
      }
    }
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    loss *= inv_n;
    if (!grads) return loss;

    grads->resize(layers_.size());
    Matrix delta = dz * inv_n;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      (*grads)[l].weight = delta * acts[l].transpose();
      (*grads)[l].bias = delta.rowwise().sum();
      if (l > 0) {
        Matrix back = layers_[l].weight.transpose() * delta;
        delta = back.cwiseProduct((acts[l].array() > Scalar(0)).template cast<Scalar>().matrix());
      }
    }
    return loss;
  }

 private:
  std::vector<Layer> layers_;
};

/// Adaptive-moment optimiser state for an Mlp.
template <typename Scalar>
class Adam {
 public:
  using Layer = typename Mlp<Scalar>::Layer;

  explicit Adam(const Mlp<Scalar>& net, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& layer : net.layers()) {
      using M = typename Mlp<Scalar>::Matrix;
      using V = typename Mlp<Scalar>::Vector;
      m_.push_back(Layer{M::Zero(layer.weight.rows(), layer.weight.cols()), V::Zero(layer.bias.size())});
      v_.push_back(m_.back());
    }
  }

  void step(Mlp<Scalar>& net, const std::vector<Layer>& grads) {
    ++t_;
    const Scalar b1 = static_cast<Scalar>(beta1_), b2 = static_cast<Scalar>(beta2_);
    const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(beta1_, t_));
    const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(beta2_, t_));
    const Scalar lr = static_cast<Scalar>(lr_), eps = static_cast<Scalar>(eps_);
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = b1 * m + (Scalar(1) - b1) * g;
      v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weight, m_[l].weight, v_[l].weight, grads[l].weight);
      update(layers[l].bias, m_[l].bias, v_[l].bias, grads[l].bias);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Layer> m_, v_;
};

}  // namespace affordnav

#endif  // AFFORDNAV_MLP_HPP
