// Copyright 2026 The Authors.
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

#pragma once

// Dense feed-forward networks with exact reverse-mode gradients and an
// adaptive-moment optimizer. Batches are column-major: one sample per column.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssbcb/error.hpp"
#include "ssbcb/propagation.hpp"  // little-endian helpers
#include "ssbcb/rng.hpp"

namespace ssbcb::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint8_t { kRelu = 0, kIdentity = 1 };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::kRelu;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { check(); }

  // Hidden layers use relu, the output layer is linear. Weights are
  // uniform in +-sqrt(6 / fan_in), biases zero.
  static DenseNet create(int input_dim, const std::vector<int>& hidden, int output_dim, std::uint64_t seed) {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("DenseNet: dimensions must be positive");
    std::vector<int> dims{input_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(output_dim);
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      if (dims[k + 1] < 1) throw std::invalid_argument("DenseNet: layer sizes must be positive");
      CounterRng rng(seed, label_of("nn/init") + k);
      const double limit = std::sqrt(6.0 / dims[k]);
      DenseLayer l;
      l.weight.resize(dims[k + 1], dims[k]);
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = rng.uniform(-limit, limit);
      l.bias = Vector::Zero(dims[k + 1]);
      l.activation = k + 2 == dims.size() ? Activation::kIdentity : Activation::kRelu;
      layers.push_back(std::move(l));
    }
    return DenseNet(std::move(layers));
  }

  int input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }
  std::size_t num_layers() const { return layers_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() {
    ++version_;
    return layers_;
  }
  std::uint64_t version() const { return version_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  friend bool operator==(const DenseNet& a, const DenseNet& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k) {
      const auto &x = a.layers_[k], &y = b.layers_[k];
      if (x.activation != y.activation || x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols() ||
          x.weight != y.weight || x.bias != y.bias)
        return false;
    }
    return true;
  }

 private:
  void check() const {
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      if (layers_[k].bias.size() != layers_[k].weight.rows())
        throw std::invalid_argument("DenseNet: bias length must match layer output");
      if (k > 0 && layers_[k].weight.cols() != layers_[k - 1].weight.rows())
        throw std::invalid_argument("DenseNet: adjacent layer dimensions do not chain");
    }
  }

  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

// Activations cached by forward(); valid only for the exact net state that
// produced it.
struct Tape {
  const DenseNet* net = nullptr;
  std::uint64_t version = 0;
  std::vector<Matrix> inputs;  // per layer, in x batch
  std::vector<Matrix> pre;     // per layer, pre-activation, out x batch
  Matrix output;               // out x batch
};

inline Tape forward(const DenseNet& net, const Eigen::Ref<const Matrix>& input) {
  if (net.num_layers() == 0) throw std::invalid_argument("forward: empty network");
  if (input.rows() != net.input_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(input.rows()) + " rows, network expects " +
                                std::to_string(net.input_dim()));
  if (!input.allFinite()) throw NumericError("forward: non-finite input");
  Tape t;
  t.net = &net;
  t.version = net.version();
  Matrix x = input;
  for (const auto& l : net.layers()) {
    Matrix z = l.weight * x;
    z.colwise() += l.bias;
    t.inputs.push_back(std::move(x));
    x = l.activation == Activation::kRelu ? Matrix(z.cwiseMax(0.0)) : z;
    t.pre.push_back(std::move(z));
  }
  t.output = std::move(x);
  return t;
}

inline std::vector<double> forward(const DenseNet& net, std::span<const double> input, Tape* tape = nullptr) {
  const Eigen::Map<const Matrix> x(input.data(), static_cast<Eigen::Index>(input.size()), 1);
  Tape t = forward(net, x);
  std::vector<double> out(t.output.data(), t.output.data() + t.output.size());
  if (tape) *tape = std::move(t);
  return out;
}

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  static Gradients zeros_like(const DenseNet& net) {
    Gradients g;
    for (const auto& l : net.layers()) {
      g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
  }
  double squared_norm() const {
    double s = 0.0;
    for (const auto& w : weight) s += w.squaredNorm();
    for (const auto& b : bias) s += b.squaredNorm();
    return s;
  }
  Gradients& operator+=(const Gradients& o) {
    for (std::size_t k = 0; k < weight.size(); ++k) {
      weight[k] += o.weight[k];
      bias[k] += o.bias[k];
    }
    return *this;
  }
};

// Parameter gradients of sum_columns <output_gradient, output>.
inline Gradients backward(const DenseNet& net, const Tape& tape, const Eigen::Ref<const Matrix>& output_gradient) {
  if (tape.net != &net || tape.version != net.version())
    throw std::logic_error("backward: tape does not belong to the current network state");
  if (output_gradient.rows() != tape.output.rows() || output_gradient.cols() != tape.output.cols())
    throw std::invalid_argument("backward: output gradient shape mismatch");
  const auto& layers = net.layers();
  Gradients g;
  g.weight.resize(layers.size());
  g.bias.resize(layers.size());
  Matrix delta = output_gradient;
  for (std::size_t k = layers.size(); k-- > 0;) {
    if (layers[k].activation == Activation::kRelu) delta = delta.cwiseProduct((tape.pre[k].array() > 0.0).cast<double>().matrix());
    g.weight[k].noalias() = delta * tape.inputs[k].transpose();
    g.bias[k] = delta.rowwise().sum();
    if (k > 0) delta = layers[k].weight.transpose() * delta;
  }
  return g;
}

inline Gradients backward(const DenseNet& net, const Tape& tape, std::span<const double> output_gradient) {
  const Eigen::Map<const Matrix> d(output_gradient.data(), static_cast<Eigen::Index>(output_gradient.size()), 1);
  return backward(net, tape, d);
}

// Softmax over entries whose `blocked` flag is 0; blocked entries get 0.
// An empty mask blocks nothing.
inline std::vector<double> softmax_masked(std::span<const double> logits, std::span<const std::uint8_t> blocked = {}) {
  if (!blocked.empty() && blocked.size() != logits.size())
    throw std::invalid_argument("softmax_masked: mask length mismatch");
  auto is_open = [&](std::size_t i) { return blocked.empty() || blocked[i] == 0; };
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (is_open(i)) hi = std::max(hi, logits[i]);
  if (hi == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("softmax_masked: every entry is masked");
  std::vector<double> p(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (is_open(i)) total += (p[i] = std::exp(logits[i] - hi));
  for (double& v : p) v /= total;
  return p;
}

// First/second-moment accumulators mirroring a network's parameters.
struct AdamState {
  std::vector<Matrix> m_weight, v_weight;
  std::vector<Vector> m_bias, v_bias;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_net(const DenseNet& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (const auto& l : net.layers()) {
      s.m_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      s.v_weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      s.m_bias.push_back(Vector::Zero(l.bias.size()));
      s.v_bias.push_back(Vector::Zero(l.bias.size()));
    }
    return s;
  }
};

// Bias-corrected step: theta -= lr * mhat / (sqrt(vhat) + eps), with the
// correction folded into the step size.
inline void optimizer_step(DenseNet& net, const Gradients& grads, AdamState& state) {
  if (grads.weight.size() != net.num_layers() || state.m_weight.size() != net.num_layers())
    throw std::invalid_argument("optimizer_step: layer count mismatch");
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const auto& l = net.layers()[k];
    if (grads.weight[k].rows() != l.weight.rows() || grads.weight[k].cols() != l.weight.cols() ||
        grads.bias[k].size() != l.bias.size() || state.m_weight[k].rows() != l.weight.rows() ||
        state.m_weight[k].cols() != l.weight.cols())
      throw std::invalid_argument("optimizer_step: shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto& layers = net.mutable_layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& m = state.m_weight[k];
    auto& v = state.v_weight[k];
    m = state.beta1 * m + (1.0 - state.beta1) * grads.weight[k];
    v = state.beta2 * v + (1.0 - state.beta2) * grads.weight[k].cwiseProduct(grads.weight[k]);
    layers[k].weight.array() -= state.learning_rate * (m.array() / correction1) /
                                ((v.array() / correction2).sqrt() + state.epsilon);
    auto& mb = state.m_bias[k];
    auto& vb = state.v_bias[k];
    mb = state.beta1 * mb + (1.0 - state.beta1) * grads.bias[k];
    vb = state.beta2 * vb + (1.0 - state.beta2) * grads.bias[k].cwiseProduct(grads.bias[k]);
    layers[k].bias.array() -= state.learning_rate * (mb.array() / correction1) /
                              ((vb.array() / correction2).sqrt() + state.epsilon);
  }
}

// NNW1 checkpoint:
//   "NNW1", version byte (1), uint32 layer count,
//   per layer: uint32 in, uint32 out, uint8 activation,
//   per layer: float32 weights row-major, then float32 biases,
//   uint8 has_optimizer; if set: uint64 step, float64 lr, beta1, beta2, eps,
//   then per layer float32 m_w, v_w (row-major), m_b, v_b.
// All little-endian.
inline constexpr std::uint8_t kNnwVersion = 1;

namespace detail {

inline void put_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) ssbcb::detail::put_le<float>(os, static_cast<float>(m(r, c)));
}
inline void get_matrix(std::istream& is, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = ssbcb::detail::get_le<float>(is);
}
inline void put_vector(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) ssbcb::detail::put_le<float>(os, static_cast<float>(v(i)));
}
inline void get_vector(std::istream& is, Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = ssbcb::detail::get_le<float>(is);
}

}  // namespace detail

inline void write_nnw(std::ostream& os, const DenseNet& net, const AdamState* state = nullptr) {
  using ssbcb::detail::put_le;
  os.write("NNW1", 4);
  put_le<std::uint8_t>(os, kNnwVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.num_layers()));
  for (const auto& l : net.layers()) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.cols()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.rows()));
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(l.activation));
  }
  for (const auto& l : net.layers()) {
    detail::put_matrix(os, l.weight);
    detail::put_vector(os, l.bias);
  }
  put_le<std::uint8_t>(os, state ? 1 : 0);
  if (state) {
    put_le<std::uint64_t>(os, state->step);
    put_le<double>(os, state->learning_rate);
    put_le<double>(os, state->beta1);
    put_le<double>(os, state->beta2);
    put_le<double>(os, state->epsilon);
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      detail::put_matrix(os, state->m_weight[k]);
      detail::put_matrix(os, state->v_weight[k]);
      detail::put_vector(os, state->m_bias[k]);
      detail::put_vector(os, state->v_bias[k]);
    }
  }
}

struct Checkpoint {
  DenseNet net;
  std::optional<AdamState> optimizer;
};

inline Checkpoint read_nnw(std::istream& is) {
  using ssbcb::detail::get_le;
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "NNW1") throw IncompatibleError("read_nnw: missing NNW1 magic");
  const auto version = get_le<std::uint8_t>(is);
  if (version != kNnwVersion) throw IncompatibleError("read_nnw: unsupported version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(is);
  if (count == 0 || count > 1024) throw IncompatibleError("read_nnw: implausible layer count");
  std::vector<DenseLayer> layers(count);
  for (auto& l : layers) {
    const auto in = get_le<std::uint32_t>(is);
    const auto out = get_le<std::uint32_t>(is);
    const auto act = get_le<std::uint8_t>(is);
    if (act > 1) throw IncompatibleError("read_nnw: unknown activation");
    l.weight.resize(out, in);
    l.bias.resize(out);
    l.activation = static_cast<Activation>(act);
  }
  for (auto& l : layers) {
    detail::get_matrix(is, l.weight);
    detail::get_vector(is, l.bias);
  }
  Checkpoint cp{DenseNet(std::move(layers)), std::nullopt};
  if (get_le<std::uint8_t>(is) != 0) {
    AdamState s = AdamState::for_net(cp.net, 0.0);
    s.step = get_le<std::uint64_t>(is);
    s.learning_rate = get_le<double>(is);
    s.beta1 = get_le<double>(is);
    s.beta2 = get_le<double>(is);
    s.epsilon = get_le<double>(is);
    for (std::size_t k = 0; k < cp.net.num_layers(); ++k) {
      detail::get_matrix(is, s.m_weight[k]);
      detail::get_matrix(is, s.v_weight[k]);
      detail::get_vector(is, s.m_bias[k]);
      detail::get_vector(is, s.v_bias[k]);
    }
    cp.optimizer = std::move(s);
  }
  return cp;
}

}  // namespace ssbcb::nn
