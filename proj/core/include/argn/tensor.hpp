#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argn/error.hpp"
#include "argn/rng.hpp"

namespace argn {

/// Trainable parameter block: row-major values plus a same-shape gradient accumulator.
struct ParamTensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> value;
  std::vector<float> grad;

  ParamTensor() = default;
  ParamTensor(std::string n, std::size_t r, std::size_t c)
      : name(std::move(n)), rows(r), cols(c), value(r * c, 0.0f), grad(r * c, 0.0f) {}

  std::size_t size() const { return value.size(); }
  std::span<float> row(std::size_t r) { return {value.data() + r * cols, cols}; }
  std::span<const float> row(std::size_t r) const { return {value.data() + r * cols, cols}; }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }
  bool operator==(const ParamTensor&) const = default;
};

enum class Activation { none, relu };

// Dense layer y = act(W x + b). W is stored input-major: W[i * out + o] is the
// weight from input i to output o, so each input contributes one contiguous
// axpy. A zero-width input gives y = act(b).

template <typename T>
void dense_forward(std::span<const T> x, std::span<const T> W, std::span<const T> b, Activation act,
                   std::span<T> y) {
  const std::size_t out = b.size();
  if (y.size() != out || W.size() != x.size() * out)
    throw NumericError("dense_forward: dimension mismatch (x=" + std::to_string(x.size()) +
                       ", W=" + std::to_string(W.size()) + ", b=" + std::to_string(out) + ")");
  std::copy(b.begin(), b.end(), y.begin());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T xi = x[i];
    if (xi == T(0)) continue;
    const T* w = W.data() + i * out;
    for (std::size_t o = 0; o < out; ++o) y[o] += xi * w[o];
  }
  if (act == Activation::relu)
    for (auto& v : y) v = v > T(0) ? v : T(0);
}

/// Accumulates dW, db and (when non-empty) dx from the output gradient dy.
/// `y` is the forward output, used for the ReLU derivative.
template <typename T>
void dense_backward(std::span<const T> x, std::span<const T> W, std::span<const T> y, std::span<const T> dy,
                    Activation act, std::span<T> dW, std::span<T> db, std::span<T> dx) {
  const std::size_t out = y.size();
  if (dy.size() != out || W.size() != x.size() * out || dW.size() != W.size() || db.size() != out ||
      (!dx.empty() && dx.size() != x.size()))
    throw NumericError("dense_backward: dimension mismatch");
  std::vector<T> dpre(dy.begin(), dy.end());
  if (act == Activation::relu)
    for (std::size_t o = 0; o < out; ++o)
      if (!(y[o] > T(0))) dpre[o] = T(0);
  for (std::size_t o = 0; o < out; ++o) db[o] += dpre[o];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T* w = W.data() + i * out;
    T* gw = dW.data() + i * out;
    const T xi = x[i];
    T acc = T(0);
    for (std::size_t o = 0; o < out; ++o) {
      gw[o] += xi * dpre[o];
      acc += w[o] * dpre[o];
    }
    if (!dx.empty()) dx[i] += acc;
  }
}

template <typename T>
std::span<const T> embedding_forward(std::size_t index, std::span<const T> E, std::size_t dim) {
  if (dim == 0 || (index + 1) * dim > E.size())
    throw NumericError("embedding_forward: index " + std::to_string(index) + " out of range for " +
                       std::to_string(dim ? E.size() / dim : 0) + " rows");
  return E.subspan(index * dim, dim);
}

/// Adds dy into row `index` of dE; other rows are untouched.
template <typename T>
void embedding_backward(std::size_t index, std::span<const T> dy, std::span<T> dE) {
  const std::size_t dim = dy.size();
  if ((index + 1) * dim > dE.size()) throw NumericError("embedding_backward: index out of range");
  T* g = dE.data() + index * dim;
  for (std::size_t k = 0; k < dim; ++k) g[k] += dy[k];
}

/// Max-subtracted softmax.
template <typename T>
void softmax(std::span<const T> logits, std::span<T> p) {
  const T m = *std::max_element(logits.begin(), logits.end());
  T total = T(0);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    total += p[k];
  }
  for (auto& v : p) v /= total;
}

/// Returns -ln softmax(logits)[target] and writes softmax - onehot(target) into grad.
template <typename T>
T softmax_cross_entropy(std::span<const T> logits, std::size_t target, std::span<T> grad) {
  if (target >= logits.size()) throw NumericError("softmax_cross_entropy: target out of range");
  const T m = *std::max_element(logits.begin(), logits.end());
  T total = T(0);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    grad[k] = std::exp(logits[k] - m);
    total += grad[k];
  }
  const T log_total = std::log(total);
  for (auto& v : grad) v /= total;
  grad[target] -= T(1);
  return log_total - (logits[target] - m);
}

/// Inverted dropout: 0 with probability `rate`, else 1/(1-rate).
std::vector<float> dropout_mask(std::size_t len, double rate, Rng& rng);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over a fixed list of tensors. Gradients are zeroed
/// after each accepted step; a step with a non-finite gradient is rejected.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(std::span<ParamTensor> params, double lr);
  std::uint64_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

struct DpConfig {
  bool enabled = false;
  double clip_norm = 1.0;
  double noise_multiplier = 1.0;
  std::optional<double> reported_epsilon;

  bool operator==(const DpConfig&) const = default;
};

/// Sums per-example gradients after clipping each to L2 norm <= C, then adds
/// N(0, (sigma*C)^2) noise per coordinate and divides by the example count.
class DpAccumulator {
 public:
  DpAccumulator(std::size_t dim, const DpConfig& cfg);

  void add(std::span<const float> example_grad);
  std::size_t count() const { return count_; }
  std::vector<float> finish(Rng& rng) const;

 private:
  DpConfig cfg_;
  std::size_t count_ = 0;
  std::vector<double> sum_;
};

std::size_t total_size(std::span<const ParamTensor> params);
std::vector<float> flatten_grads(std::span<const ParamTensor> params);
void zero_grads(std::span<ParamTensor> params);
/// theta -= lr * g over the flattened parameter layout.
void sgd_step(std::span<ParamTensor> params, std::span<const float> grad, double lr);

/// Clip, sum, noise, average, then one SGD step. Throws on an empty batch.
void dp_sgd_step(std::span<ParamTensor> params, const std::vector<std::vector<float>>& per_example_grads,
                 const DpConfig& dp, double lr, Rng& rng);

}  // namespace argn
