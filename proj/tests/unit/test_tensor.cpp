#include <cmath>
#include <numeric>

#include "argn/tensor.hpp"
#include "doctest.h"

using namespace argn;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() * scale;
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)}); }

// Scalar loss L = sum_o w_o * y_o for a fixed random projection w, so dL/dy = w.
double dense_loss(const std::vector<double>& x, const std::vector<double>& W, const std::vector<double>& b,
                  const std::vector<double>& w, Activation act) {
  std::vector<double> y(b.size());
  dense_forward<double>(x, W, b, act, y);
  return std::inner_product(y.begin(), y.end(), w.begin(), 0.0);
}

constexpr double kH = 1e-3;

}  // namespace

TEST_CASE("dense: identity with relu and the zero-width input") {
  const float W[] = {1, 0, 0, 1};
  const float b[] = {0, 0};
  const float x[] = {-1, 2};
  float y[2];
  dense_forward<float>(x, W, b, Activation::relu, y);
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == 2.0f);

  const float bias[] = {-1.0f, 3.0f};
  dense_forward<float>(std::span<const float>{}, std::span<const float>{}, bias, Activation::relu, y);
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == 3.0f);

  float bad[3];
  CHECK_THROWS_AS(dense_forward<float>(x, W, b, Activation::none, bad), NumericError);
}

TEST_CASE("dense: analytic gradients match central finite differences") {
  Rng rng(11);
  for (int point = 0; point < 20; ++point) {
    const std::size_t in = 1 + rng.below(6), out = 1 + rng.below(6);
    auto x = random_vec(in, rng), W = random_vec(in * out, rng), b = random_vec(out, rng), w = random_vec(out, rng);
    for (Activation act : {Activation::none, Activation::relu}) {
      std::vector<double> y(out);
      dense_forward<double>(x, W, b, act, y);
      // Skip points sitting on a ReLU kink where the derivative is undefined.
      bool near_kink = false;
      for (std::size_t o = 0; o < out; ++o) {
        double pre = b[o];
        for (std::size_t i = 0; i < in; ++i) pre += x[i] * W[i * out + o];
        near_kink = near_kink || std::abs(pre) < 10 * kH;
      }
      if (act == Activation::relu && near_kink) continue;
      std::vector<double> dW(W.size()), db(out), dx(in);
      dense_backward<double>(x, W, y, w, act, dW, db, dx);
      auto check = [&](std::vector<double>& param, const std::vector<double>& grad) {
        for (std::size_t k = 0; k < param.size(); ++k) {
          const double saved = param[k];
          param[k] = saved + kH;
          const double up = dense_loss(x, W, b, w, act);
          param[k] = saved - kH;
          const double down = dense_loss(x, W, b, w, act);
          param[k] = saved;
          CHECK(rel_err((up - down) / (2 * kH), grad[k]) < 1e-4);
        }
      };
      check(W, dW);
      check(b, db);
      check(x, dx);
    }
  }
}

TEST_CASE("embedding: lookup, sparse backward, gradient check") {
  const float E[] = {0, 0, 0, 4, 5, 6, 1, 2, 3};
  const auto row = embedding_forward<float>(2, E, 3);
  CHECK(std::vector<float>(row.begin(), row.end()) == std::vector<float>{1, 2, 3});
  CHECK_THROWS_AS(embedding_forward<float>(3, E, 3), NumericError);

  float dE[9] = {};
  const float dy[] = {1, 1, 1};
  embedding_backward<float>(0, dy, dE);
  for (int k = 3; k < 9; ++k) CHECK(dE[k] == 0.0f);
  CHECK(dE[0] == 1.0f);

  // L = w . E[idx]; finite differences on every entry of E.
  Rng rng(12);
  for (int point = 0; point < 20; ++point) {
    const std::size_t rows = 1 + rng.below(5), dim = 1 + rng.below(4), idx = rng.below(rows);
    auto Ed = random_vec(rows * dim, rng), w = random_vec(dim, rng);
    auto loss = [&] {
      const auto e = embedding_forward<double>(idx, Ed, dim);
      return std::inner_product(e.begin(), e.end(), w.begin(), 0.0);
    };
    std::vector<double> grad(Ed.size());
    embedding_backward<double>(idx, w, grad);
    for (std::size_t k = 0; k < Ed.size(); ++k) {
      const double saved = Ed[k];
      Ed[k] = saved + kH;
      const double up = loss();
      Ed[k] = saved - kH;
      const double down = loss();
      Ed[k] = saved;
      CHECK(std::abs((up - down) / (2 * kH) - grad[k]) < 1e-8 + 1e-4 * std::abs(grad[k]));
    }
  }
}

TEST_CASE("softmax cross-entropy: examples, stability and gradients") {
  float grad[2];
  const float uniform_logits[] = {0, 0};
  CHECK(softmax_cross_entropy<float>(uniform_logits, 0, grad) == doctest::Approx(std::log(2.0)));
  CHECK(grad[0] == doctest::Approx(-0.5));
  CHECK(grad[1] == doctest::Approx(0.5));

  const float big[] = {1000, 0};
  const float loss = softmax_cross_entropy<float>(big, 0, grad);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(0.0));
  CHECK_THROWS_AS(softmax_cross_entropy<float>(big, 2, grad), NumericError);

  Rng rng(13);
  for (int point = 0; point < 20; ++point) {
    const std::size_t n = 2 + rng.below(8), target = rng.below(n);
    auto logits = random_vec(n, rng, 3.0);
    std::vector<double> g(n), scratch(n);
    softmax_cross_entropy<double>(logits, target, g);
    for (std::size_t k = 0; k < n; ++k) {
      const double saved = logits[k];
      logits[k] = saved + kH;
      const double up = softmax_cross_entropy<double>(logits, target, scratch);
      logits[k] = saved - kH;
      const double down = softmax_cross_entropy<double>(logits, target, scratch);
      logits[k] = saved;
      CHECK(rel_err((up - down) / (2 * kH), g[k]) < 1e-4);
    }
  }
}

TEST_CASE("softmax: property, a probability vector for arbitrary finite logits") {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<float> logits(n), p(n);
    const double scale = std::pow(10.0, rng.uniform(-2, 4));
    for (auto& l : logits) l = static_cast<float>(rng.normal() * scale);
    softmax<float>(logits, p);
    double total = 0;
    for (float v : p) {
      CHECK(v >= 0.0f);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("dropout: rates, scaling and expectation") {
  Rng rng(15);
  for (float m : dropout_mask(100, 0.0, rng)) CHECK(m == 1.0f);

  const auto mask = dropout_mask(100000, 0.25, rng);
  std::size_t zeros = 0;
  double total = 0;
  for (float m : mask) {
    zeros += m == 0.0f;
    CHECK((m == 0.0f || m == doctest::Approx(1.0 / 0.75)));
    total += m;
  }
  CHECK(static_cast<double>(zeros) / mask.size() == doctest::Approx(0.25).epsilon(0.04));
  // Mean of the mask is 1, so masked vectors are unbiased.
  CHECK(total / mask.size() == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(dropout_mask(3, 1.0, rng), NumericError);
}

TEST_CASE("adam: single-step value, zero gradient, determinism, rejection") {
  auto make = [] {
    std::vector<ParamTensor> ps{ParamTensor("a", 2, 3), ParamTensor("b", 1, 4)};
    return ps;
  };
  auto ps = make();
  for (auto& p : ps) std::fill(p.grad.begin(), p.grad.end(), 1.0f);
  Adam adam;
  adam.step(ps, 1e-3);
  // m_hat = v_hat = 1, step = -lr / (1 + eps).
  for (const auto& p : ps)
    for (float v : p.value) CHECK(v == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-6));
  for (const auto& p : ps)
    for (float g : p.grad) CHECK(g == 0.0f);

  // Zero gradients on fresh moment estimates leave parameters in place.
  const auto before = ps;
  Adam fresh;
  fresh.step(ps, 1e-3);
  CHECK(ps == before);

  auto run = [&] {
    auto q = make();
    Adam a;
    Rng rng(16);
    for (int s = 0; s < 10; ++s) {
      for (auto& p : q)
        for (auto& g : p.grad) g = static_cast<float>(rng.normal());
      a.step(q, 1e-2);
    }
    return q;
  };
  CHECK(run() == run());

  ps[0].grad[0] = std::nanf("");
  const auto snapshot = ps[0].value;
  CHECK_THROWS_AS(adam.step(ps, 1e-3), NumericError);
  CHECK(ps[0].value == snapshot);
}

TEST_CASE("dp-sgd: clipping rule") {
  DpConfig dp{.enabled = true, .clip_norm = 1.5, .noise_multiplier = 0.0};
  DpAccumulator acc(2, dp);
  const float g[] = {1.8f, 2.4f};  // norm 3 = 2C
  acc.add(g);
  Rng rng(0);
  const auto out = acc.finish(rng);
  CHECK(std::hypot(out[0], out[1]) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(out[0] / out[1] == doctest::Approx(0.75));

  DpAccumulator small(2, dp);
  const float h[] = {0.3f, 0.4f};
  small.add(h);
  const auto kept = small.finish(rng);
  CHECK(kept[0] == doctest::Approx(0.3));
  CHECK(kept[1] == doctest::Approx(0.4));

  std::vector<ParamTensor> ps{ParamTensor("w", 1, 2)};
  CHECK_THROWS_AS(dp_sgd_step(ps, {}, dp, 0.1, rng), NumericError);
  CHECK_THROWS_AS(DpAccumulator(2, DpConfig{.enabled = true, .clip_norm = 0.0}), ConfigError);
}

TEST_CASE("dp-sgd: without noise and clipping equals a plain mean-gradient SGD step") {
  Rng rng(17);
  std::vector<ParamTensor> dp_params{ParamTensor("w", 3, 4), ParamTensor("b", 1, 4)};
  for (auto& p : dp_params)
    for (auto& v : p.value) v = static_cast<float>(rng.normal());
  auto plain = dp_params;

  std::vector<std::vector<float>> grads(8, std::vector<float>(16));
  for (auto& g : grads)
    for (auto& v : g) v = static_cast<float>(rng.normal());

  dp_sgd_step(dp_params, grads, DpConfig{.enabled = true, .clip_norm = 1e9, .noise_multiplier = 0.0}, 0.05, rng);

  // Independent plain SGD: theta -= lr * mean(g), in double.
  std::size_t off = 0;
  for (auto& p : plain) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      double mean = 0;
      for (const auto& g : grads) mean += g[off + i];
      mean /= static_cast<double>(grads.size());
      p.value[i] = static_cast<float>(p.value[i] - 0.05 * mean);
    }
    off += p.size();
  }
  for (std::size_t k = 0; k < plain.size(); ++k)
    for (std::size_t i = 0; i < plain[k].size(); ++i)
      CHECK(std::abs(dp_params[k].value[i] - plain[k].value[i]) < 1e-6);
}

TEST_CASE("dp-sgd: injected noise has std sigma*C/batch") {
  const DpConfig dp{.enabled = true, .clip_norm = 2.0, .noise_multiplier = 1.0};
  const std::size_t batch = 4, samples = 10000;
  DpAccumulator acc(samples, dp);
  const std::vector<float> zero(samples, 0.0f);
  for (std::size_t b = 0; b < batch; ++b) acc.add(zero);
  Rng rng(18);
  const auto out = acc.finish(rng);
  double mean = 0, sq = 0;
  for (float v : out) mean += v;
  mean /= samples;
  for (float v : out) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / (samples - 1));
  CHECK(sd == doctest::Approx(1.0 * 2.0 / batch).epsilon(0.05));
}
