#include "argn/tensor.hpp"

namespace argn {

std::vector<float> dropout_mask(std::size_t len, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw NumericError("dropout rate must lie in [0,1)");
  std::vector<float> mask(len, 1.0f);
  if (rate == 0.0) return mask;
  const float keep_scale = static_cast<float>(1.0 / (1.0 - rate));
  for (auto& m : mask) m = rng.uniform() < rate ? 0.0f : keep_scale;
  return mask;
}

void Adam::step(std::span<ParamTensor> params, double lr) {
  for (const auto& p : params)
    for (float g : p.grad)
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in '" + p.name + "'");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0f);
      v_.emplace_back(p.size(), 0.0f);
    }
  }
  if (m_.size() != params.size()) throw NumericError("adam: parameter list changed between steps");
  ++t_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const auto fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
  const auto step_size = static_cast<float>(lr / c1);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  const auto eps = static_cast<float>(cfg_.eps);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const float g = p.grad[i];
      m[i] = fb1 * m[i] + (1.0f - fb1) * g;
      v[i] = fb2 * v[i] + (1.0f - fb2) * g * g;
      p.value[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
    }
    p.zero_grad();
  }
}

DpAccumulator::DpAccumulator(std::size_t dim, const DpConfig& cfg) : cfg_(cfg), sum_(dim, 0.0) {
  if (!(cfg.clip_norm > 0.0)) throw ConfigError("dp clip_norm must be positive");
  if (cfg.noise_multiplier < 0.0) throw ConfigError("dp noise_multiplier must be non-negative");
}

void DpAccumulator::add(std::span<const float> g) {
  if (g.size() != sum_.size()) throw NumericError("dp: gradient size mismatch");
  double sq = 0.0;
  for (float v : g) sq += static_cast<double>(v) * static_cast<double>(v);
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("dp: non-finite per-example gradient");
  const double scale = norm > cfg_.clip_norm ? cfg_.clip_norm / norm : 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum_[i] += scale * static_cast<double>(g[i]);
  ++count_;
}

std::vector<float> DpAccumulator::finish(Rng& rng) const {
  if (count_ == 0) throw NumericError("dp_sgd_step: empty batch");
  const double std_dev = cfg_.noise_multiplier * cfg_.clip_norm;
  std::vector<float> out(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    const double noise = std_dev > 0.0 ? std_dev * rng.normal() : 0.0;
    out[i] = static_cast<float>((sum_[i] + noise) / static_cast<double>(count_));
  }
  return out;
}

std::size_t total_size(std::span<const ParamTensor> params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

std::vector<float> flatten_grads(std::span<const ParamTensor> params) {
  std::vector<float> out;
  out.reserve(total_size(params));
  for (const auto& p : params) out.insert(out.end(), p.grad.begin(), p.grad.end());
  return out;
}

void zero_grads(std::span<ParamTensor> params) {
  for (auto& p : params) p.zero_grad();
}

void sgd_step(std::span<ParamTensor> params, std::span<const float> grad, double lr) {
  if (grad.size() != total_size(params)) throw NumericError("sgd_step: gradient size mismatch");
  for (float g : grad)
    if (!std::isfinite(g)) throw NumericError("sgd_step: non-finite gradient");
  std::size_t off = 0;
  const auto flr = static_cast<float>(lr);
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.size(); ++i) p.value[i] -= flr * grad[off + i];
    off += p.size();
    p.zero_grad();
  }
}

void dp_sgd_step(std::span<ParamTensor> params, const std::vector<std::vector<float>>& per_example_grads,
                 const DpConfig& dp, double lr, Rng& rng) {
  if (per_example_grads.empty()) throw NumericError("dp_sgd_step: empty batch");
  DpAccumulator acc(total_size(params), dp);
  for (const auto& g : per_example_grads) acc.add(g);
  sgd_step(params, acc.finish(rng), lr);
}

}  // namespace argn
