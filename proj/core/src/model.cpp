#include "argn/model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "argn/error.hpp"

namespace argn {

std::string_view to_string(OrderMode mode) { return mode == OrderMode::fixed ? "fixed" : "any_order"; }

OrderMode order_mode_from_string(std::string_view s) {
  if (s == "fixed") return OrderMode::fixed;
  if (s == "any_order") return OrderMode::any_order;
  throw ConfigError("unknown order_mode '" + std::string(s) + "' (expected fixed or any_order)");
}

std::size_t LayerSizes::context_width() const { return std::accumulate(embedding.begin(), embedding.end(), std::size_t{0}); }

namespace {

// ceil() that ignores floating noise just above an integer, so 3*16^0.25 stays 6.
std::size_t ceil_size(double v) {
  const double r = std::round(v);
  if (std::fabs(v - r) < 1e-9) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace

LayerSizes compute_layer_sizes(std::span<const std::int32_t> cardinalities) {
  LayerSizes s;
  for (std::int32_t d : cardinalities) {
    if (d < 1) throw ConfigError("sub-column cardinality must be >= 1, got " + std::to_string(d));
    const double din = static_cast<double>(d);
    s.embedding.push_back(ceil_size(3.0 * std::pow(din, 0.25)));
    s.regressor.push_back(ceil_size(16.0 * std::max(1.0, std::log(din))));
    s.predictor.push_back(static_cast<std::size_t>(d));
  }
  return s;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ConfigError("train.initial_lr must be positive");
  if (patience_stop < 1) throw ConfigError("train.patience_stop must be >= 1");
  if (patience_lr < 1) throw ConfigError("train.patience_lr must be >= 1");
  if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("train.dropout_rate must lie in [0,1)");
  if (!(val_fraction > 0.0 && val_fraction < 0.5)) throw ConfigError("train.val_fraction must lie in (0,0.5)");
  if (dp.enabled && !(dp.clip_norm > 0.0)) throw ConfigError("dp.clip_norm must be positive");
  if (dp.enabled && dp.noise_multiplier < 0.0) throw ConfigError("dp.noise_multiplier must be non-negative");
}

EarlyStopping::Decision EarlyStopping::observe(double val_loss) {
  ++epoch_;
  Decision d;
  if (epoch_ == 1 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch_;
    since_best_ = 0;
    d.improved = true;
    return d;
  }
  ++since_best_;
  d.halve_lr = since_best_ % patience_lr_ == 0;
  d.stop = since_best_ >= patience_stop_;
  return d;
}

// ------------------------------------------------------------------ model

void ArgnModel::set_layout(std::vector<SubColumn> sub_columns, OrderMode mode, std::vector<std::size_t> fixed_order) {
  if (sub_columns.empty()) throw ConfigError("model needs at least one sub-column");
  sub_columns_ = std::move(sub_columns);
  std::vector<std::int32_t> cards;
  for (const auto& s : sub_columns_) cards.push_back(s.cardinality);
  sizes_ = compute_layer_sizes(cards);
  context_width_ = sizes_.context_width();
  slot_offsets_.assign(width(), 0);
  for (std::size_t j = 1; j < width(); ++j) slot_offsets_[j] = slot_offsets_[j - 1] + sizes_.embedding[j - 1];
  order_mode_ = mode;
  if (fixed_order.empty()) {
    fixed_order.resize(width());
    std::iota(fixed_order.begin(), fixed_order.end(), std::size_t{0});
  }
  order_ranks(fixed_order, width());
  fixed_order_ = std::move(fixed_order);

  params_.clear();
  params_.reserve(width() * kSlots);
  for (std::size_t i = 0; i < width(); ++i) {
    const std::size_t d = sizes_.predictor[i], e = sizes_.embedding[i], r = sizes_.regressor[i];
    const std::string& n = sub_columns_[i].name;
    params_.emplace_back(n + ".embedding", d, e);
    params_.emplace_back(n + ".regressor.w", context_width_, r);
    params_.emplace_back(n + ".regressor.b", 1, r);
    params_.emplace_back(n + ".predictor.w", r, d);
    params_.emplace_back(n + ".predictor.b", 1, d);
  }
}

ArgnModel ArgnModel::create(std::vector<SubColumn> sub_columns, OrderMode mode, std::uint64_t seed) {
  ArgnModel m;
  m.set_layout(std::move(sub_columns), mode, {});
  Rng rng(derive_seed(seed, 0x1417));
  auto init = [&](ParamTensor& t, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t.value) v = static_cast<float>(rng.uniform(-limit, limit));
  };
  for (std::size_t i = 0; i < m.width(); ++i) {
    const auto d = static_cast<double>(m.sizes_.predictor[i]);
    const auto e = static_cast<double>(m.sizes_.embedding[i]);
    const auto r = static_cast<double>(m.sizes_.regressor[i]);
    init(m.param(i, kEmbedding), d, e);
    init(m.param(i, kRegressorW), static_cast<double>(m.context_width_), r);
    init(m.param(i, kPredictorW), r, d);
  }
  return m;
}

bool ArgnModel::operator==(const ArgnModel& o) const {
  return sub_columns_ == o.sub_columns_ && sizes_ == o.sizes_ && order_mode_ == o.order_mode_ &&
         fixed_order_ == o.fixed_order_ && params_ == o.params_ && encoders == o.encoders &&
         train_config == o.train_config && meta == o.meta;
}

std::vector<std::size_t> order_ranks(std::span<const std::size_t> order, std::size_t width) {
  if (order.size() != width)
    throw ConfigError("order has " + std::to_string(order.size()) + " entries, expected " + std::to_string(width));
  std::vector<std::size_t> rank(width, width);
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (order[p] >= width || rank[order[p]] != width) throw ConfigError("order is not a permutation of the sub-columns");
    rank[order[p]] = p;
  }
  return rank;
}

std::vector<float> masked_context(std::span<const std::vector<float>> embeddings, std::span<const std::size_t> order,
                                  std::size_t sub_column) {
  const auto rank = order_ranks(order, embeddings.size());
  std::size_t total = 0;
  for (const auto& e : embeddings) total += e.size();
  std::vector<float> ctx(total, 0.0f);
  std::size_t off = 0;
  for (std::size_t j = 0; j < embeddings.size(); ++j) {
    if (rank[j] < rank[sub_column]) std::copy(embeddings[j].begin(), embeddings[j].end(), ctx.begin() + off);
    off += embeddings[j].size();
  }
  return ctx;
}

std::vector<std::vector<float>> row_embeddings(const ArgnModel& model, std::span<const std::int32_t> row) {
  std::vector<std::vector<float>> out;
  for (std::size_t j = 0; j < model.width(); ++j) {
    const auto& E = model.param(j, ArgnModel::kEmbedding);
    const auto e = embedding_forward<float>(static_cast<std::size_t>(row[j]), E.value, E.cols);
    out.emplace_back(e.begin(), e.end());
  }
  return out;
}

namespace {

void apply_dropout(std::span<float> hidden, double rate, Rng& rng, std::span<float> mask) {
  const auto keep = static_cast<float>(1.0 / (1.0 - rate));
  for (std::size_t o = 0; o < hidden.size(); ++o) {
    mask[o] = rng.uniform() < rate ? 0.0f : keep;
    hidden[o] *= mask[o];
  }
}

void predictor_forward(const ArgnModel& m, std::size_t i, std::span<const float> hidden, std::span<float> logits) {
  const auto& V = m.param(i, ArgnModel::kPredictorW);
  const auto& c = m.param(i, ArgnModel::kPredictorB);
  const std::size_t d = V.cols;
  std::copy(c.value.begin(), c.value.end(), logits.begin());
  for (std::size_t o = 0; o < hidden.size(); ++o) {
    const float h = hidden[o];
    if (h == 0.0f) continue;
    const float* v = V.value.data() + o * d;
    for (std::size_t k = 0; k < d; ++k) logits[k] += h * v[k];
  }
}

// Regressor pre-activation over the visible embedding slots only; slots are
// visited in ascending order so the sum matches the dense zero-padded path.
void regressor_forward(const ArgnModel& m, std::span<const std::int32_t> row, std::span<const std::size_t> rank,
                       std::size_t i, std::span<float> hidden) {
  const auto& W = m.param(i, ArgnModel::kRegressorW);
  const auto& b = m.param(i, ArgnModel::kRegressorB);
  const std::size_t r = W.cols;
  std::copy(b.value.begin(), b.value.end(), hidden.begin());
  for (std::size_t j = 0; j < m.width(); ++j) {
    if (rank[j] >= rank[i]) continue;
    const auto& E = m.param(j, ArgnModel::kEmbedding);
    const float* emb = E.value.data() + static_cast<std::size_t>(row[j]) * E.cols;
    const std::size_t off = m.slot_offset(j);
    for (std::size_t k = 0; k < E.cols; ++k) {
      const float x = emb[k];
      if (x == 0.0f) continue;
      const float* w = W.value.data() + (off + k) * r;
      for (std::size_t o = 0; o < r; ++o) hidden[o] += x * w[o];
    }
  }
  for (auto& h : hidden) h = h > 0.0f ? h : 0.0f;
}

struct Scratch {
  std::vector<float> hidden, mask, logits, dlogits, dpre;
};

// Backward for one (row, sub-column) pair given the forward activations in s.
void column_backward(ArgnModel& m, std::span<const std::int32_t> row, std::span<const std::size_t> rank,
                     std::size_t i, Scratch& s) {
  auto& W = m.param(i, ArgnModel::kRegressorW);
  auto& b = m.param(i, ArgnModel::kRegressorB);
  auto& V = m.param(i, ArgnModel::kPredictorW);
  auto& c = m.param(i, ArgnModel::kPredictorB);
  const std::size_t d = V.cols, r = W.cols;

  for (std::size_t k = 0; k < d; ++k) c.grad[k] += s.dlogits[k];
  bool any = false;
  for (std::size_t o = 0; o < r; ++o) {
    const float h = s.hidden[o];
    if (h == 0.0f) {
      s.dpre[o] = 0.0f;
      continue;
    }
    const float* v = V.value.data() + o * d;
    float* gv = V.grad.data() + o * d;
    float dh = 0.0f;
    for (std::size_t k = 0; k < d; ++k) {
      gv[k] += h * s.dlogits[k];
      dh += v[k] * s.dlogits[k];
    }
    s.dpre[o] = s.mask.empty() ? dh : dh * s.mask[o];
    any = true;
  }
  if (!any) return;
  for (std::size_t o = 0; o < r; ++o) b.grad[o] += s.dpre[o];
  for (std::size_t j = 0; j < m.width(); ++j) {
    if (rank[j] >= rank[i]) continue;
    auto& E = m.param(j, ArgnModel::kEmbedding);
    const std::size_t e = E.cols;
    const std::size_t idx = static_cast<std::size_t>(row[j]);
    const float* emb = E.value.data() + idx * e;
    float* gemb = E.grad.data() + idx * e;
    const std::size_t off = m.slot_offset(j);
    for (std::size_t k = 0; k < e; ++k) {
      const float x = emb[k];
      const float* w = W.value.data() + (off + k) * r;
      float* gw = W.grad.data() + (off + k) * r;
      float acc = 0.0f;
      for (std::size_t o = 0; o < r; ++o) {
        gw[o] += x * s.dpre[o];
        acc += w[o] * s.dpre[o];
      }
      gemb[k] += acc;
    }
  }
}

void check_data(const ArgnModel& m, const EncodedTable& data) {
  if (data.width() != m.width())
    throw EncodingError("data has " + std::to_string(data.width()) + " sub-columns, model expects " +
                        std::to_string(m.width()));
  for (std::size_t j = 0; j < m.width(); ++j)
    if (data.sub_columns[j].cardinality != m.sub_columns()[j].cardinality)
      throw EncodingError("sub-column '" + data.sub_columns[j].name + "' cardinality mismatch");
}

}  // namespace

void column_logits(const ArgnModel& model, std::span<const std::int32_t> row, std::span<const std::size_t> rank,
                   std::size_t sub_column, std::span<float> logits) {
  std::vector<float> hidden(model.sizes().regressor[sub_column]);
  regressor_forward(model, row, rank, sub_column, hidden);
  predictor_forward(model, sub_column, hidden, logits);
}

std::vector<float> forward_column(const ArgnModel& model, std::span<const float> context, std::size_t sub_column,
                                  bool train_mode, Rng& rng) {
  if (context.size() != model.context_width())
    throw NumericError("context width " + std::to_string(context.size()) + ", model expects " +
                       std::to_string(model.context_width()));
  const auto& W = model.param(sub_column, ArgnModel::kRegressorW);
  const auto& b = model.param(sub_column, ArgnModel::kRegressorB);
  std::vector<float> hidden(W.cols);
  dense_forward<float>(context, W.value, b.value, Activation::relu, hidden);
  if (train_mode && model.train_config.dropout_rate > 0.0) {
    std::vector<float> mask(hidden.size());
    apply_dropout(hidden, model.train_config.dropout_rate, rng, mask);
  }
  std::vector<float> logits(model.sizes().predictor[sub_column]);
  predictor_forward(model, sub_column, hidden, logits);
  std::vector<float> p(logits.size());
  softmax<float>(logits, p);
  return p;
}

double negative_log_likelihood(const ArgnModel& model, const EncodedTable& data, std::span<const std::size_t> rows,
                               std::span<const std::size_t> order) {
  check_data(model, data);
  const auto rank = order_ranks(order, model.width());
  if (rows.empty()) return 0.0;
  Scratch s;
  double total = 0.0;
  for (std::size_t r : rows) {
    const auto row = data.row(r);
    for (std::size_t i = 0; i < model.width(); ++i) {
      s.hidden.resize(model.sizes().regressor[i]);
      s.logits.resize(model.sizes().predictor[i]);
      s.dlogits.resize(s.logits.size());
      regressor_forward(model, row, rank, i, s.hidden);
      predictor_forward(model, i, s.hidden, s.logits);
      total += softmax_cross_entropy<float>(s.logits, static_cast<std::size_t>(row[i]), s.dlogits);
    }
  }
  return total / static_cast<double>(rows.size());
}

double negative_log_likelihood(const ArgnModel& model, const EncodedTable& data, std::span<const std::size_t> order) {
  std::vector<std::size_t> rows(data.row_count);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return negative_log_likelihood(model, data, rows, order);
}

double batch_loss(ArgnModel& model, const EncodedTable& data, std::span<const std::size_t> rows,
                  std::span<const std::size_t> order, double dropout_rate, Rng& rng, bool accumulate) {
  check_data(model, data);
  const auto rank = order_ranks(order, model.width());
  if (rows.empty()) return 0.0;
  const float scale = 1.0f / static_cast<float>(rows.size());
  Scratch s;
  double total = 0.0;
  for (std::size_t r : rows) {
    const auto row = data.row(r);
    for (std::size_t i = 0; i < model.width(); ++i) {
      const std::size_t rw = model.sizes().regressor[i];
      s.hidden.resize(rw);
      s.dpre.resize(rw);
      s.logits.resize(model.sizes().predictor[i]);
      s.dlogits.resize(s.logits.size());
      regressor_forward(model, row, rank, i, s.hidden);
      if (dropout_rate > 0.0) {
        s.mask.resize(rw);
        apply_dropout(s.hidden, dropout_rate, rng, s.mask);
      } else {
        s.mask.clear();
      }
      predictor_forward(model, i, s.hidden, s.logits);
      total += softmax_cross_entropy<float>(s.logits, static_cast<std::size_t>(row[i]), s.dlogits);
      if (accumulate) {
        for (auto& g : s.dlogits) g *= scale;
        column_backward(model, row, rank, i, s);
      }
    }
  }
  return total / static_cast<double>(rows.size());
}

TrainResult train(ArgnModel model, const EncodedTable& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  data.check();
  check_data(model, data);
  const std::size_t n = data.row_count;
  if (n < 10) throw ConfigError("training needs at least 10 rows, got " + std::to_string(n));
  if (cfg.patience_stop <= cfg.patience_lr)
    std::clog << "warning: patience_stop (" << cfg.patience_stop << ") <= patience_lr (" << cfg.patience_lr
              << "); the learning rate will never be halved before stopping\n";
  model.train_config = cfg;

  Rng split_rng(derive_seed(cfg.seed, 1));
  auto perm = random_permutation(n, split_rng);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(n))));
  std::vector<std::size_t> val_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_rows(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(val_rows.begin(), val_rows.end());

  const std::size_t D = model.width();
  const std::vector<std::size_t> eval_order = model.fixed_order();
  Adam adam;
  double lr = cfg.initial_lr;
  EarlyStopping stopper(cfg.patience_stop, cfg.patience_lr);
  std::vector<std::vector<float>> best;
  TrainingMeta meta;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, 2, static_cast<std::uint64_t>(epoch)));
    auto order_rows = train_rows;
    rng.shuffle(order_rows);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order_rows.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order_rows.size(), start + cfg.batch_size);
      std::span<const std::size_t> batch(order_rows.data() + start, end - start);
      std::vector<std::size_t> order = eval_order;
      if (model.order_mode() == OrderMode::any_order) order = random_permutation(D, rng);

      double loss = 0.0;
      if (cfg.dp.enabled) {
        DpAccumulator acc(model.parameter_count(), cfg.dp);
        for (std::size_t r : batch) {
          zero_grads(model.params());
          loss += batch_loss(model, data, std::span<const std::size_t>(&r, 1), order, cfg.dropout_rate, rng, true);
          acc.add(flatten_grads(model.params()));
        }
        loss /= static_cast<double>(batch.size());
        sgd_step(model.params(), acc.finish(rng), lr);
      } else {
        loss = batch_loss(model, data, batch, order, cfg.dropout_rate, rng, true);
        adam.step(model.params(), lr);
      }
      if (!std::isfinite(loss))
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + " (lr=" + std::to_string(lr) + ")");
      epoch_loss += loss;
      ++batches;
    }
    epoch_loss /= static_cast<double>(std::max<std::size_t>(1, batches));
    const double val_loss = negative_log_likelihood(model, data, val_rows, eval_order);
    meta.train_losses.push_back(epoch_loss);
    meta.val_losses.push_back(val_loss);
    meta.learning_rates.push_back(lr);
    meta.epochs_run = epoch;
    if (on_epoch) on_epoch(epoch, epoch_loss, val_loss, lr);

    if (!cfg.early_stopping) continue;
    const auto decision = stopper.observe(val_loss);
    if (decision.improved) {
      best.clear();
      for (const auto& p : model.params()) best.push_back(p.value);
    }
    if (decision.halve_lr) lr *= 0.5;
    if (decision.stop) {
      meta.stopped_early = true;
      break;
    }
  }

  if (cfg.early_stopping) {
    for (std::size_t k = 0; k < best.size(); ++k) model.params()[k].value = best[k];
    meta.best_epoch = stopper.best_epoch();
    meta.best_val_loss = stopper.best_loss();
  } else {
    meta.best_epoch = meta.epochs_run;
    meta.best_val_loss = meta.val_losses.back();
  }
  zero_grads(model.params());
  model.meta = meta;
  return {std::move(model), meta};
}

}  // namespace argn
