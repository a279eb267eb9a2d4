#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argn/discretize.hpp"
#include "argn/rng.hpp"
#include "argn/tensor.hpp"

namespace argn {

enum class OrderMode { fixed, any_order };
std::string_view to_string(OrderMode mode);
OrderMode order_mode_from_string(std::string_view s);

/// Per sub-column layer widths derived from its cardinality d:
/// embedding ceil(3 d^0.25), regressor ceil(16 max(1, ln d)), predictor d.
struct LayerSizes {
  std::vector<std::size_t> embedding;
  std::vector<std::size_t> regressor;
  std::vector<std::size_t> predictor;

  std::size_t context_width() const;
  bool operator==(const LayerSizes&) const = default;
};

LayerSizes compute_layer_sizes(std::span<const std::int32_t> cardinalities);

struct TrainConfig {
  std::size_t batch_size = 256;
  double initial_lr = 1e-3;
  int patience_stop = 5;
  int patience_lr = 3;
  int max_epochs = 200;
  double dropout_rate = 0.25;
  double val_fraction = 0.10;
  OrderMode order_mode = OrderMode::any_order;
  /// When false: no stopping, no LR halving, final weights kept.
  bool early_stopping = true;
  DpConfig dp;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainingMeta {
  int epochs_run = 0;
  int best_epoch = 0;  // 1-based; 0 before training
  double best_val_loss = 0.0;
  bool stopped_early = false;
  std::vector<double> train_losses;
  std::vector<double> val_losses;
  std::vector<double> learning_rates;

  bool operator==(const TrainingMeta&) const = default;
};

/// Patience bookkeeping: the learning rate halves after every `patience_lr`
/// consecutive epochs without improvement, training stops after `patience_stop`.
class EarlyStopping {
 public:
  struct Decision {
    bool improved = false;
    bool halve_lr = false;
    bool stop = false;
  };

  EarlyStopping(int patience_stop, int patience_lr) : patience_stop_(patience_stop), patience_lr_(patience_lr) {}

  Decision observe(double val_loss);
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_stop_;
  int patience_lr_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_loss_ = 0.0;
};

/// The flat autoregressive model. Parameters for sub-column i live at
/// params[5*i .. 5*i+4] in the order embedding, regressor W, regressor b,
/// predictor W, predictor b.
class ArgnModel {
 public:
  enum Slot : std::size_t { kEmbedding = 0, kRegressorW = 1, kRegressorB = 2, kPredictorW = 3, kPredictorB = 4 };
  static constexpr std::size_t kSlots = 5;

  /// Allocates and initialises parameters: weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
  static ArgnModel create(std::vector<SubColumn> sub_columns, OrderMode mode, std::uint64_t seed);

  std::size_t width() const { return sub_columns_.size(); }
  const std::vector<SubColumn>& sub_columns() const { return sub_columns_; }
  const LayerSizes& sizes() const { return sizes_; }
  std::size_t context_width() const { return context_width_; }
  std::size_t slot_offset(std::size_t j) const { return slot_offsets_[j]; }
  OrderMode order_mode() const { return order_mode_; }
  const std::vector<std::size_t>& fixed_order() const { return fixed_order_; }

  ParamTensor& param(std::size_t sub_column, Slot slot) { return params_[sub_column * kSlots + slot]; }
  const ParamTensor& param(std::size_t sub_column, Slot slot) const { return params_[sub_column * kSlots + slot]; }
  std::vector<ParamTensor>& params() { return params_; }
  const std::vector<ParamTensor>& params() const { return params_; }
  std::size_t parameter_count() const { return total_size(params_); }

  /// Fitted encoders; empty when the model was built directly from encoded data.
  TableEncoder encoders;
  TrainConfig train_config;
  TrainingMeta meta;

  /// Rebuilds derived layout (sizes, offsets) and allocates zeroed parameters.
  void set_layout(std::vector<SubColumn> sub_columns, OrderMode mode, std::vector<std::size_t> fixed_order);
  bool operator==(const ArgnModel&) const;

 private:
  std::vector<SubColumn> sub_columns_;
  LayerSizes sizes_;
  std::size_t context_width_ = 0;
  std::vector<std::size_t> slot_offsets_;
  OrderMode order_mode_ = OrderMode::fixed;
  std::vector<std::size_t> fixed_order_;
  std::vector<ParamTensor> params_;
};

/// Full-width context for predicting `sub_column`: slot j holds embeddings[j]
/// when j precedes `sub_column` in `order`, zeros otherwise.
std::vector<float> masked_context(std::span<const std::vector<float>> embeddings, std::span<const std::size_t> order,
                                  std::size_t sub_column);

/// Embedding rows for one encoded row, in canonical order.
std::vector<std::vector<float>> row_embeddings(const ArgnModel& model, std::span<const std::int32_t> row);

/// p(x_i | context) = softmax(V relu_dropout(W context + b) + c). Dropout only in train mode.
std::vector<float> forward_column(const ArgnModel& model, std::span<const float> context, std::size_t sub_column,
                                  bool train_mode, Rng& rng);

/// rank[j] = position of sub-column j in `order`. Throws if order is not a permutation of 0..D-1.
std::vector<std::size_t> order_ranks(std::span<const std::size_t> order, std::size_t width);

/// Mean over rows of the summed per-sub-column negative log-likelihood under `order`.
double negative_log_likelihood(const ArgnModel& model, const EncodedTable& data, std::span<const std::size_t> order);
double negative_log_likelihood(const ArgnModel& model, const EncodedTable& data, std::span<const std::size_t> rows,
                               std::span<const std::size_t> order);

/// Mean summed cross-entropy over `rows` under `order` with the given dropout
/// rate. When `accumulate` is set, adds d(mean loss)/d(theta) into the grads.
double batch_loss(ArgnModel& model, const EncodedTable& data, std::span<const std::size_t> rows,
                  std::span<const std::size_t> order, double dropout_rate, Rng& rng, bool accumulate);

/// Per-column logits for one row under visibility ranks; used by the sampler.
void column_logits(const ArgnModel& model, std::span<const std::int32_t> row, std::span<const std::size_t> rank,
                   std::size_t sub_column, std::span<float> logits);

struct TrainResult {
  ArgnModel model;
  TrainingMeta meta;
};

/// Optional per-epoch hook (epoch, train loss, val loss, lr) for logging.
using EpochCallback = std::function<void(int, double, double, double)>;

TrainResult train(ArgnModel model, const EncodedTable& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace argn
