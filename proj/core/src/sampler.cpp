#include "argn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "argn/error.hpp"
#include "argn/parallel.hpp"

namespace argn {

namespace {

constexpr std::uint64_t kDecodeStream = 0xdec0de;

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("temperature must be positive and finite");
}

// Fills the free positions of `row` following `order`; positions flagged in
// `fixed` keep their value.
void sample_row(const ArgnModel& model, std::span<const std::size_t> order, std::span<const std::size_t> rank,
                std::span<const std::uint8_t> fixed, double temperature, Rng& rng, std::span<std::int32_t> row,
                std::vector<float>& logits) {
  for (std::size_t p = 0; p < order.size(); ++p) {
    const std::size_t i = order[p];
    if (fixed[i]) continue;
    logits.resize(model.sizes().predictor[i]);
    column_logits(model, row, rank, i, logits);
    row[i] = sample_category(logits, temperature, rng);
  }
}

}  // namespace

std::int32_t sample_category(std::span<const float> logits, double temperature, Rng& rng) {
  check_temperature(temperature);
  const float m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k)
    p[k] = std::exp(static_cast<double>(logits[k] - m) / temperature);
  return static_cast<std::int32_t>(rng.categorical(std::span<const double>(p)));
}

std::vector<std::size_t> effective_order(const ArgnModel& model, const GenerationRequest& req) {
  std::vector<std::size_t> base = req.order.empty() ? model.fixed_order() : req.order;
  order_ranks(base, model.width());
  std::vector<std::size_t> order;
  for (std::size_t i : base)
    if (req.conditions.contains(i)) order.push_back(i);
  for (std::size_t i : base)
    if (!req.conditions.contains(i)) order.push_back(i);
  if (model.order_mode() == OrderMode::fixed && order != model.fixed_order())
    throw ConfigError("model was trained in fixed order; requested order (after moving conditioned sub-columns "
                      "first) differs from it. Train with order_mode any_order for arbitrary orders.");
  return order;
}

std::map<std::size_t, std::int32_t> conditions_from_raw(const ArgnModel& model,
                                                        const std::map<std::string, std::string>& raw) {
  std::map<std::size_t, std::int32_t> out;
  const auto& enc = model.encoders;
  for (const auto& [column, value] : raw) {
    const ColumnEncoder* ce = enc.find(column);
    if (!ce) throw ConfigError("condition on unknown column '" + column + "'");
    if (const auto* cat = std::get_if<CategoricalEncoder>(&ce->impl); cat && !cat->find(value))
      throw ConfigError("condition value '" + value + "' not in vocabulary of column '" + column + "'");
    if (ce->spec.kind == ColumnKind::latlong)
      throw ConfigError("conditioning on latlong column '" + column + "' is not supported");
    std::vector<Cell> row(enc.schema.columns.size());
    row[ce->source] = value;
    if ((ce->spec.kind == ColumnKind::numeric && !parse_number(value)) ||
        (ce->spec.kind == ColumnKind::datetime && !parse_datetime(value)))
      throw ConfigError("condition value '" + value + "' cannot be parsed for column '" + column + "'");
    std::vector<std::int32_t> codes(ce->width());
    ce->encode_row(row, codes);
    const auto [first, count] = enc.sub_range(column);
    for (std::size_t k = 0; k < count; ++k) out[first + k] = codes[k];
  }
  return out;
}

std::vector<std::size_t> order_from_names(const ArgnModel& model, std::span<const std::string> names) {
  const auto& subs = model.sub_columns();
  std::vector<std::size_t> order;
  std::vector<bool> used(subs.size(), false);
  for (const auto& name : names) {
    bool matched = false;
    for (std::size_t j = 0; j < subs.size(); ++j) {
      if (subs[j].name == name || subs[j].parent == name) {
        if (!used[j]) {
          order.push_back(j);
          used[j] = true;
        }
        matched = true;
      }
    }
    if (!matched) throw ConfigError("order references unknown column '" + name + "'");
  }
  for (std::size_t j = 0; j < subs.size(); ++j)
    if (!used[j]) order.push_back(j);
  return order;
}

EncodedTable generate(const ArgnModel& model, const GenerationRequest& req) {
  check_temperature(req.temperature);
  const std::size_t D = model.width();
  for (const auto& [i, v] : req.conditions) {
    if (i >= D) throw ConfigError("condition on sub-column " + std::to_string(i) + " outside the model");
    if (v < 0 || v >= model.sub_columns()[i].cardinality)
      throw ConfigError("condition value " + std::to_string(v) + " outside the vocabulary of '" +
                        model.sub_columns()[i].name + "'");
  }
  const auto order = effective_order(model, req);
  const auto rank = order_ranks(order, D);
  std::vector<std::uint8_t> fixed(D, 0);
  for (const auto& [i, v] : req.conditions) fixed[i] = 1;

  EncodedTable out;
  out.sub_columns = model.sub_columns();
  out.row_count = req.n_rows;
  out.data.assign(req.n_rows * D, 0);
  parallel_for(req.n_rows, [&](std::size_t r) {
    Rng rng(derive_seed(req.seed, r));
    auto row = out.row(r);
    for (const auto& [i, v] : req.conditions) row[i] = v;
    std::vector<float> logits;
    sample_row(model, order, rank, fixed, req.temperature, rng, row, logits);
  });
  return out;
}

EncodedTable impute(const ArgnModel& model, const EncodedTable& partial, std::span<const std::uint8_t> missing,
                    std::uint64_t seed, double temperature) {
  check_temperature(temperature);
  if (model.order_mode() != OrderMode::any_order)
    throw ConfigError("imputation needs a model trained with order_mode any_order");
  const std::size_t D = model.width();
  if (partial.width() != D) throw EncodingError("imputation input has the wrong number of sub-columns");
  if (missing.size() != partial.data.size()) throw EncodingError("missing mask shape does not match the table");

  EncodedTable out = partial;
  parallel_for(partial.row_count, [&](std::size_t r) {
    const auto miss = missing.subspan(r * D, D);
    std::vector<std::size_t> order;
    std::vector<std::uint8_t> fixed(D, 0);
    for (std::size_t j = 0; j < D; ++j)
      if (!miss[j]) {
        order.push_back(j);
        fixed[j] = 1;
      }
    for (std::size_t j = 0; j < D; ++j)
      if (miss[j]) order.push_back(j);
    const auto rank = order_ranks(order, D);
    auto row = out.row(r);
    for (std::size_t j = 0; j < D; ++j) {
      if (fixed[j] && (row[j] < 0 || row[j] >= model.sub_columns()[j].cardinality))
        throw EncodingError("row " + std::to_string(r) + ": observed index out of range in '" +
                            model.sub_columns()[j].name + "'");
      if (!fixed[j]) row[j] = 0;
    }
    Rng rng(derive_seed(seed, r));
    std::vector<float> logits;
    sample_row(model, order, rank, fixed, temperature, rng, row, logits);
  });
  return out;
}

RawTable synthesize(const ArgnModel& model, const GenerationRequest& req) {
  if (model.encoders.columns.empty()) throw ConfigError("model has no fitted encoders; cannot decode");
  const EncodedTable encoded = generate(model, req);
  Rng rng(derive_seed(req.seed, kDecodeStream));
  return decode_table(encoded, model.encoders, rng);
}

}  // namespace argn
