#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "argn/discretize.hpp"
#include "argn/model.hpp"

namespace argn {

struct GenerationRequest {
  std::size_t n_rows = 0;
  /// Sub-column order; empty means the model's canonical (or fixed) order.
  std::vector<std::size_t> order;
  /// Sub-column index -> fixed category index.
  std::map<std::size_t, std::int32_t> conditions;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

/// Moves conditioned sub-columns to the front (keeping their relative order)
/// and checks the result against the model's order mode.
std::vector<std::size_t> effective_order(const ArgnModel& model, const GenerationRequest& req);

/// Encodes raw parent-column values into sub-column conditions. Unknown columns
/// and values outside the encoder vocabulary are errors.
std::map<std::size_t, std::int32_t> conditions_from_raw(const ArgnModel& model,
                                                        const std::map<std::string, std::string>& raw);

/// Maps a list of parent-column or sub-column names onto a full sub-column
/// order; unlisted sub-columns follow in canonical order.
std::vector<std::size_t> order_from_names(const ArgnModel& model, std::span<const std::string> names);

/// Row r draws from the substream derived from (seed, r), so rows are independent
/// of n_rows and of each other.
EncodedTable generate(const ArgnModel& model, const GenerationRequest& req);

/// Samples the cells flagged in `missing` (row-major, same shape as `partial`)
/// conditioned on the observed ones. Requires an any_order model.
EncodedTable impute(const ArgnModel& model, const EncodedTable& partial, std::span<const std::uint8_t> missing,
                    std::uint64_t seed, double temperature = 1.0);

/// generate() followed by decode_table() back into the training schema.
RawTable synthesize(const ArgnModel& model, const GenerationRequest& req);

/// One categorical draw from softmax(logits / temperature).
std::int32_t sample_category(std::span<const float> logits, double temperature, Rng& rng);

}  // namespace argn
