#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "argn/audit.hpp"
#include "argn/discretize.hpp"
#include "argn/model.hpp"
#include "argn/table.hpp"
#include "argn/value_protect.hpp"

namespace argn {

struct GenerationDefaults {
  std::size_t n_rows = 0;  // 0: same as the training table
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

/// Run configuration document. Keys: data, overrides, value_protection,
/// encoding, train, dp, generation, audit. Unknown keys are rejected.
struct RunConfig {
  std::optional<std::string> data;
  SchemaOverrides overrides;
  ValueProtectionConfig value_protection;
  EncoderOptions encoding;
  TrainConfig train;
  GenerationDefaults generation;
  AuditConfig audit;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& cfg);

/// Value protection, encoder fitting and training on a table whose schema is
/// already set.
ArgnModel fit_argn(const RawTable& data, const ValueProtectionConfig& protection, const EncoderOptions& encoding,
                   const TrainConfig& train, const EpochCallback& on_epoch = {});

/// Generator for shadow audits: fits a fresh model on each shadow set and
/// samples as many rows as it was trained on. Seeds are taken from the call.
ShadowGenerator argn_shadow_generator(ValueProtectionConfig protection, EncoderOptions encoding, TrainConfig train);

}  // namespace argn
