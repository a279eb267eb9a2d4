// Internal JSON mapping for config and persisted structures.
#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include "argn/audit.hpp"
#include "argn/discretize.hpp"
#include "argn/error.hpp"
#include "argn/model.hpp"
#include "argn/value_protect.hpp"
#include "json.hpp"

namespace argn::json_io {

using nlohmann::json;

/// Rejects keys outside `allowed`, naming the first offender.
void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where);

template <typename T>
constexpr std::string_view type_name() {
  if constexpr (std::is_same_v<T, bool>) return "boolean";
  else if constexpr (std::is_integral_v<T>) return "integer";
  else if constexpr (std::is_floating_point_v<T>) return "number";
  else if constexpr (std::is_same_v<T, std::string>) return "string";
  else return "value";
}

/// Reads obj[key] into `out` when present; type errors name the key.
template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": expected " + std::string(type_name<T>()) + ", got " +
                      it->type_name());
  }
}

// Doubles that may be non-finite are stored as strings.
json real(double v);
double real(const json& j);

json to_json(const ColumnSpec& spec);
ColumnSpec column_spec_from_json(const json& j, std::string name);
json to_json(const TableSchema& schema);
TableSchema schema_from_json(const json& j);

json to_json(const ColumnEncoder& enc);
ColumnEncoder column_encoder_from_json(const json& j);
json to_json(const TableEncoder& enc);
TableEncoder table_encoder_from_json(const json& j);

json to_json(const TrainConfig& cfg);
void from_json_strict(const json& j, TrainConfig& cfg);
json to_json(const DpConfig& cfg);
void from_json_strict(const json& j, DpConfig& cfg);
json to_json(const ValueProtectionConfig& cfg);
void from_json_strict(const json& j, ValueProtectionConfig& cfg);
json to_json(const EncoderOptions& opts);
void from_json_strict(const json& j, EncoderOptions& opts);
json to_json(const AuditConfig& cfg);
void from_json_strict(const json& j, AuditConfig& cfg);
json to_json(const TrainingMeta& meta);
TrainingMeta training_meta_from_json(const json& j);

}  // namespace argn::json_io
