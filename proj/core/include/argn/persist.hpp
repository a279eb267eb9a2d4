#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "argn/audit.hpp"
#include "argn/metrics.hpp"
#include "argn/model.hpp"

namespace argn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Layout: "ARGN", u32 version, u64 header length, JSON header, then every
// parameter tensor as little-endian float32 in canonical order.
std::string serialize_model(const ArgnModel& model);
ArgnModel deserialize_model(std::string_view bytes);

void save_model(const ArgnModel& model, const std::filesystem::path& path);
ArgnModel load_model(const std::filesystem::path& path);

std::string to_json(const EvalReport& report);
std::string to_json(const AuditReport& report);
/// Integral, q98 and a 0/1 risk flag (integral > 0).
std::string dcr_summary_json(const DcrCurve& curve);

}  // namespace argn
