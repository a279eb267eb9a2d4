#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "argn/rng.hpp"
#include "argn/table.hpp"

namespace argn {

enum class RareMode { token, resample };

/// A threshold is either fixed or drawn uniformly from [lo, hi] once per column.
struct Threshold {
  int fixed = 8;
  bool random = false;
  int random_lo = 5;
  int random_hi = 8;

  static Threshold constant(int k) { return {k, false, 5, 8}; }
  static Threshold uniform(int lo = 5, int hi = 8) { return {0, true, lo, hi}; }
  int draw(Rng& rng) const;
};

struct ValueProtectionConfig {
  bool enabled = false;
  Threshold rare_min_count = Threshold::constant(8);
  Threshold extreme_k = Threshold::constant(8);
  RareMode rare_mode = RareMode::token;
  std::uint64_t rng_seed = 0;
};

/// Values seen fewer than `threshold` times become _RARE_ (token mode) or a draw
/// from the surviving categories' empirical distribution (resample mode).
std::vector<Cell> protect_rare_categories(std::span<const Cell> values, int threshold, RareMode mode, Rng& rng);

/// Clips to the k-th smallest and k-th largest distinct values. Columns with
/// fewer than 2k distinct values come back unchanged.
std::vector<std::optional<double>> protect_extreme_values(std::span<const std::optional<double>> values, int k);

/// Applies both protections column-wise according to the schema kinds.
/// Latlong columns are left untouched.
RawTable protect_table(const RawTable& table, const ValueProtectionConfig& cfg);

}  // namespace argn
