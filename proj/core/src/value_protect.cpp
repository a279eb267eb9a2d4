#include "argn/value_protect.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "argn/discretize.hpp"
#include "argn/error.hpp"

namespace argn {

int Threshold::draw(Rng& rng) const {
  if (!random) {
    if (fixed < 1) throw ConfigError("protection threshold must be >= 1, got " + std::to_string(fixed));
    return fixed;
  }
  if (random_lo < 1 || random_hi < random_lo)
    throw ConfigError("random protection threshold needs 1 <= lo <= hi");
  return static_cast<int>(rng.between(random_lo, random_hi));
}

std::vector<Cell> protect_rare_categories(std::span<const Cell> values, int threshold, RareMode mode, Rng& rng) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : values)
    if (v) ++counts[*v];

  std::vector<std::string> common;
  std::vector<double> weights;
  for (const auto& [value, count] : counts) {
    if (count >= static_cast<std::size_t>(threshold)) {
      common.push_back(value);
      weights.push_back(static_cast<double>(count));
    }
  }

  std::vector<Cell> out(values.begin(), values.end());
  for (auto& v : out) {
    if (!v || counts[*v] >= static_cast<std::size_t>(threshold)) continue;
    if (mode == RareMode::resample && !common.empty()) {
      v = common[rng.categorical(std::span<const double>(weights))];
    } else {
      v = std::string(kRareToken);
    }
  }
  return out;
}

std::vector<std::optional<double>> protect_extreme_values(std::span<const std::optional<double>> values, int k) {
  if (k < 1) throw ConfigError("extreme-value k must be >= 1, got " + std::to_string(k));
  std::set<double> distinct;
  for (const auto& v : values)
    if (v) distinct.insert(*v);
  std::vector<std::optional<double>> out(values.begin(), values.end());
  if (distinct.size() < 2 * static_cast<std::size_t>(k)) return out;
  const double lo = *std::next(distinct.begin(), k - 1);
  const double hi = *std::next(distinct.rbegin(), k - 1);
  for (auto& v : out)
    if (v) v = std::clamp(*v, lo, hi);
  return out;
}

RawTable protect_table(const RawTable& table, const ValueProtectionConfig& cfg) {
  if (!cfg.enabled) return table;
  RawTable out = table;
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    const ColumnSpec& spec = table.schema.columns[c];
    Rng rng(derive_seed(cfg.rng_seed, c));
    const auto cells = table.column(c);
    std::vector<Cell> protected_cells;
    switch (spec.kind) {
      case ColumnKind::categorical:
        protected_cells = protect_rare_categories(cells, cfg.rare_min_count.draw(rng), cfg.rare_mode, rng);
        break;
      case ColumnKind::numeric: {
        std::vector<std::optional<double>> values;
        for (const auto& cell : cells) values.push_back(numeric_value(cell));
        const auto clipped = protect_extreme_values(values, cfg.extreme_k.draw(rng));
        protected_cells = cells;
        for (std::size_t r = 0; r < cells.size(); ++r)
          if (values[r] && clipped[r] != values[r]) protected_cells[r] = format_number(*clipped[r]);
        break;
      }
      case ColumnKind::datetime: {
        std::vector<std::optional<double>> values;
        bool with_time = false;
        for (const auto& cell : cells) {
          const auto dt = datetime_value(cell);
          with_time = with_time || (dt && dt->has_time);
          values.push_back(dt ? std::optional<double>(static_cast<double>(to_epoch_seconds(*dt))) : std::nullopt);
        }
        const auto clipped = protect_extreme_values(values, cfg.extreme_k.draw(rng));
        protected_cells = cells;
        for (std::size_t r = 0; r < cells.size(); ++r)
          if (values[r] && clipped[r] != values[r])
            protected_cells[r] = format_datetime(from_epoch_seconds(static_cast<std::int64_t>(*clipped[r])), with_time);
        break;
      }
      case ColumnKind::latlong:
        continue;
    }
    for (std::size_t r = 0; r < out.rows.size(); ++r) out.rows[r][c] = std::move(protected_cells[r]);
  }
  return out;
}

}  // namespace argn
