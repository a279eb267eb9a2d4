#include "argn/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "argn/error.hpp"

namespace argn {

bool is_numeric_kind(ColumnKind kind) { return kind != ColumnKind::categorical; }

std::optional<double> numeric_cell(const ColumnSpec& spec, const Cell& cell) {
  if (!cell) return std::nullopt;
  if (spec.kind == ColumnKind::datetime) {
    const auto dt = parse_datetime(*cell);
    if (!dt) return std::nullopt;
    return static_cast<double>(to_epoch_seconds(*dt));
  }
  return parse_number(*cell);
}

std::vector<std::optional<double>> numeric_column(const RawTable& table, std::size_t c) {
  std::vector<std::optional<double>> out;
  out.reserve(table.row_count());
  const auto& spec = table.schema.columns[c];
  for (const auto& row : table.rows) out.push_back(numeric_cell(spec, row[c]));
  return out;
}

FeatureEncoder FeatureEncoder::fit(const RawTable& table, Options options) {
  const RawTable* tables[] = {&table};
  return fit(std::span<const RawTable* const>(tables), options);
}

FeatureEncoder FeatureEncoder::fit(std::span<const RawTable* const> tables, Options options) {
  if (tables.empty()) throw ConfigError("feature encoder needs at least one table");
  FeatureEncoder enc;
  enc.schema = tables[0]->schema;
  enc.options = options;
  for (const RawTable* t : tables)
    if (t->column_count() != enc.schema.columns.size()) throw SchemaError("feature encoder: tables disagree on width");
  for (std::size_t c = 0; c < enc.schema.columns.size(); ++c) {
    Column col;
    col.source = c;
    col.numeric = is_numeric_kind(enc.schema.columns[c].kind);
    if (col.numeric) {
      bool any = false;
      for (const RawTable* t : tables)
        for (const auto& row : t->rows) {
          const auto v = numeric_cell(enc.schema.columns[c], row[c]);
          if (!v) continue;
          col.lo = any ? std::min(col.lo, *v) : *v;
          col.hi = any ? std::max(col.hi, *v) : *v;
          any = true;
        }
      col.width = 1 + (options.missing_indicator ? 1 : 0);
    } else {
      std::map<std::string, bool> seen;
      bool has_missing = false;
      for (const RawTable* t : tables)
        for (const auto& row : t->rows) {
          if (row[c]) seen.emplace(*row[c], true);
          else has_missing = true;
        }
      for (const auto& [v, _] : seen) col.categories.emplace_back(v);
      if (has_missing) col.categories.emplace_back(std::nullopt);
      col.width = col.categories.size() + (options.other_bucket ? 1 : 0);
    }
    col.offset = enc.dim;
    enc.dim += col.width;
    enc.columns.push_back(std::move(col));
  }
  enc.build_index();
  return enc;
}

void FeatureEncoder::build_index() {
  index_.assign(columns.size(), {});
  missing_slot_.assign(columns.size(), SIZE_MAX);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& col = columns[k];
    for (std::size_t i = 0; i < col.categories.size(); ++i) {
      if (col.categories[i]) index_[k].emplace(*col.categories[i], i);
      else missing_slot_[k] = i;
    }
  }
}

FeatureEncoder FeatureEncoder::without(std::size_t source_column) const {
  FeatureEncoder out;
  out.schema = schema;
  out.options = options;
  for (const auto& col : columns) {
    if (col.source == source_column) continue;
    Column c = col;
    c.offset = out.dim;
    out.dim += c.width;
    out.columns.push_back(std::move(c));
  }
  out.build_index();
  return out;
}

void FeatureEncoder::encode(std::span<const Cell> row, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& col = columns[k];
    const Cell& cell = row[col.source];
    if (col.numeric) {
      const auto v = numeric_cell(schema.columns[col.source], cell);
      if (v) {
        const double range = col.hi - col.lo;
        out[col.offset] = range > 0.0 ? (*v - col.lo) / range : 0.0;
      } else if (options.missing_indicator) {
        out[col.offset + 1] = 1.0;
      }
    } else {
      std::size_t slot = SIZE_MAX;
      if (!cell) {
        slot = missing_slot_[k];
      } else if (auto it = index_[k].find(*cell); it != index_[k].end()) {
        slot = it->second;
      }
      if (slot != SIZE_MAX) out[col.offset + slot] = 1.0;
      else if (options.other_bucket) out[col.offset + col.categories.size()] = 1.0;
    }
  }
}

Matrix FeatureEncoder::encode(const RawTable& table) const {
  Matrix m(table.row_count(), dim);
  for (std::size_t r = 0; r < table.row_count(); ++r) encode(table.rows[r], m.row(r));
  return m;
}

}  // namespace argn
