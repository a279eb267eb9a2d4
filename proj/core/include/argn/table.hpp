#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace argn {

enum class ColumnKind { categorical, numeric, datetime, latlong };
enum class Encoding { category_map, percentile_bins, digit_split, datetime_parts, quadtile };

// A latlong pair occupies two source columns. The latitude column owns the
// quadtile encoder; the longitude column rides along and produces no sub-columns.
enum class GeoRole { none, latitude, longitude };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(Encoding encoding);
std::string_view to_string(GeoRole role);
ColumnKind column_kind_from_string(std::string_view s);
Encoding encoding_from_string(std::string_view s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  Encoding encoding = Encoding::category_map;
  double null_frequency = 0.0;
  GeoRole geo_role = GeoRole::none;
  std::string geo_partner;  // the other half of a latlong pair

  bool operator==(const ColumnSpec&) const = default;
};

/// Throws SchemaError when kind and encoding disagree.
void validate(const ColumnSpec& spec);

struct TableSchema {
  std::vector<ColumnSpec> columns;
  std::size_t row_count = 0;

  std::optional<std::size_t> index_of(std::string_view name) const;
  bool operator==(const TableSchema&) const = default;
};

using Cell = std::optional<std::string>;

/// Row-major grid of optional strings; std::nullopt marks a missing cell.
struct RawTable {
  TableSchema schema;
  std::vector<std::vector<Cell>> rows;

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return schema.columns.size(); }
  std::vector<Cell> column(std::size_t c) const;
  bool operator==(const RawTable&) const = default;
};

/// Builds a RawTable whose schema carries the given names, all categorical.
RawTable make_table(std::vector<std::string> names, std::vector<std::vector<Cell>> rows);

RawTable read_csv(const std::filesystem::path& path, char delimiter = ',');
RawTable parse_csv(std::istream& in, char delimiter = ',');
void write_csv(const RawTable& table, const std::filesystem::path& path, char delimiter = ',');
void write_csv(const RawTable& table, std::ostream& out, char delimiter = ',');

/// Overrides keyed by column name. For a latlong pair, key the latitude column
/// and set geo_partner to the longitude column's name.
using SchemaOverrides = std::map<std::string, ColumnSpec>;

TableSchema infer_schema(const RawTable& table, const SchemaOverrides& overrides = {});

/// Applies `schema` to `table` after checking that names line up.
RawTable with_schema(RawTable table, const TableSchema& schema);

// Value parsing shared by ingestion, encoders and metrics.

/// Decimal number (optional sign, fraction, exponent). Rejects inf/nan and trailing junk.
std::optional<double> parse_number(std::string_view s);

struct DateTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;
  bool has_time = false;

  bool operator==(const DateTime&) const = default;
};

/// ISO-8601 "YYYY-MM-DD" with an optional "THH:MM[:SS]" or " HH:MM[:SS]" suffix.
std::optional<DateTime> parse_datetime(std::string_view s);
std::string format_datetime(const DateTime& dt, bool with_time);
int days_in_month(int year, int month);
/// Seconds since 1970-01-01T00:00:00 (proleptic Gregorian, no time zone).
std::int64_t to_epoch_seconds(const DateTime& dt);
DateTime from_epoch_seconds(std::int64_t seconds);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace argn
