#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "argn/rng.hpp"
#include "argn/table.hpp"

namespace argn {

inline constexpr std::string_view kRareToken = "_RARE_";

/// One discrete unit the model predicts. Sub-columns of one parent are contiguous.
struct SubColumn {
  std::string name;
  std::int32_t cardinality = 1;
  std::string parent;

  bool operator==(const SubColumn&) const = default;
};

/// Row-major grid of category indices, one column per sub-column.
struct EncodedTable {
  std::vector<SubColumn> sub_columns;
  std::vector<std::int32_t> data;
  std::size_t row_count = 0;

  std::size_t width() const { return sub_columns.size(); }
  std::int32_t at(std::size_t row, std::size_t col) const { return data[row * width() + col]; }
  std::span<const std::int32_t> row(std::size_t r) const {
    return {data.data() + r * width(), width()};
  }
  std::span<std::int32_t> row(std::size_t r) { return {data.data() + r * width(), width()}; }
  std::vector<std::int32_t> cardinalities() const;

  /// Throws EncodingError if any index is outside its sub-column's range.
  void check() const;
  bool operator==(const EncodedTable&) const = default;
};

/// Distinct values in descending frequency (ties lexicographic); MISSING is the last index.
struct CategoricalEncoder {
  std::vector<std::string> categories;

  static CategoricalEncoder fit(std::span<const Cell> values);

  std::int32_t cardinality() const { return static_cast<std::int32_t>(categories.size()) + 1; }
  std::int32_t missing_index() const { return static_cast<std::int32_t>(categories.size()); }
  std::optional<std::int32_t> find(std::string_view value) const;
  /// Unseen values map to _RARE_ when that category exists, otherwise throw.
  std::int32_t encode(const Cell& value) const;
  Cell decode(std::int32_t index) const;

  void rebuild_index();
  bool operator==(const CategoricalEncoder& o) const { return categories == o.categories; }

 private:
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Quantile bins: half-open [e_j, e_j+1), last bin closed, plus a MISSING category.
struct PercentileEncoder {
  std::vector<double> edges;  // strictly increasing
  bool integral = false;      // all fitted values were integers

  static PercentileEncoder fit(std::span<const std::optional<double>> values, int n_bins = 100);

  std::int32_t bin_count() const { return edges.size() <= 1 ? 1 : static_cast<std::int32_t>(edges.size()) - 1; }
  std::int32_t cardinality() const { return bin_count() + 1; }
  std::int32_t missing_index() const { return bin_count(); }
  std::int32_t encode(std::optional<double> v) const;
  /// Uniform draw inside the bin; integral columns draw integers when the bin holds one.
  std::optional<double> decode(std::int32_t index, Rng& rng) const;

  bool operator==(const PercentileEncoder&) const = default;
};

/// Optional sign sub-column, then one base-10 sub-column per digit, most significant first.
struct DigitEncoder {
  bool has_sign = false;
  int integer_digits = 1;
  int decimals = 0;

  static constexpr int kMaxDecimals = 6;
  static DigitEncoder fit(std::span<const std::optional<double>> values);

  std::size_t width() const { return (has_sign ? 1 : 0) + static_cast<std::size_t>(integer_digits + decimals); }
  std::vector<std::int32_t> cardinalities() const;
  /// MISSING lives on the leading sub-column.
  std::int32_t missing_index() const { return has_sign ? 2 : 10; }
  void encode(std::optional<double> v, std::span<std::int32_t> out) const;
  std::optional<double> decode(std::span<const std::int32_t> digits) const;
  std::vector<std::string> sub_column_suffixes() const;

  bool operator==(const DigitEncoder&) const = default;
};

enum class DatePart { year, month, day, hour, minute, second };
std::string_view to_string(DatePart part);
DatePart date_part_from_string(std::string_view s);

/// One categorical sub-column per varying date part; constant parts are stored.
struct DatetimeEncoder {
  std::vector<DatePart> parts;
  DateTime constant;  // values of parts that do not vary
  int min_year = 1970;
  int max_year = 1970;
  bool with_time = false;

  static DatetimeEncoder fit(std::span<const std::optional<DateTime>> values);

  std::vector<std::int32_t> cardinalities() const;
  std::int32_t missing_index() const { return part_cardinality(parts.front()); }
  void encode(const std::optional<DateTime>& v, std::span<std::int32_t> out) const;
  /// Day is clamped to the length of the decoded month.
  std::optional<DateTime> decode(std::span<const std::int32_t> parts_in) const;
  std::int32_t part_cardinality(DatePart part) const;

  bool operator==(const DatetimeEncoder&) const = default;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

struct GeoBox {
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
};

/// Adaptive quadtree over the plain lat/lon rectangle. Digits: 0=NW 1=NE 2=SW 3=SE.
struct QuadtileEncoder {
  std::vector<std::string> leaves;    // sorted; index = category
  std::set<std::string> internal;     // keys that were split

  static QuadtileEncoder fit(std::span<const std::optional<GeoPoint>> points,
                             std::size_t min_tile_count = 100, int max_depth = 12);

  std::int32_t cardinality() const { return static_cast<std::int32_t>(leaves.size()) + 1; }
  std::int32_t missing_index() const { return static_cast<std::int32_t>(leaves.size()); }
  std::string leaf_key(const GeoPoint& p) const;
  std::int32_t encode(const std::optional<GeoPoint>& p) const;
  std::optional<GeoPoint> decode(std::int32_t index, Rng& rng) const;

  static std::string quadkey(const GeoPoint& p, int depth);
  static GeoBox box(std::string_view key);

  void rebuild_index();
  bool operator==(const QuadtileEncoder& o) const { return leaves == o.leaves && internal == o.internal; }

 private:
  std::map<std::string, std::int32_t, std::less<>> index_;
};

using EncoderImpl =
    std::variant<CategoricalEncoder, PercentileEncoder, DigitEncoder, DatetimeEncoder, QuadtileEncoder>;

/// Encoder for one schema column (a latlong pair counts as one column).
struct ColumnEncoder {
  ColumnSpec spec;
  std::size_t source = 0;          // raw column index
  std::size_t partner_source = 0;  // longitude column for latlong
  EncoderImpl impl;

  std::vector<SubColumn> sub_columns() const;
  std::size_t width() const;
  void encode_row(std::span<const Cell> row, std::span<std::int32_t> out) const;
  void decode_row(std::span<const std::int32_t> in, std::vector<Cell>& row, Rng& rng) const;

  bool operator==(const ColumnEncoder&) const = default;
};

struct EncoderOptions {
  int n_bins = 100;
  std::size_t quadtile_min_count = 100;
  int quadtile_max_depth = 12;
};

/// Fitted encoders for a whole table plus the source schema for decoding.
struct TableEncoder {
  TableSchema schema;
  std::vector<ColumnEncoder> columns;

  static TableEncoder fit(const RawTable& table, const EncoderOptions& options = {});

  std::vector<SubColumn> sub_columns() const;
  /// Sub-column index range [first, first+count) for the named parent column.
  std::pair<std::size_t, std::size_t> sub_range(std::string_view parent) const;
  const ColumnEncoder* find(std::string_view parent) const;

  bool operator==(const TableEncoder&) const = default;
};

EncodedTable encode_table(const RawTable& raw, const TableEncoder& encoders);
RawTable decode_table(const EncodedTable& encoded, const TableEncoder& encoders, Rng& rng);

/// Cell parsing under a column's kind; unparsable cells become missing.
std::optional<double> numeric_value(const Cell& cell);
std::optional<DateTime> datetime_value(const Cell& cell);

}  // namespace argn
