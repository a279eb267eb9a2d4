#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "argn/table.hpp"

namespace argn {

/// Numeric view of a cell under a column kind: numbers parse directly,
/// datetimes become epoch seconds, latlong halves are plain numbers.
std::optional<double> numeric_cell(const ColumnSpec& spec, const Cell& cell);
bool is_numeric_kind(ColumnKind kind);
std::vector<std::optional<double>> numeric_column(const RawTable& table, std::size_t c);

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// One-hot categoricals and min-max scaled numerics. Missing categorical cells
/// are their own category. Ranges and vocabularies come from the fit tables.
struct FeatureEncoder {
  struct Options {
    bool other_bucket = false;       // extra slot for categories unseen at fit time
    bool missing_indicator = false;  // extra 0/1 slot for missing numerics
  };

  struct Column {
    std::size_t source = 0;
    bool numeric = false;
    std::vector<std::optional<std::string>> categories;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t offset = 0;
    std::size_t width = 0;
  };

  TableSchema schema;
  Options options;
  std::vector<Column> columns;
  std::size_t dim = 0;

  static FeatureEncoder fit(std::span<const RawTable* const> tables, Options options);
  static FeatureEncoder fit(const RawTable& table, Options options);
  static FeatureEncoder fit(const RawTable& table) { return fit(table, Options{}); }

  void encode(std::span<const Cell> row, std::span<double> out) const;
  Matrix encode(const RawTable& table) const;
  /// Copy with one source column dropped, e.g. a prediction target.
  FeatureEncoder without(std::size_t source_column) const;

 private:
  std::vector<std::unordered_map<std::string, std::size_t>> index_;
  std::vector<std::size_t> missing_slot_;
  void build_index();
};

}  // namespace argn
