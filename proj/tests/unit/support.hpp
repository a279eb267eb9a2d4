// Shared helpers for the unit suites.
#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "argn/rng.hpp"
#include "argn/table.hpp"

namespace test {

inline argn::Cell cell(const char* s) { return s ? argn::Cell(s) : argn::Cell(); }

inline std::vector<argn::Cell> cells(std::initializer_list<const char*> values) {
  std::vector<argn::Cell> out;
  for (const char* v : values) out.push_back(cell(v));
  return out;
}

inline std::vector<std::optional<double>> numbers(std::initializer_list<double> values) {
  return {values.begin(), values.end()};
}

/// Single-column table from string cells (nullptr = missing), schema inferred.
inline argn::RawTable column_table(const std::string& name, std::initializer_list<const char*> values) {
  std::vector<std::vector<argn::Cell>> rows;
  for (const char* v : values) rows.push_back({cell(v)});
  auto t = argn::make_table({name}, std::move(rows));
  t.schema = argn::infer_schema(t);
  return t;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("argn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random mixed table: numeric "x", categorical "c", numeric "y" tied to both.
inline argn::RawTable mixed_table(std::size_t n, std::uint64_t seed) {
  argn::Rng rng(seed);
  std::vector<std::vector<argn::Cell>> rows;
  const char* cats[] = {"red", "green", "blue"};
  for (std::size_t r = 0; r < n; ++r) {
    const double x = rng.uniform(0.0, 10.0);
    const std::size_t k = rng.below(3);
    const double y = 2.0 * x + 5.0 * static_cast<double>(k) + rng.normal();
    rows.push_back({argn::format_number(std::round(x * 100) / 100), std::string(cats[k]),
                    argn::format_number(std::round(y * 100) / 100)});
  }
  auto t = argn::make_table({"x", "c", "y"}, std::move(rows));
  t.schema = argn::infer_schema(t);
  return t;
}

}  // namespace test
