#include <fstream>
#include <sstream>

#include "argn/error.hpp"
#include "argn/table.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace argn;

namespace {

RawTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

std::string render(const RawTable& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

}  // namespace

TEST_CASE("read_csv: header names and row count") {
  const auto t = parse("a,b\n1,x\n2,y\n3,z\n");
  CHECK(t.row_count() == 3);
  REQUIRE(t.column_count() == 2);
  CHECK(t.schema.columns[0].name == "a");
  CHECK(t.schema.columns[1].name == "b");
  CHECK(t.rows[2][1] == Cell("z"));
}

TEST_CASE("read_csv: trailing empty field is a missing cell") {
  const auto t = parse("a,b\n1,\n2,y\n");
  CHECK_FALSE(t.rows[0][1].has_value());
  CHECK(t.rows[1][1] == Cell("y"));
}

TEST_CASE("read_csv: ragged row names the line") {
  try {
    parse("a,b\n1,2\n3,4\n5,6,7\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()) == "line 4: expected 2 fields, got 3");
  }
}

TEST_CASE("read_csv: missing file is an I/O error") {
  CHECK_THROWS_AS(read_csv("/nonexistent/argn/file.csv"), IoError);
}

TEST_CASE("read_csv: RFC-4180 quoting, CRLF and BOM") {
  const auto t = parse("\xEF\xBB\xBFname,note\r\n\"Smith, J\",\"said \"\"hi\"\"\"\r\n\"multi\nline\",\"\"\r\n");
  REQUIRE(t.row_count() == 2);
  CHECK(t.schema.columns[0].name == "name");
  CHECK(t.rows[0][0] == Cell("Smith, J"));
  CHECK(t.rows[0][1] == Cell("said \"hi\""));
  CHECK(t.rows[1][0] == Cell("multi\nline"));
  CHECK(t.rows[1][1] == Cell(""));  // quoted empty is present, not missing
}

TEST_CASE("read_csv: ragged row after a multi-line field reports its starting line") {
  try {
    parse("a,b\n\"x\ny\",1\n1,2,3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()) == "line 4: expected 2 fields, got 3");
  }
}

TEST_CASE("write/read round trip is identity") {
  Rng rng(11);
  const char* pool[] = {"plain", "with,comma", "with \"quote\"", "line\nbreak", "", " padded "};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t cols = 1 + rng.below(4);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("c" + std::to_string(c));
    std::vector<std::vector<Cell>> rows(1 + rng.below(8));
    for (auto& row : rows)
      for (std::size_t c = 0; c < cols; ++c)
        row.push_back(rng.bernoulli(0.2) ? Cell() : Cell(pool[rng.below(std::size(pool))]));
    const auto t = make_table(names, rows);
    const auto back = parse(render(t));
    CHECK(back == t);
  }
}

TEST_CASE("infer_schema: spec examples") {
  CHECK(infer_schema(test::column_table("v", {"a", "b", "a"})).columns[0].kind == ColumnKind::categorical);
  const auto num = infer_schema(test::column_table("v", {"1.5", "2", "-3e2"})).columns[0];
  CHECK(num.kind == ColumnKind::numeric);
  CHECK(num.encoding == Encoding::percentile_bins);
  const auto dt = infer_schema(test::column_table("v", {"2021-01-05", "2021-02-06"})).columns[0];
  CHECK(dt.kind == ColumnKind::datetime);
  CHECK(dt.encoding == Encoding::datetime_parts);
}

TEST_CASE("infer_schema: 99% threshold tolerates a stray sentinel") {
  std::vector<std::vector<Cell>> rows;
  for (int i = 0; i < 199; ++i) rows.push_back({Cell(std::to_string(i))});
  rows.push_back({Cell("n/a")});
  auto t = make_table({"v"}, rows);
  CHECK(infer_schema(t).columns[0].kind == ColumnKind::numeric);
  rows.push_back({Cell("n/a")});
  rows.push_back({Cell("n/a")});
  t = make_table({"v"}, rows);
  CHECK(infer_schema(t).columns[0].kind == ColumnKind::categorical);
}

TEST_CASE("infer_schema: low-cardinality integers default to numeric") {
  CHECK(infer_schema(test::column_table("v", {"0", "1", "1", "0"})).columns[0].kind == ColumnKind::numeric);
}

TEST_CASE("infer_schema: null frequency and all-missing column") {
  const auto s = infer_schema(test::column_table("v", {"1", nullptr, "3", nullptr}));
  CHECK(s.columns[0].null_frequency == doctest::Approx(0.5));
  const auto empty = infer_schema(test::column_table("v", {nullptr, nullptr}));
  CHECK(empty.columns[0].kind == ColumnKind::categorical);
}

TEST_CASE("infer_schema: overrides win and unknown columns are rejected") {
  auto t = test::column_table("v", {"1", "2", "3"});
  SchemaOverrides o;
  o["v"] = ColumnSpec{"v", ColumnKind::numeric, Encoding::digit_split};
  CHECK(infer_schema(t, o).columns[0].encoding == Encoding::digit_split);
  o["v"] = ColumnSpec{"v", ColumnKind::categorical, Encoding::category_map};
  CHECK(infer_schema(t, o).columns[0].kind == ColumnKind::categorical);
  SchemaOverrides bad;
  bad["w"] = ColumnSpec{"w"};
  CHECK_THROWS_AS(infer_schema(t, bad), SchemaError);
}

TEST_CASE("infer_schema: latlong pair only through overrides") {
  auto t = make_table({"lat", "lon", "k"}, {{Cell("45"), Cell("90"), Cell("a")}, {Cell("-10"), Cell("20"), Cell("b")}});
  const auto plain = infer_schema(t);
  CHECK(plain.columns[0].kind == ColumnKind::numeric);
  CHECK(plain.columns[1].kind == ColumnKind::numeric);
  SchemaOverrides o;
  ColumnSpec geo{"lat", ColumnKind::latlong, Encoding::quadtile};
  geo.geo_partner = "lon";
  o["lat"] = geo;
  const auto s = infer_schema(t, o);
  CHECK(s.columns[0].kind == ColumnKind::latlong);
  CHECK(s.columns[0].geo_role == GeoRole::latitude);
  CHECK(s.columns[1].kind == ColumnKind::latlong);
  CHECK(s.columns[1].geo_role == GeoRole::longitude);
  CHECK(s.columns[1].geo_partner == "lat");
}

TEST_CASE("ColumnSpec validation: kind and encoding must agree") {
  CHECK_THROWS_AS(validate(ColumnSpec{"v", ColumnKind::categorical, Encoding::percentile_bins}), SchemaError);
  CHECK_THROWS_AS(validate(ColumnSpec{"v", ColumnKind::numeric, Encoding::category_map}), SchemaError);
  CHECK_NOTHROW(validate(ColumnSpec{"v", ColumnKind::numeric, Encoding::digit_split}));
}

TEST_CASE("make_table rejects duplicate names and ragged rows") {
  CHECK_THROWS_AS(make_table({"a", "a"}, {}), SchemaError);
  CHECK_THROWS_AS(make_table({"a", "b"}, {{Cell("1")}}), SchemaError);
}

TEST_CASE("infer_schema is deterministic") {
  const auto t = test::mixed_table(200, 5);
  CHECK(infer_schema(t) == infer_schema(t));
}

TEST_CASE("parse_number rejects non-finite spellings") {
  CHECK(parse_number("1e3") == 1000.0);
  CHECK(parse_number(" -2.5 ") == -2.5);
  CHECK_FALSE(parse_number("inf").has_value());
  CHECK_FALSE(parse_number("nan").has_value());
  CHECK_FALSE(parse_number("1e999").has_value());
  CHECK_FALSE(parse_number("12abc").has_value());
}

TEST_CASE("datetime parsing and epoch conversion agree with a day-count oracle") {
  const auto dt = parse_datetime("2021-03-04T05:06:07");
  REQUIRE(dt);
  CHECK(dt->has_time);
  CHECK(format_datetime(*dt, true) == "2021-03-04T05:06:07");
  CHECK_FALSE(parse_datetime("2021-02-30").has_value());
  CHECK_FALSE(parse_datetime("2021-13-01").has_value());

  // Days since 1970-01-01 counted month by month.
  auto oracle_days = [](int y, int m, int d) {
    long days = 0;
    for (int yy = 1970; yy < y; ++yy) days += (yy % 4 == 0 && (yy % 100 != 0 || yy % 400 == 0)) ? 366 : 365;
    const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
    for (int mm = 1; mm < m; ++mm) days += len[mm - 1] + (mm == 2 && leap ? 1 : 0);
    return days + d - 1;
  };
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    DateTime x;
    x.year = static_cast<int>(rng.between(1970, 2100));
    x.month = static_cast<int>(rng.between(1, 12));
    x.day = static_cast<int>(rng.between(1, days_in_month(x.year, x.month)));
    x.hour = static_cast<int>(rng.between(0, 23));
    x.minute = static_cast<int>(rng.between(0, 59));
    x.second = static_cast<int>(rng.between(0, 59));
    const auto secs = to_epoch_seconds(x);
    CHECK(secs == oracle_days(x.year, x.month, x.day) * 86400L + x.hour * 3600 + x.minute * 60 + x.second);
    auto back = from_epoch_seconds(secs);
    back.has_time = x.has_time;
    CHECK(back == x);
  }
}
