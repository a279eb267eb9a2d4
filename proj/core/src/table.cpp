#include "argn/table.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "argn/error.hpp"

namespace argn {

namespace {

constexpr double kTypeThreshold = 0.99;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses exactly `n` digits at s[pos..pos+n).
std::optional<int> fixed_digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!is_digit(s[pos + k])) return std::nullopt;
    v = v * 10 + (s[pos + k] - '0');
  }
  return v;
}

bool needs_quotes(const std::string& s, char delimiter) {
  if (s.empty()) return true;
  return s.find_first_of(std::string{delimiter, '"', '\r', '\n'}) != std::string::npos;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::datetime: return "datetime";
    case ColumnKind::latlong: return "latlong";
  }
  return "?";
}

std::string_view to_string(Encoding encoding) {
  switch (encoding) {
    case Encoding::category_map: return "category_map";
    case Encoding::percentile_bins: return "percentile_bins";
    case Encoding::digit_split: return "digit_split";
    case Encoding::datetime_parts: return "datetime_parts";
    case Encoding::quadtile: return "quadtile";
  }
  return "?";
}

std::string_view to_string(GeoRole role) {
  switch (role) {
    case GeoRole::none: return "none";
    case GeoRole::latitude: return "latitude";
    case GeoRole::longitude: return "longitude";
  }
  return "?";
}

ColumnKind column_kind_from_string(std::string_view s) {
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "datetime") return ColumnKind::datetime;
  if (s == "latlong") return ColumnKind::latlong;
  throw SchemaError("unknown column kind '" + std::string(s) + "'");
}

Encoding encoding_from_string(std::string_view s) {
  if (s == "category_map") return Encoding::category_map;
  if (s == "percentile_bins") return Encoding::percentile_bins;
  if (s == "digit_split") return Encoding::digit_split;
  if (s == "datetime_parts") return Encoding::datetime_parts;
  if (s == "quadtile") return Encoding::quadtile;
  throw SchemaError("unknown encoding '" + std::string(s) + "'");
}

void validate(const ColumnSpec& spec) {
  auto bad = [&] {
    throw SchemaError("column '" + spec.name + "': kind " + std::string(to_string(spec.kind)) +
                      " cannot use encoding " + std::string(to_string(spec.encoding)));
  };
  switch (spec.kind) {
    case ColumnKind::categorical:
      if (spec.encoding != Encoding::category_map) bad();
      break;
    case ColumnKind::numeric:
      if (spec.encoding != Encoding::percentile_bins && spec.encoding != Encoding::digit_split) bad();
      break;
    case ColumnKind::datetime:
      if (spec.encoding != Encoding::datetime_parts) bad();
      break;
    case ColumnKind::latlong:
      if (spec.encoding != Encoding::quadtile) bad();
      if (spec.geo_role == GeoRole::none || spec.geo_partner.empty())
        throw SchemaError("column '" + spec.name + "': latlong column needs a partner column");
      break;
  }
  if (spec.null_frequency < 0.0 || spec.null_frequency > 1.0)
    throw SchemaError("column '" + spec.name + "': null_frequency outside [0,1]");
}

std::optional<std::size_t> TableSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

std::vector<Cell> RawTable::column(std::size_t c) const {
  std::vector<Cell> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

RawTable make_table(std::vector<std::string> names, std::vector<std::vector<Cell>> rows) {
  RawTable t;
  std::unordered_set<std::string> seen;
  for (auto& n : names) {
    if (!seen.insert(n).second) throw SchemaError("duplicate column name '" + n + "'");
    ColumnSpec spec;
    spec.name = std::move(n);
    t.schema.columns.push_back(std::move(spec));
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != t.schema.columns.size())
      throw SchemaError("row " + std::to_string(r) + ": expected " +
                        std::to_string(t.schema.columns.size()) + " cells, got " +
                        std::to_string(rows[r].size()));
  }
  t.rows = std::move(rows);
  t.schema.row_count = t.rows.size();
  return t;
}

RawTable read_csv(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in, delimiter);
}

RawTable parse_csv(std::istream& in, char delimiter) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure");

  std::vector<std::vector<Cell>> records;
  std::vector<std::size_t> record_lines;
  std::size_t line = 1;
  std::size_t pos = 0;
  const std::size_t n = text.size();
  // Skip a UTF-8 byte order mark.
  if (n >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  while (pos < n) {
    std::vector<Cell> record;
    const std::size_t record_line = line;
    bool end_of_record = false;
    while (!end_of_record) {
      std::string field;
      bool quoted = false;
      if (pos < n && text[pos] == '"') {
        quoted = true;
        ++pos;
        while (true) {
          if (pos >= n) throw ParseError("line " + std::to_string(record_line) + ": unterminated quoted field");
          const char c = text[pos];
          if (c == '"') {
            if (pos + 1 < n && text[pos + 1] == '"') {
              field.push_back('"');
              pos += 2;
              continue;
            }
            ++pos;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++pos;
        }
        if (pos < n && text[pos] != delimiter && text[pos] != '\n' && text[pos] != '\r')
          throw ParseError("line " + std::to_string(line) + ": unexpected character after closing quote");
      } else {
        while (pos < n && text[pos] != delimiter && text[pos] != '\n' && text[pos] != '\r') {
          field.push_back(text[pos]);
          ++pos;
        }
      }
      if (quoted || !field.empty()) {
        record.emplace_back(std::move(field));
      } else {
        record.emplace_back(std::nullopt);
      }
      if (pos >= n) {
        end_of_record = true;
      } else if (text[pos] == delimiter) {
        ++pos;
      } else {
        if (text[pos] == '\r') ++pos;
        if (pos < n && text[pos] == '\n') ++pos;
        ++line;
        end_of_record = true;
      }
    }
    records.push_back(std::move(record));
    record_lines.push_back(record_line);
  }

  if (records.empty()) throw ParseError("line 1: missing header row");
  std::vector<std::string> names;
  for (std::size_t c = 0; c < records[0].size(); ++c) {
    names.push_back(records[0][c].value_or(""));
  }
  const std::size_t width = names.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width)
      throw ParseError("line " + std::to_string(record_lines[r]) + ": expected " +
                       std::to_string(width) + " fields, got " + std::to_string(records[r].size()));
  }
  records.erase(records.begin());
  return make_table(std::move(names), std::move(records));
}

void write_csv(const RawTable& table, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(table, out, delimiter);
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_csv(const RawTable& table, std::ostream& out, char delimiter) {
  auto put = [&](const std::string& s) {
    if (!needs_quotes(s, delimiter)) {
      out << s;
      return;
    }
    out << '"';
    for (char c : s) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  };
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    if (c) out << delimiter;
    put(table.schema.columns[c].name);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << delimiter;
      if (row[c]) put(*row[c]);
    }
    out << '\n';
  }
}

std::optional<double> parse_number(std::string_view s) {
  // Trim surrounding blanks.
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  // from_chars accepts "inf"/"nan"; require a digit or '.' up front.
  const std::size_t first = (s.front() == '-') ? 1 : 0;
  if (first >= s.size() || !(is_digit(s[first]) || s[first] == '.')) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

int days_in_month(int year, int month) {
  using namespace std::chrono;
  const year_month_day_last last{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / std::chrono::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

std::optional<DateTime> parse_datetime(std::string_view s) {
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  DateTime dt;
  auto y = fixed_digits(s, 0, 4);
  if (!y || s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto mo = fixed_digits(s, 5, 2);
  auto d = fixed_digits(s, 8, 2);
  if (!mo || !d) return std::nullopt;
  dt.year = *y;
  dt.month = *mo;
  dt.day = *d;
  if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > days_in_month(dt.year, dt.month))
    return std::nullopt;
  if (s.size() == 10) return dt;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  auto h = fixed_digits(s, 11, 2);
  auto mi = fixed_digits(s, 14, 2);
  if (!h || !mi || s.size() < 16 || s[13] != ':') return std::nullopt;
  dt.hour = *h;
  dt.minute = *mi;
  std::size_t end = 16;
  if (s.size() > 16) {
    auto sec = fixed_digits(s, 17, 2);
    if (s[16] != ':' || !sec) return std::nullopt;
    dt.second = *sec;
    end = 19;
  }
  if (end != s.size()) return std::nullopt;
  if (dt.hour > 23 || dt.minute > 59 || dt.second > 59) return std::nullopt;
  dt.has_time = true;
  return dt;
}

std::string format_datetime(const DateTime& dt, bool with_time) {
  char buf[32];
  if (with_time) {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", dt.year, dt.month, dt.day,
                  dt.hour, dt.minute, dt.second);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", dt.year, dt.month, dt.day);
  }
  return buf;
}

std::int64_t to_epoch_seconds(const DateTime& dt) {
  using namespace std::chrono;
  const sys_days days{std::chrono::year{dt.year} / std::chrono::month{static_cast<unsigned>(dt.month)} /
                      std::chrono::day{static_cast<unsigned>(dt.day)}};
  return static_cast<std::int64_t>(days.time_since_epoch().count()) * 86400 + dt.hour * 3600 +
         dt.minute * 60 + dt.second;
}

DateTime from_epoch_seconds(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t day_count = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --day_count;
  }
  const year_month_day ymd{sys_days{days{day_count}}};
  DateTime dt;
  dt.year = static_cast<int>(ymd.year());
  dt.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  dt.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  dt.hour = static_cast<int>(rem / 3600);
  dt.minute = static_cast<int>((rem % 3600) / 60);
  dt.second = static_cast<int>(rem % 60);
  dt.has_time = rem != 0;
  return dt;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

TableSchema infer_schema(const RawTable& table, const SchemaOverrides& overrides) {
  for (const auto& [name, spec] : overrides) {
    if (!table.schema.index_of(name)) throw SchemaError("override references unknown column '" + name + "'");
    if (spec.kind == ColumnKind::latlong && !table.schema.index_of(spec.geo_partner))
      throw SchemaError("latlong override '" + name + "' references unknown partner column '" +
                        spec.geo_partner + "'");
  }

  TableSchema schema;
  schema.row_count = table.row_count();
  const std::size_t n = table.row_count();
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    ColumnSpec spec;
    spec.name = table.schema.columns[c].name;
    std::size_t present = 0, numeric = 0, dates = 0;
    for (const auto& row : table.rows) {
      const auto& cell = row[c];
      if (!cell) continue;
      ++present;
      if (parse_number(*cell)) ++numeric;
      else if (parse_datetime(*cell)) ++dates;
    }
    spec.null_frequency = n ? static_cast<double>(n - present) / static_cast<double>(n) : 0.0;
    if (present > 0 && static_cast<double>(numeric) >= kTypeThreshold * static_cast<double>(present)) {
      spec.kind = ColumnKind::numeric;
      spec.encoding = Encoding::percentile_bins;
    } else if (present > 0 && static_cast<double>(dates) >= kTypeThreshold * static_cast<double>(present)) {
      spec.kind = ColumnKind::datetime;
      spec.encoding = Encoding::datetime_parts;
    }
    schema.columns.push_back(std::move(spec));
  }

  for (const auto& [name, override_spec] : overrides) {
    const std::size_t c = *schema.index_of(name);
    ColumnSpec spec = override_spec;
    spec.name = name;
    spec.null_frequency = schema.columns[c].null_frequency;
    if (spec.kind == ColumnKind::latlong) {
      spec.encoding = Encoding::quadtile;
      spec.geo_role = GeoRole::latitude;
      const std::size_t partner = *schema.index_of(spec.geo_partner);
      if (partner == c) throw SchemaError("latlong column '" + name + "' cannot pair with itself");
      ColumnSpec& lon = schema.columns[partner];
      lon.kind = ColumnKind::latlong;
      lon.encoding = Encoding::quadtile;
      lon.geo_role = GeoRole::longitude;
      lon.geo_partner = name;
    }
    validate(spec);
    schema.columns[c] = std::move(spec);
  }
  return schema;
}

RawTable with_schema(RawTable table, const TableSchema& schema) {
  if (schema.columns.size() != table.column_count())
    throw SchemaError("schema has " + std::to_string(schema.columns.size()) + " columns, table has " +
                      std::to_string(table.column_count()));
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].name != table.schema.columns[c].name)
      throw SchemaError("column " + std::to_string(c) + ": expected '" + schema.columns[c].name +
                        "', found '" + table.schema.columns[c].name + "'");
  }
  table.schema.columns = schema.columns;
  table.schema.row_count = table.row_count();
  return table;
}

}  // namespace argn
