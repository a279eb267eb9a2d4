#include "argn/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "argn/error.hpp"

namespace argn {

namespace {

std::int64_t pow10i(int p) {
  std::int64_t v = 1;
  for (int k = 0; k < p; ++k) v *= 10;
  return v;
}

// Smallest decimal count (≤ cap) that reproduces v exactly.
int decimals_of(double v, int cap) {
  const double a = std::fabs(v);
  for (int p = 0; p <= cap; ++p) {
    const double scale = static_cast<double>(pow10i(p));
    const double scaled = std::round(a * scale);
    if (scaled / scale == a) return p;
  }
  return cap;
}

int digit_count(std::int64_t v) {
  int d = 1;
  while (v >= 10) {
    v /= 10;
    ++d;
  }
  return d;
}

void check_index(std::int32_t index, std::int32_t cardinality, std::string_view what) {
  if (index < 0 || index >= cardinality)
    throw EncodingError(std::string(what) + ": category index " + std::to_string(index) +
                        " outside [0," + std::to_string(cardinality) + ")");
}

std::string sub_name(const std::string& parent, std::string_view suffix) {
  return parent + "__" + std::string(suffix);
}

}  // namespace

std::vector<std::int32_t> EncodedTable::cardinalities() const {
  std::vector<std::int32_t> out;
  out.reserve(sub_columns.size());
  for (const auto& s : sub_columns) out.push_back(s.cardinality);
  return out;
}

void EncodedTable::check() const {
  if (data.size() != row_count * width())
    throw EncodingError("encoded table holds " + std::to_string(data.size()) + " cells, expected " +
                        std::to_string(row_count * width()));
  for (std::size_t r = 0; r < row_count; ++r)
    for (std::size_t j = 0; j < width(); ++j) check_index(at(r, j), sub_columns[j].cardinality, sub_columns[j].name);
}

std::optional<double> numeric_value(const Cell& cell) {
  if (!cell) return std::nullopt;
  return parse_number(*cell);
}

std::optional<DateTime> datetime_value(const Cell& cell) {
  if (!cell) return std::nullopt;
  return parse_datetime(*cell);
}

// ---------------------------------------------------------------- categorical

CategoricalEncoder CategoricalEncoder::fit(std::span<const Cell> values) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& v : values)
    if (v) ++counts[*v];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  CategoricalEncoder enc;
  for (auto& [value, count] : ranked) enc.categories.push_back(value);
  enc.rebuild_index();
  return enc;
}

void CategoricalEncoder::rebuild_index() {
  index_.clear();
  for (std::size_t k = 0; k < categories.size(); ++k) index_.emplace(categories[k], static_cast<std::int32_t>(k));
}

std::optional<std::int32_t> CategoricalEncoder::find(std::string_view value) const {
  auto it = index_.find(std::string(value));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int32_t CategoricalEncoder::encode(const Cell& value) const {
  if (!value) return missing_index();
  if (auto k = find(*value)) return *k;
  if (auto rare = find(kRareToken)) return *rare;
  throw EncodingError("value '" + *value + "' not in category map");
}

Cell CategoricalEncoder::decode(std::int32_t index) const {
  check_index(index, cardinality(), "categorical");
  if (index == missing_index()) return std::nullopt;
  return categories[static_cast<std::size_t>(index)];
}

// ----------------------------------------------------------------- percentile

PercentileEncoder PercentileEncoder::fit(std::span<const std::optional<double>> values, int n_bins) {
  if (n_bins < 1) throw EncodingError("percentile encoder needs n_bins >= 1, got " + std::to_string(n_bins));
  std::vector<double> sorted;
  for (const auto& v : values)
    if (v) sorted.push_back(*v);
  if (sorted.empty()) throw EncodingError("percentile encoder needs at least one numeric value");
  std::sort(sorted.begin(), sorted.end());

  PercentileEncoder enc;
  enc.integral = std::all_of(sorted.begin(), sorted.end(), [](double v) { return std::floor(v) == v; });
  const std::size_t n = sorted.size();
  for (int i = 0; i <= n_bins; ++i) {
    // Linear interpolation between order statistics.
    const double h = static_cast<double>(n - 1) * static_cast<double>(i) / static_cast<double>(n_bins);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    double q = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    if (i == 0) q = sorted.front();
    if (i == n_bins) q = sorted.back();
    if (enc.edges.empty() || q > enc.edges.back()) enc.edges.push_back(q);
  }
  return enc;
}

std::int32_t PercentileEncoder::encode(std::optional<double> v) const {
  if (!v) return missing_index();
  if (edges.size() <= 1) return 0;
  const auto it = std::upper_bound(edges.begin(), edges.end(), *v);
  std::int64_t bin = static_cast<std::int64_t>(it - edges.begin()) - 1;
  bin = std::clamp<std::int64_t>(bin, 0, bin_count() - 1);
  return static_cast<std::int32_t>(bin);
}

std::optional<double> PercentileEncoder::decode(std::int32_t index, Rng& rng) const {
  check_index(index, cardinality(), "percentile");
  if (index == missing_index()) return std::nullopt;
  if (edges.size() <= 1) return edges.front();
  const auto j = static_cast<std::size_t>(index);
  const double lo = edges[j];
  const double hi = edges[j + 1];
  const bool last = index == bin_count() - 1;
  if (integral) {
    const double first = std::ceil(lo);
    const double final_int = last ? std::floor(hi) : std::ceil(hi) - 1.0;
    if (first <= final_int) {
      const auto span = static_cast<std::int64_t>(final_int - first);
      return first + static_cast<double>(rng.between(0, span));
    }
  }
  double v = lo + rng.uniform() * (hi - lo);
  if (!last && v >= hi) v = std::nextafter(hi, lo);
  return std::clamp(v, lo, hi);
}

// --------------------------------------------------------------------- digits

DigitEncoder DigitEncoder::fit(std::span<const std::optional<double>> values) {
  DigitEncoder enc;
  bool any = false;
  double max_abs = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    if (!std::isfinite(*v)) throw EncodingError("digit encoder got a non-finite value");
    any = true;
    if (*v < 0.0) enc.has_sign = true;
    max_abs = std::max(max_abs, std::fabs(*v));
    enc.decimals = std::max(enc.decimals, decimals_of(*v, kMaxDecimals));
  }
  if (!any) throw EncodingError("digit encoder needs at least one numeric value");
  const double int_part = std::floor(max_abs);
  if (int_part >= 1e17) throw EncodingError("digit encoder: magnitude too large");
  enc.integer_digits = digit_count(static_cast<std::int64_t>(int_part));
  if (enc.integer_digits + enc.decimals > 18) throw EncodingError("digit encoder: too many digit positions");
  return enc;
}

std::vector<std::int32_t> DigitEncoder::cardinalities() const {
  std::vector<std::int32_t> out;
  if (has_sign) out.push_back(3);
  for (int k = 0; k < integer_digits + decimals; ++k) out.push_back(10);
  out.front() += has_sign ? 0 : 1;
  return out;
}

std::vector<std::string> DigitEncoder::sub_column_suffixes() const {
  std::vector<std::string> out;
  if (has_sign) out.emplace_back("sign");
  for (int e = integer_digits - 1; e >= -decimals; --e) out.push_back("e" + std::to_string(e));
  return out;
}

void DigitEncoder::encode(std::optional<double> v, std::span<std::int32_t> out) const {
  std::fill(out.begin(), out.end(), 0);
  if (!v) {
    out[0] = missing_index();
    return;
  }
  if (!std::isfinite(*v)) throw EncodingError("digit encoder got a non-finite value");
  const int n_digits = integer_digits + decimals;
  const std::int64_t limit = pow10i(n_digits) - 1;
  const double scaled_real = std::round(std::fabs(*v) * static_cast<double>(pow10i(decimals)));
  std::int64_t scaled = scaled_real >= static_cast<double>(limit) ? limit : static_cast<std::int64_t>(scaled_real);
  std::size_t pos = 0;
  if (has_sign) out[pos++] = (*v < 0.0 && scaled != 0) ? 1 : 0;
  for (int k = n_digits - 1; k >= 0; --k) {
    out[pos + static_cast<std::size_t>(k)] = static_cast<std::int32_t>(scaled % 10);
    scaled /= 10;
  }
}

std::optional<double> DigitEncoder::decode(std::span<const std::int32_t> digits) const {
  const auto cards = cardinalities();
  for (std::size_t k = 0; k < digits.size(); ++k) check_index(digits[k], cards[k], "digit");
  if (digits[0] == missing_index()) return std::nullopt;
  std::size_t pos = 0;
  bool negative = false;
  if (has_sign) negative = digits[pos++] == 1;
  std::int64_t scaled = 0;
  for (; pos < digits.size(); ++pos) scaled = scaled * 10 + digits[pos];
  if (scaled == 0) return 0.0;
  const double v = static_cast<double>(scaled) / static_cast<double>(pow10i(decimals));
  return negative ? -v : v;
}

// ------------------------------------------------------------------- datetime

std::string_view to_string(DatePart part) {
  switch (part) {
    case DatePart::year: return "year";
    case DatePart::month: return "month";
    case DatePart::day: return "day";
    case DatePart::hour: return "hour";
    case DatePart::minute: return "minute";
    case DatePart::second: return "second";
  }
  return "?";
}

DatePart date_part_from_string(std::string_view s) {
  for (DatePart p : {DatePart::year, DatePart::month, DatePart::day, DatePart::hour, DatePart::minute,
                     DatePart::second})
    if (to_string(p) == s) return p;
  throw FormatError("unknown date part '" + std::string(s) + "'");
}

namespace {

int part_of(const DateTime& dt, DatePart p) {
  switch (p) {
    case DatePart::year: return dt.year;
    case DatePart::month: return dt.month;
    case DatePart::day: return dt.day;
    case DatePart::hour: return dt.hour;
    case DatePart::minute: return dt.minute;
    case DatePart::second: return dt.second;
  }
  return 0;
}

void set_part(DateTime& dt, DatePart p, int v) {
  switch (p) {
    case DatePart::year: dt.year = v; break;
    case DatePart::month: dt.month = v; break;
    case DatePart::day: dt.day = v; break;
    case DatePart::hour: dt.hour = v; break;
    case DatePart::minute: dt.minute = v; break;
    case DatePart::second: dt.second = v; break;
  }
}

constexpr DatePart kAllParts[] = {DatePart::year, DatePart::month, DatePart::day,
                                  DatePart::hour, DatePart::minute, DatePart::second};

}  // namespace

DatetimeEncoder DatetimeEncoder::fit(std::span<const std::optional<DateTime>> values) {
  DatetimeEncoder enc;
  std::vector<DateTime> present;
  for (const auto& v : values)
    if (v) present.push_back(*v);
  if (present.empty()) throw EncodingError("datetime encoder needs at least one parseable value");
  enc.constant = present.front();
  enc.min_year = enc.max_year = present.front().year;
  for (const auto& dt : present) {
    enc.min_year = std::min(enc.min_year, dt.year);
    enc.max_year = std::max(enc.max_year, dt.year);
    enc.with_time = enc.with_time || dt.has_time;
  }
  for (DatePart p : kAllParts) {
    if (!enc.with_time && (p == DatePart::hour || p == DatePart::minute || p == DatePart::second)) continue;
    const int first = part_of(present.front(), p);
    const bool varies = std::any_of(present.begin(), present.end(), [&](const DateTime& dt) { return part_of(dt, p) != first; });
    if (varies) enc.parts.push_back(p);
  }
  if (enc.parts.empty()) enc.parts.push_back(DatePart::year);
  enc.constant.has_time = enc.with_time;
  return enc;
}

std::int32_t DatetimeEncoder::part_cardinality(DatePart part) const {
  switch (part) {
    case DatePart::year: return max_year - min_year + 1;
    case DatePart::month: return 12;
    case DatePart::day: return 31;
    case DatePart::hour: return 24;
    case DatePart::minute: return 60;
    case DatePart::second: return 60;
  }
  return 1;
}

std::vector<std::int32_t> DatetimeEncoder::cardinalities() const {
  std::vector<std::int32_t> out;
  for (DatePart p : parts) out.push_back(part_cardinality(p));
  out.front() += 1;
  return out;
}

void DatetimeEncoder::encode(const std::optional<DateTime>& v, std::span<std::int32_t> out) const {
  std::fill(out.begin(), out.end(), 0);
  if (!v) {
    out[0] = missing_index();
    return;
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const DatePart p = parts[k];
    int idx = part_of(*v, p);
    switch (p) {
      case DatePart::year: idx = std::clamp(idx, min_year, max_year) - min_year; break;
      case DatePart::month:
      case DatePart::day: idx -= 1; break;
      default: break;
    }
    out[k] = std::clamp(idx, 0, part_cardinality(p) - 1);
  }
}

std::optional<DateTime> DatetimeEncoder::decode(std::span<const std::int32_t> in) const {
  const auto cards = cardinalities();
  for (std::size_t k = 0; k < in.size(); ++k) check_index(in[k], cards[k], "datetime");
  if (in[0] == missing_index()) return std::nullopt;
  DateTime dt = constant;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const DatePart p = parts[k];
    int v = in[k];
    switch (p) {
      case DatePart::year: v += min_year; break;
      case DatePart::month:
      case DatePart::day: v += 1; break;
      default: break;
    }
    set_part(dt, p, v);
  }
  dt.day = std::min(dt.day, days_in_month(dt.year, dt.month));
  dt.has_time = with_time;
  return dt;
}

// ------------------------------------------------------------------- quadtile

GeoBox QuadtileEncoder::box(std::string_view key) {
  GeoBox b;
  for (char c : key) {
    const double lat_mid = 0.5 * (b.lat_lo + b.lat_hi);
    const double lon_mid = 0.5 * (b.lon_lo + b.lon_hi);
    const int d = c - '0';
    if (d < 2) b.lat_lo = lat_mid; else b.lat_hi = lat_mid;
    if (d % 2 == 1) b.lon_lo = lon_mid; else b.lon_hi = lon_mid;
  }
  return b;
}

namespace {

char quadrant(const GeoPoint& p, const GeoBox& b) {
  const bool north = p.lat >= 0.5 * (b.lat_lo + b.lat_hi);
  const bool east = p.lon >= 0.5 * (b.lon_lo + b.lon_hi);
  return static_cast<char>('0' + (north ? 0 : 2) + (east ? 1 : 0));
}

void check_point(const GeoPoint& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0))
    throw EncodingError("coordinate (" + format_number(p.lat) + ", " + format_number(p.lon) +
                        ") outside lat [-90,90] / lon [-180,180]");
}

void split_tile(const std::string& key, std::vector<GeoPoint> points, int depth, std::size_t min_count,
                int max_depth, QuadtileEncoder& enc) {
  if (points.size() >= min_count && depth < max_depth) {
    enc.internal.insert(key);
    const GeoBox b = QuadtileEncoder::box(key);
    std::vector<GeoPoint> children[4];
    for (const auto& p : points) children[quadrant(p, b) - '0'].push_back(p);
    for (int d = 0; d < 4; ++d)
      split_tile(key + static_cast<char>('0' + d), std::move(children[d]), depth + 1, min_count, max_depth, enc);
  } else {
    enc.leaves.push_back(key);
  }
}

}  // namespace

std::string QuadtileEncoder::quadkey(const GeoPoint& p, int depth) {
  check_point(p);
  std::string key;
  for (int d = 0; d < depth; ++d) key.push_back(quadrant(p, box(key)));
  return key;
}

QuadtileEncoder QuadtileEncoder::fit(std::span<const std::optional<GeoPoint>> points, std::size_t min_tile_count,
                                     int max_depth) {
  std::vector<GeoPoint> present;
  for (const auto& p : points) {
    if (!p) continue;
    check_point(*p);
    present.push_back(*p);
  }
  QuadtileEncoder enc;
  split_tile("", std::move(present), 0, std::max<std::size_t>(min_tile_count, 1), max_depth, enc);
  std::sort(enc.leaves.begin(), enc.leaves.end());
  enc.rebuild_index();
  return enc;
}

void QuadtileEncoder::rebuild_index() {
  index_.clear();
  for (std::size_t k = 0; k < leaves.size(); ++k) index_.emplace(leaves[k], static_cast<std::int32_t>(k));
}

std::string QuadtileEncoder::leaf_key(const GeoPoint& p) const {
  check_point(p);
  std::string key;
  while (internal.contains(key)) key.push_back(quadrant(p, box(key)));
  return key;
}

std::int32_t QuadtileEncoder::encode(const std::optional<GeoPoint>& p) const {
  if (!p) return missing_index();
  const std::string key = leaf_key(*p);
  auto it = index_.find(key);
  if (it == index_.end()) throw EncodingError("quadkey '" + key + "' is not a fitted leaf");
  return it->second;
}

std::optional<GeoPoint> QuadtileEncoder::decode(std::int32_t index, Rng& rng) const {
  check_index(index, cardinality(), "quadtile");
  if (index == missing_index()) return std::nullopt;
  const GeoBox b = box(leaves[static_cast<std::size_t>(index)]);
  GeoPoint p;
  p.lat = b.lat_lo + rng.uniform() * (b.lat_hi - b.lat_lo);
  p.lon = b.lon_lo + rng.uniform() * (b.lon_hi - b.lon_lo);
  if (p.lat >= b.lat_hi && b.lat_hi < 90.0) p.lat = std::nextafter(b.lat_hi, b.lat_lo);
  if (p.lon >= b.lon_hi && b.lon_hi < 180.0) p.lon = std::nextafter(b.lon_hi, b.lon_lo);
  return p;
}

// ------------------------------------------------------------- column / table

std::size_t ColumnEncoder::width() const {
  return std::visit(
      [](const auto& e) -> std::size_t {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, DigitEncoder>) return e.width();
        else if constexpr (std::is_same_v<T, DatetimeEncoder>) return e.parts.size();
        else return 1;
      },
      impl);
}

std::vector<SubColumn> ColumnEncoder::sub_columns() const {
  const std::string& parent = spec.name;
  return std::visit(
      [&](const auto& e) -> std::vector<SubColumn> {
        using T = std::decay_t<decltype(e)>;
        std::vector<SubColumn> out;
        if constexpr (std::is_same_v<T, CategoricalEncoder>) {
          out.push_back({parent, e.cardinality(), parent});
        } else if constexpr (std::is_same_v<T, PercentileEncoder>) {
          out.push_back({sub_name(parent, "bin"), e.cardinality(), parent});
        } else if constexpr (std::is_same_v<T, DigitEncoder>) {
          const auto cards = e.cardinalities();
          const auto names = e.sub_column_suffixes();
          for (std::size_t k = 0; k < cards.size(); ++k) out.push_back({sub_name(parent, names[k]), cards[k], parent});
        } else if constexpr (std::is_same_v<T, DatetimeEncoder>) {
          const auto cards = e.cardinalities();
          for (std::size_t k = 0; k < cards.size(); ++k)
            out.push_back({sub_name(parent, to_string(e.parts[k])), cards[k], parent});
        } else {
          out.push_back({sub_name(parent, "quadkey"), e.cardinality(), parent});
        }
        return out;
      },
      impl);
}

void ColumnEncoder::encode_row(std::span<const Cell> row, std::span<std::int32_t> out) const {
  const Cell& cell = row[source];
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, CategoricalEncoder>) {
          out[0] = e.encode(cell);
        } else if constexpr (std::is_same_v<T, PercentileEncoder>) {
          out[0] = e.encode(numeric_value(cell));
        } else if constexpr (std::is_same_v<T, DigitEncoder>) {
          e.encode(numeric_value(cell), out);
        } else if constexpr (std::is_same_v<T, DatetimeEncoder>) {
          e.encode(datetime_value(cell), out);
        } else {
          const auto lat = numeric_value(cell);
          const auto lon = numeric_value(row[partner_source]);
          std::optional<GeoPoint> p;
          if (lat && lon) p = GeoPoint{*lat, *lon};
          out[0] = e.encode(p);
        }
      },
      impl);
}

void ColumnEncoder::decode_row(std::span<const std::int32_t> in, std::vector<Cell>& row, Rng& rng) const {
  Cell& cell = row[source];
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, CategoricalEncoder>) {
          cell = e.decode(in[0]);
        } else if constexpr (std::is_same_v<T, PercentileEncoder>) {
          const auto v = e.decode(in[0], rng);
          cell = v ? Cell(format_number(*v)) : std::nullopt;
        } else if constexpr (std::is_same_v<T, DigitEncoder>) {
          const auto v = e.decode(in);
          cell = v ? Cell(format_number(*v)) : std::nullopt;
        } else if constexpr (std::is_same_v<T, DatetimeEncoder>) {
          const auto v = e.decode(in);
          cell = v ? Cell(format_datetime(*v, e.with_time)) : std::nullopt;
        } else {
          const auto p = e.decode(in[0], rng);
          if (p) {
            cell = format_number(p->lat);
            row[partner_source] = format_number(p->lon);
          } else {
            cell = std::nullopt;
            row[partner_source] = std::nullopt;
          }
        }
      },
      impl);
}

TableEncoder TableEncoder::fit(const RawTable& table, const EncoderOptions& options) {
  TableEncoder enc;
  enc.schema = table.schema;
  enc.schema.row_count = table.row_count();
  for (std::size_t c = 0; c < table.column_count(); ++c) {
    const ColumnSpec& spec = table.schema.columns[c];
    validate(spec);
    if (spec.geo_role == GeoRole::longitude) continue;
    ColumnEncoder ce;
    ce.spec = spec;
    ce.source = c;
    const auto cells = table.column(c);
    switch (spec.encoding) {
      case Encoding::category_map: ce.impl = CategoricalEncoder::fit(cells); break;
      case Encoding::percentile_bins:
      case Encoding::digit_split: {
        std::vector<std::optional<double>> values;
        values.reserve(cells.size());
        for (const auto& cell : cells) values.push_back(numeric_value(cell));
        if (spec.encoding == Encoding::percentile_bins) ce.impl = PercentileEncoder::fit(values, options.n_bins);
        else ce.impl = DigitEncoder::fit(values);
        break;
      }
      case Encoding::datetime_parts: {
        std::vector<std::optional<DateTime>> values;
        values.reserve(cells.size());
        for (const auto& cell : cells) values.push_back(datetime_value(cell));
        ce.impl = DatetimeEncoder::fit(values);
        break;
      }
      case Encoding::quadtile: {
        const auto partner = table.schema.index_of(spec.geo_partner);
        if (!partner) throw SchemaError("latlong column '" + spec.name + "' has no partner '" + spec.geo_partner + "'");
        ce.partner_source = *partner;
        std::vector<std::optional<GeoPoint>> points;
        for (const auto& row : table.rows) {
          const auto lat = numeric_value(row[c]);
          const auto lon = numeric_value(row[*partner]);
          if (lat && lon) points.push_back(GeoPoint{*lat, *lon});
          else points.push_back(std::nullopt);
        }
        ce.impl = QuadtileEncoder::fit(points, options.quadtile_min_count, options.quadtile_max_depth);
        break;
      }
    }
    enc.columns.push_back(std::move(ce));
  }
  return enc;
}

std::vector<SubColumn> TableEncoder::sub_columns() const {
  std::vector<SubColumn> out;
  for (const auto& c : columns) {
    auto subs = c.sub_columns();
    out.insert(out.end(), subs.begin(), subs.end());
  }
  return out;
}

std::pair<std::size_t, std::size_t> TableEncoder::sub_range(std::string_view parent) const {
  std::size_t offset = 0;
  for (const auto& c : columns) {
    if (c.spec.name == parent) return {offset, c.width()};
    offset += c.width();
  }
  throw SchemaError("no encoded column named '" + std::string(parent) + "'");
}

const ColumnEncoder* TableEncoder::find(std::string_view parent) const {
  for (const auto& c : columns)
    if (c.spec.name == parent) return &c;
  return nullptr;
}

EncodedTable encode_table(const RawTable& raw, const TableEncoder& encoders) {
  if (raw.column_count() != encoders.schema.columns.size())
    throw SchemaError("table has " + std::to_string(raw.column_count()) + " columns, encoders expect " +
                      std::to_string(encoders.schema.columns.size()));
  for (std::size_t c = 0; c < raw.column_count(); ++c)
    if (raw.schema.columns[c].name != encoders.schema.columns[c].name)
      throw SchemaError("column " + std::to_string(c) + " is '" + raw.schema.columns[c].name + "', encoders expect '" +
                        encoders.schema.columns[c].name + "'");
  EncodedTable out;
  out.sub_columns = encoders.sub_columns();
  out.row_count = raw.row_count();
  out.data.assign(out.row_count * out.width(), 0);
  for (std::size_t r = 0; r < raw.row_count(); ++r) {
    auto dst = out.row(r);
    std::size_t offset = 0;
    for (const auto& c : encoders.columns) {
      c.encode_row(raw.rows[r], dst.subspan(offset, c.width()));
      offset += c.width();
    }
  }
  return out;
}

RawTable decode_table(const EncodedTable& encoded, const TableEncoder& encoders, Rng& rng) {
  const auto expected = encoders.sub_columns();
  if (encoded.sub_columns.size() != expected.size())
    throw EncodingError("encoded table has " + std::to_string(encoded.sub_columns.size()) +
                        " sub-columns, encoders expect " + std::to_string(expected.size()));
  encoded.check();
  RawTable out;
  out.schema = encoders.schema;
  out.schema.row_count = encoded.row_count;
  out.rows.assign(encoded.row_count, std::vector<Cell>(encoders.schema.columns.size()));
  for (std::size_t r = 0; r < encoded.row_count; ++r) {
    const auto src = encoded.row(r);
    std::size_t offset = 0;
    for (const auto& c : encoders.columns) {
      c.decode_row(src.subspan(offset, c.width()), out.rows[r], rng);
      offset += c.width();
    }
  }
  return out;
}

}  // namespace argn
