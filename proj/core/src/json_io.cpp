#include "json_io.hpp"

#include <limits>

namespace argn::json_io {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}

json real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw FormatError("expected a number, got " + j.dump());
}

json to_json(const ColumnSpec& spec) {
  json j{{"name", spec.name},
         {"kind", to_string(spec.kind)},
         {"encoding", to_string(spec.encoding)},
         {"null_frequency", spec.null_frequency},
         {"geo_role", to_string(spec.geo_role)}};
  if (!spec.geo_partner.empty()) j["geo_partner"] = spec.geo_partner;
  return j;
}

namespace {

Encoding default_encoding(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::categorical: return Encoding::category_map;
    case ColumnKind::numeric: return Encoding::percentile_bins;
    case ColumnKind::datetime: return Encoding::datetime_parts;
    case ColumnKind::latlong: return Encoding::quadtile;
  }
  return Encoding::category_map;
}

GeoRole geo_role_from_string(std::string_view s) {
  if (s == "none") return GeoRole::none;
  if (s == "latitude") return GeoRole::latitude;
  if (s == "longitude") return GeoRole::longitude;
  throw ConfigError("unknown geo_role '" + std::string(s) + "'");
}

}  // namespace

ColumnSpec column_spec_from_json(const json& j, std::string name) {
  const std::string where = "column '" + name + "'";
  check_keys(j, {"name", "kind", "encoding", "null_frequency", "geo_role", "geo_partner"}, where);
  ColumnSpec spec;
  spec.name = std::move(name);
  std::string kind = "categorical", encoding, role = "none";
  read(j, "name", spec.name, where);
  read(j, "kind", kind, where);
  read(j, "encoding", encoding, where);
  read(j, "null_frequency", spec.null_frequency, where);
  read(j, "geo_role", role, where);
  read(j, "geo_partner", spec.geo_partner, where);
  spec.kind = column_kind_from_string(kind);
  spec.encoding = encoding.empty() ? default_encoding(spec.kind) : encoding_from_string(encoding);
  spec.geo_role = geo_role_from_string(role);
  if (spec.kind == ColumnKind::latlong && spec.geo_role == GeoRole::none) spec.geo_role = GeoRole::latitude;
  validate(spec);
  return spec;
}

json to_json(const TableSchema& schema) {
  json cols = json::array();
  for (const auto& c : schema.columns) cols.push_back(to_json(c));
  return {{"columns", cols}, {"row_count", schema.row_count}};
}

TableSchema schema_from_json(const json& j) {
  TableSchema s;
  for (const auto& c : j.at("columns")) s.columns.push_back(column_spec_from_json(c, c.at("name").get<std::string>()));
  s.row_count = j.at("row_count").get<std::size_t>();
  return s;
}

json to_json(const ColumnEncoder& enc) {
  json impl = std::visit(
      [](const auto& e) -> json {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, CategoricalEncoder>) {
          return {{"type", "category_map"}, {"categories", e.categories}};
        } else if constexpr (std::is_same_v<E, PercentileEncoder>) {
          return {{"type", "percentile_bins"}, {"edges", e.edges}, {"integral", e.integral}};
        } else if constexpr (std::is_same_v<E, DigitEncoder>) {
          return {{"type", "digit_split"},
                  {"has_sign", e.has_sign},
                  {"integer_digits", e.integer_digits},
                  {"decimals", e.decimals}};
        } else if constexpr (std::is_same_v<E, DatetimeEncoder>) {
          json parts = json::array();
          for (auto p : e.parts) parts.push_back(to_string(p));
          const DateTime& c = e.constant;
          return {{"type", "datetime_parts"},
                  {"parts", parts},
                  {"constant",
                   {c.year, c.month, c.day, c.hour, c.minute, c.second, c.has_time}},
                  {"min_year", e.min_year},
                  {"max_year", e.max_year},
                  {"with_time", e.with_time}};
        } else {
          return {{"type", "quadtile"}, {"leaves", e.leaves}, {"internal", e.internal}};
        }
      },
      enc.impl);
  return {{"spec", to_json(enc.spec)},
          {"source", enc.source},
          {"partner_source", enc.partner_source},
          {"impl", impl}};
}

ColumnEncoder column_encoder_from_json(const json& j) {
  ColumnEncoder enc;
  enc.spec = column_spec_from_json(j.at("spec"), j.at("spec").at("name").get<std::string>());
  enc.source = j.at("source").get<std::size_t>();
  enc.partner_source = j.at("partner_source").get<std::size_t>();
  const json& impl = j.at("impl");
  const auto type = impl.at("type").get<std::string>();
  if (type == "category_map") {
    CategoricalEncoder e;
    e.categories = impl.at("categories").get<std::vector<std::string>>();
    e.rebuild_index();
    enc.impl = std::move(e);
  } else if (type == "percentile_bins") {
    PercentileEncoder e;
    e.edges = impl.at("edges").get<std::vector<double>>();
    e.integral = impl.at("integral").get<bool>();
    enc.impl = std::move(e);
  } else if (type == "digit_split") {
    DigitEncoder e;
    e.has_sign = impl.at("has_sign").get<bool>();
    e.integer_digits = impl.at("integer_digits").get<int>();
    e.decimals = impl.at("decimals").get<int>();
    enc.impl = e;
  } else if (type == "datetime_parts") {
    DatetimeEncoder e;
    for (const auto& p : impl.at("parts")) e.parts.push_back(date_part_from_string(p.get<std::string>()));
    const json& c = impl.at("constant");
    e.constant = DateTime{c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>(), c.at(3).get<int>(),
                          c.at(4).get<int>(), c.at(5).get<int>(), c.at(6).get<bool>()};
    e.min_year = impl.at("min_year").get<int>();
    e.max_year = impl.at("max_year").get<int>();
    e.with_time = impl.at("with_time").get<bool>();
    enc.impl = std::move(e);
  } else if (type == "quadtile") {
    QuadtileEncoder e;
    e.leaves = impl.at("leaves").get<std::vector<std::string>>();
    e.internal = impl.at("internal").get<std::set<std::string>>();
    e.rebuild_index();
    enc.impl = std::move(e);
  } else {
    throw FormatError("unknown encoder type '" + type + "'");
  }
  return enc;
}

json to_json(const TableEncoder& enc) {
  json cols = json::array();
  for (const auto& c : enc.columns) cols.push_back(to_json(c));
  return {{"schema", to_json(enc.schema)}, {"columns", cols}};
}

TableEncoder table_encoder_from_json(const json& j) {
  TableEncoder enc;
  enc.schema = schema_from_json(j.at("schema"));
  for (const auto& c : j.at("columns")) enc.columns.push_back(column_encoder_from_json(c));
  return enc;
}

json to_json(const DpConfig& cfg) {
  json j{{"enabled", cfg.enabled}, {"clip_norm", cfg.clip_norm}, {"noise_multiplier", cfg.noise_multiplier}};
  if (cfg.reported_epsilon) j["reported_epsilon"] = *cfg.reported_epsilon;
  return j;
}

void from_json_strict(const json& j, DpConfig& cfg) {
  check_keys(j, {"enabled", "clip_norm", "noise_multiplier", "reported_epsilon"}, "dp");
  read(j, "enabled", cfg.enabled, "dp");
  read(j, "clip_norm", cfg.clip_norm, "dp");
  read(j, "noise_multiplier", cfg.noise_multiplier, "dp");
  if (j.contains("reported_epsilon") && !j["reported_epsilon"].is_null()) {
    double eps = 0;
    read(j, "reported_epsilon", eps, "dp");
    cfg.reported_epsilon = eps;
  }
}

json to_json(const TrainConfig& cfg) {
  return {{"batch_size", cfg.batch_size},     {"initial_lr", cfg.initial_lr},
          {"patience_stop", cfg.patience_stop}, {"patience_lr", cfg.patience_lr},
          {"max_epochs", cfg.max_epochs},     {"dropout_rate", cfg.dropout_rate},
          {"val_fraction", cfg.val_fraction}, {"order_mode", to_string(cfg.order_mode)},
          {"early_stopping", cfg.early_stopping}, {"dp", to_json(cfg.dp)},
          {"seed", cfg.seed}};
}

void from_json_strict(const json& j, TrainConfig& cfg) {
  const char* w = "train";
  check_keys(j,
             {"batch_size", "initial_lr", "patience_stop", "patience_lr", "max_epochs", "dropout_rate", "val_fraction",
              "order_mode", "early_stopping", "dp", "seed"},
             w);
  read(j, "batch_size", cfg.batch_size, w);
  read(j, "initial_lr", cfg.initial_lr, w);
  read(j, "patience_stop", cfg.patience_stop, w);
  read(j, "patience_lr", cfg.patience_lr, w);
  read(j, "max_epochs", cfg.max_epochs, w);
  read(j, "dropout_rate", cfg.dropout_rate, w);
  read(j, "val_fraction", cfg.val_fraction, w);
  std::string mode(to_string(cfg.order_mode));
  read(j, "order_mode", mode, w);
  cfg.order_mode = order_mode_from_string(mode);
  read(j, "early_stopping", cfg.early_stopping, w);
  read(j, "seed", cfg.seed, w);
  if (j.contains("dp")) from_json_strict(j["dp"], cfg.dp);
}

namespace {

json threshold_json(const Threshold& t) {
  if (!t.random) return t.fixed;
  return {{"lo", t.random_lo}, {"hi", t.random_hi}};
}

Threshold threshold_from(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Threshold::constant(j.get<int>());
  if (j.is_object()) {
    check_keys(j, {"lo", "hi"}, where);
    int lo = 5, hi = 8;
    read(j, "lo", lo, where);
    read(j, "hi", hi, where);
    if (lo < 1 || hi < lo) throw ConfigError(where + ": need 1 <= lo <= hi");
    return Threshold::uniform(lo, hi);
  }
  throw ConfigError(where + ": expected an integer or {\"lo\", \"hi\"}");
}

}  // namespace

json to_json(const ValueProtectionConfig& cfg) {
  return {{"enabled", cfg.enabled},
          {"rare_min_count", threshold_json(cfg.rare_min_count)},
          {"extreme_k", threshold_json(cfg.extreme_k)},
          {"rare_mode", cfg.rare_mode == RareMode::token ? "token" : "resample"},
          {"seed", cfg.rng_seed}};
}

void from_json_strict(const json& j, ValueProtectionConfig& cfg) {
  const char* w = "value_protection";
  check_keys(j, {"enabled", "rare_min_count", "extreme_k", "rare_mode", "seed"}, w);
  read(j, "enabled", cfg.enabled, w);
  if (j.contains("rare_min_count")) cfg.rare_min_count = threshold_from(j["rare_min_count"], "value_protection.rare_min_count");
  if (j.contains("extreme_k")) cfg.extreme_k = threshold_from(j["extreme_k"], "value_protection.extreme_k");
  std::string mode = cfg.rare_mode == RareMode::token ? "token" : "resample";
  read(j, "rare_mode", mode, w);
  if (mode == "token") cfg.rare_mode = RareMode::token;
  else if (mode == "resample") cfg.rare_mode = RareMode::resample;
  else throw ConfigError("value_protection.rare_mode: expected 'token' or 'resample', got '" + mode + "'");
  read(j, "seed", cfg.rng_seed, w);
}

json to_json(const EncoderOptions& opts) {
  return {{"n_bins", opts.n_bins},
          {"quadtile_min_count", opts.quadtile_min_count},
          {"quadtile_max_depth", opts.quadtile_max_depth}};
}

void from_json_strict(const json& j, EncoderOptions& opts) {
  const char* w = "encoding";
  check_keys(j, {"n_bins", "quadtile_min_count", "quadtile_max_depth"}, w);
  read(j, "n_bins", opts.n_bins, w);
  read(j, "quadtile_min_count", opts.quadtile_min_count, w);
  read(j, "quadtile_max_depth", opts.quadtile_max_depth, w);
  if (opts.n_bins < 1) throw ConfigError("encoding.n_bins must be at least 1");
  if (opts.quadtile_max_depth < 1) throw ConfigError("encoding.quadtile_max_depth must be at least 1");
}

json to_json(const AuditConfig& cfg) {
  json attacks = json::array();
  for (auto a : cfg.attacks) attacks.push_back(to_string(a));
  return {{"n_shadow", cfg.n_shadow},   {"shadow_size", cfg.shadow_size}, {"target_indices", cfg.target_indices},
          {"attacks", attacks},         {"n_queries", cfg.n_queries},     {"subset_size", cfg.subset_size},
          {"hist_bins", cfg.hist_bins}, {"seed", cfg.seed}};
}

void from_json_strict(const json& j, AuditConfig& cfg) {
  const char* w = "audit";
  check_keys(j, {"n_shadow", "shadow_size", "target_indices", "attacks", "n_queries", "subset_size", "hist_bins", "seed"},
             w);
  read(j, "n_shadow", cfg.n_shadow, w);
  read(j, "shadow_size", cfg.shadow_size, w);
  read(j, "target_indices", cfg.target_indices, w);
  if (j.contains("attacks")) {
    std::vector<std::string> names;
    read(j, "attacks", names, w);
    cfg.attacks.clear();
    for (const auto& n : names) cfg.attacks.push_back(attack_from_string(n));
  }
  read(j, "n_queries", cfg.n_queries, w);
  read(j, "subset_size", cfg.subset_size, w);
  read(j, "hist_bins", cfg.hist_bins, w);
  read(j, "seed", cfg.seed, w);
  cfg.validate();
}

json to_json(const TrainingMeta& meta) {
  auto reals = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(real(x));
    return a;
  };
  return {{"epochs_run", meta.epochs_run},
          {"best_epoch", meta.best_epoch},
          {"best_val_loss", real(meta.best_val_loss)},
          {"stopped_early", meta.stopped_early},
          {"train_losses", reals(meta.train_losses)},
          {"val_losses", reals(meta.val_losses)},
          {"learning_rates", reals(meta.learning_rates)}};
}

TrainingMeta training_meta_from_json(const json& j) {
  auto reals = [](const json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(real(x));
    return v;
  };
  TrainingMeta m;
  m.epochs_run = j.at("epochs_run").get<int>();
  m.best_epoch = j.at("best_epoch").get<int>();
  m.best_val_loss = real(j.at("best_val_loss"));
  m.stopped_early = j.at("stopped_early").get<bool>();
  m.train_losses = reals(j.at("train_losses"));
  m.val_losses = reals(j.at("val_losses"));
  m.learning_rates = reals(j.at("learning_rates"));
  return m;
}

}  // namespace argn::json_io
