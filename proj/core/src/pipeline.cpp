#include "argn/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "argn/error.hpp"
#include "argn/sampler.hpp"
#include "json_io.hpp"

namespace argn {

using json_io::json;

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  json_io::check_keys(j, {"data", "overrides", "value_protection", "encoding", "train", "dp", "generation", "audit"},
                      "config");
  RunConfig cfg;
  if (j.contains("data")) {
    std::string path;
    json_io::read(j, "data", path, "config");
    cfg.data = path;
  }
  if (j.contains("overrides")) {
    const json& o = j["overrides"];
    if (!o.is_object()) throw ConfigError("overrides: expected an object keyed by column name");
    for (const auto& [name, spec] : o.items()) cfg.overrides[name] = json_io::column_spec_from_json(spec, name);
  }
  if (j.contains("value_protection")) json_io::from_json_strict(j["value_protection"], cfg.value_protection);
  if (j.contains("encoding")) json_io::from_json_strict(j["encoding"], cfg.encoding);
  if (j.contains("train")) json_io::from_json_strict(j["train"], cfg.train);
  if (j.contains("dp")) json_io::from_json_strict(j["dp"], cfg.train.dp);
  if (j.contains("generation")) {
    const json& g = j["generation"];
    json_io::check_keys(g, {"n_rows", "temperature", "seed"}, "generation");
    json_io::read(g, "n_rows", cfg.generation.n_rows, "generation");
    json_io::read(g, "temperature", cfg.generation.temperature, "generation");
    json_io::read(g, "seed", cfg.generation.seed, "generation");
  }
  if (j.contains("audit")) json_io::from_json_strict(j["audit"], cfg.audit);
  cfg.train.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& cfg) {
  json j;
  if (cfg.data) j["data"] = *cfg.data;
  json overrides = json::object();
  for (const auto& [name, spec] : cfg.overrides) overrides[name] = json_io::to_json(spec);
  j["overrides"] = overrides;
  j["value_protection"] = json_io::to_json(cfg.value_protection);
  j["encoding"] = json_io::to_json(cfg.encoding);
  j["train"] = json_io::to_json(cfg.train);
  j["generation"] = {{"n_rows", cfg.generation.n_rows},
                     {"temperature", cfg.generation.temperature},
                     {"seed", cfg.generation.seed}};
  j["audit"] = json_io::to_json(cfg.audit);
  return j.dump(2);
}

ArgnModel fit_argn(const RawTable& data, const ValueProtectionConfig& protection, const EncoderOptions& encoding,
                   const TrainConfig& train_cfg, const EpochCallback& on_epoch) {
  const RawTable source = protection.enabled ? protect_table(data, protection) : data;
  TableEncoder encoders = TableEncoder::fit(source, encoding);
  const EncodedTable encoded = encode_table(source, encoders);
  ArgnModel model = ArgnModel::create(encoded.sub_columns, train_cfg.order_mode, train_cfg.seed);
  model.encoders = std::move(encoders);
  return train(std::move(model), encoded, train_cfg, on_epoch).model;
}

ShadowGenerator argn_shadow_generator(ValueProtectionConfig protection, EncoderOptions encoding, TrainConfig train_cfg) {
  return [=](const RawTable& shadow, std::uint64_t seed) {
    TrainConfig t = train_cfg;
    t.seed = derive_seed(seed, 0x7a);
    ValueProtectionConfig p = protection;
    p.rng_seed = derive_seed(seed, 0x9a);
    const ArgnModel model = fit_argn(shadow, p, encoding, t);
    GenerationRequest req;
    req.n_rows = shadow.row_count();
    req.seed = derive_seed(seed, 0x5a);
    return synthesize(model, req);
  };
}

}  // namespace argn
