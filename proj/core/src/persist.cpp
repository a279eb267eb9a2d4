#include "argn/persist.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "argn/error.hpp"
#include "json_io.hpp"

namespace argn {

using json_io::json;

namespace {

constexpr char kMagic[4] = {'A', 'R', 'G', 'N'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

template <typename U>
U get_le(std::string_view in, std::size_t at) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}

json header_json(const ArgnModel& model) {
  json subs = json::array();
  for (const auto& s : model.sub_columns())
    subs.push_back({{"name", s.name}, {"cardinality", s.cardinality}, {"parent", s.parent}});
  json shapes = json::array();
  for (const auto& p : model.params()) shapes.push_back({{"name", p.name}, {"rows", p.rows}, {"cols", p.cols}});
  const auto& sz = model.sizes();
  return {{"sub_columns", subs},
          {"order_mode", to_string(model.order_mode())},
          {"fixed_order", model.fixed_order()},
          {"layer_sizes", {{"embedding", sz.embedding}, {"regressor", sz.regressor}, {"predictor", sz.predictor}}},
          {"encoders", json_io::to_json(model.encoders)},
          {"train_config", json_io::to_json(model.train_config)},
          {"training_meta", json_io::to_json(model.meta)},
          {"parameters", shapes}};
}

}  // namespace

std::string serialize_model(const ArgnModel& model) {
  const std::string header = header_json(model).dump();
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kModelFormatVersion);
  put_le<std::uint64_t>(out, header.size());
  out += header;
  out.reserve(out.size() + 4 * model.parameter_count());
  for (const auto& p : model.params())
    for (float v : p.value) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

ArgnModel deserialize_model(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("not an ARGN model file");
  if (bytes.size() < 16) throw FormatError("truncated model file: incomplete preamble");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kModelFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version) + " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");
  const auto header_len = get_le<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - 16)
    throw FormatError("truncated model file: header declares " + std::to_string(header_len) + " bytes, " +
                      std::to_string(bytes.size() - 16) + " available");

  json h;
  try {
    h = json::parse(bytes.substr(16, header_len));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  }

  ArgnModel model;
  try {
    std::vector<SubColumn> subs;
    for (const auto& s : h.at("sub_columns"))
      subs.push_back({s.at("name").get<std::string>(), s.at("cardinality").get<std::int32_t>(),
                      s.at("parent").get<std::string>()});
    model.set_layout(std::move(subs), order_mode_from_string(h.at("order_mode").get<std::string>()),
                     h.at("fixed_order").get<std::vector<std::size_t>>());
    const auto& sz = h.at("layer_sizes");
    const LayerSizes declared{sz.at("embedding").get<std::vector<std::size_t>>(),
                              sz.at("regressor").get<std::vector<std::size_t>>(),
                              sz.at("predictor").get<std::vector<std::size_t>>()};
    if (!(declared == model.sizes())) throw FormatError("layer sizes in header disagree with the sub-columns");
    const auto& shapes = h.at("parameters");
    if (shapes.size() != model.params().size())
      throw FormatError("header lists " + std::to_string(shapes.size()) + " tensors, expected " +
                        std::to_string(model.params().size()));
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      const auto& p = model.params()[k];
      if (shapes[k].at("name").get<std::string>() != p.name || shapes[k].at("rows").get<std::size_t>() != p.rows ||
          shapes[k].at("cols").get<std::size_t>() != p.cols)
        throw FormatError("tensor " + std::to_string(k) + " shape mismatch for '" + p.name + "'");
    }
    model.encoders = json_io::table_encoder_from_json(h.at("encoders"));
    json_io::from_json_strict(h.at("train_config"), model.train_config);
    model.meta = json_io::training_meta_from_json(h.at("training_meta"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  }

  const std::size_t weights_at = 16 + header_len;
  const std::size_t remaining = bytes.size() - weights_at;
  const std::size_t expected = model.parameter_count();
  if (remaining % 4 != 0 || remaining / 4 != expected)
    throw FormatError("weight section: expected " + std::to_string(expected) + " floats, found " +
                      std::to_string(remaining / 4) + (remaining % 4 ? " and a partial float" : ""));
  std::size_t at = weights_at;
  for (auto& p : model.params())
    for (auto& v : p.value) {
      v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, at));
      at += 4;
    }
  return model;
}

void save_model(const ArgnModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

ArgnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

namespace {

json scores_json(const MlScores& s) {
  json j = json::object();
  if (s.auc) j["auc"] = *s.auc;
  if (s.macro_f1) j["macro_f1"] = *s.macro_f1;
  if (s.rmse) j["rmse"] = *s.rmse;
  return j;
}

}  // namespace

std::string to_json(const EvalReport& r) {
  json j{{"jsd", r.jsd},
         {"jsd_mean", r.jsd_mean},
         {"wd", r.wd},
         {"wd_mean", r.wd_mean},
         {"association_l2", r.association_l2}};
  if (r.detection_auc) j["detection_auc"] = *r.detection_auc;
  if (r.ml_efficiency) {
    const auto& m = *r.ml_efficiency;
    j["ml_efficiency"] = {{"target", m.target},
                          {"task", m.task},
                          {"synthetic", scores_json(m.synthetic)},
                          {"baseline", scores_json(m.baseline)}};
  }
  if (r.dcr_integral) j["dcr_integral"] = *r.dcr_integral;
  return j.dump(2);
}

std::string to_json(const AuditReport& r) {
  json targets = json::array();
  for (const auto& t : r.targets) {
    json attacks = json::array();
    for (const auto& a : t.attacks)
      attacks.push_back({{"attack", a.attack},
                         {"auc", a.auc},
                         {"accuracy", a.accuracy},
                         {"n_shadow", a.scores.size()},
                         {"scores", a.scores},
                         {"labels", a.labels}});
    targets.push_back({{"target_index", t.target_index}, {"achilles", t.achilles}, {"attacks", attacks}});
  }
  return json{{"config", json_io::to_json(r.config)}, {"targets", targets}}.dump(2);
}

std::string dcr_summary_json(const DcrCurve& c) {
  return json{{"dcr_integral", c.integral}, {"q98", c.q98}, {"risk", c.integral > 0 ? 1 : 0}}.dump(2);
}

}  // namespace argn
