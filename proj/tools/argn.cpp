// argn: train, generate, evaluate, dcr and audit from the command line.
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "argn/audit.hpp"
#include "argn/error.hpp"
#include "argn/metrics.hpp"
#include "argn/persist.hpp"
#include "argn/pipeline.hpp"
#include "argn/sampler.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw argn::IoError("cannot write '" + path + "'");
  out << text << '\n';
}

argn::RawTable read_with_schema(const std::string& path, const argn::TableSchema& schema) {
  return argn::with_schema(argn::read_csv(path), schema);
}

struct TrainArgs {
  std::string data, config, out;
  std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& a) {
  argn::RunConfig cfg = a.config.empty() ? argn::RunConfig{} : argn::load_run_config(a.config);
  std::string data = a.data;
  if (data.empty()) {
    if (!cfg.data) throw argn::ConfigError("no training data: pass --data or set \"data\" in the config");
    data = *cfg.data;
  }
  if (a.seed) {
    cfg.train.seed = *a.seed;
    cfg.value_protection.rng_seed = argn::derive_seed(*a.seed, 0x9a);
  }
  argn::RawTable raw = argn::read_csv(data);
  raw.schema = argn::infer_schema(raw, cfg.overrides);
  const auto model = argn::fit_argn(raw, cfg.value_protection, cfg.encoding, cfg.train,
                                    [](int epoch, double train_loss, double val_loss, double lr) {
                                      std::clog << "epoch " << epoch << " train " << train_loss << " val " << val_loss
                                                << " lr " << lr << '\n';
                                    });
  argn::save_model(model, a.out);
  std::clog << "saved " << a.out << " (" << model.parameter_count() << " parameters, best epoch "
            << model.meta.best_epoch << ")\n";
  return 0;
}

struct GenerateArgs {
  std::string model, out;
  std::size_t n = 0;
  std::vector<std::string> conditions;
  std::string order;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

int run_generate(const GenerateArgs& a) {
  const auto model = argn::load_model(a.model);
  argn::GenerationRequest req;
  req.n_rows = a.n;
  req.temperature = a.temperature;
  req.seed = a.seed;
  std::map<std::string, std::string> raw;
  for (const auto& c : a.conditions) {
    const auto eq = c.find('=');
    if (eq == std::string::npos || eq == 0) throw argn::ConfigError("--condition expects col=value, got '" + c + "'");
    raw[c.substr(0, eq)] = c.substr(eq + 1);
  }
  req.conditions = argn::conditions_from_raw(model, raw);
  if (!a.order.empty()) {
    std::vector<std::string> names;
    std::stringstream ss(a.order);
    for (std::string name; std::getline(ss, name, ',');)
      if (!name.empty()) names.push_back(name);
    req.order = argn::order_from_names(model, names);
  }
  argn::write_csv(argn::synthesize(model, req), a.out);
  return 0;
}

struct EvaluateArgs {
  std::string real, syn, holdout, target, report;
  std::uint64_t seed = 0;
};

int run_evaluate(const EvaluateArgs& a) {
  argn::RawTable real = argn::read_csv(a.real);
  real.schema = argn::infer_schema(real);
  const argn::RawTable syn = read_with_schema(a.syn, real.schema);
  std::optional<argn::RawTable> holdout;
  if (!a.holdout.empty()) holdout = read_with_schema(a.holdout, real.schema);
  argn::EvalOptions opts;
  if (!a.target.empty()) opts.target = a.target;
  opts.seed = a.seed;
  const auto report = argn::evaluate(real, syn, holdout ? &*holdout : nullptr, opts);
  write_text(a.report, argn::to_json(report));
  return 0;
}

struct DcrArgs {
  std::string train, syn, test, out_cdf;
};

int run_dcr(const DcrArgs& a) {
  argn::RawTable train = argn::read_csv(a.train);
  train.schema = argn::infer_schema(train);
  const auto syn = read_with_schema(a.syn, train.schema);
  const auto test = read_with_schema(a.test, train.schema);
  const auto curve = argn::dcr_curve(argn::dcr(train, syn), argn::dcr(train, test));
  std::ofstream out(a.out_cdf, std::ios::trunc);
  if (!out) throw argn::IoError("cannot write '" + a.out_cdf + "'");
  out.precision(17);
  out << "distance,cdf_syn,cdf_test\n";
  for (std::size_t i = 0; i < curve.distance.size(); ++i)
    out << curve.distance[i] << ',' << curve.cdf_syn[i] << ',' << curve.cdf_test[i] << '\n';
  std::cout << argn::dcr_summary_json(curve) << '\n';
  return 0;
}

struct AuditArgs {
  std::string data, config, report;
  std::size_t auto_target = 0;
};

int run_audit_cmd(const AuditArgs& a) {
  argn::RunConfig cfg = a.config.empty() ? argn::RunConfig{} : argn::load_run_config(a.config);
  argn::RawTable raw = argn::read_csv(a.data);
  raw.schema = argn::infer_schema(raw, cfg.overrides);
  if (a.auto_target > 0) cfg.audit.target_indices = argn::top_vulnerable(raw, a.auto_target);
  if (cfg.audit.target_indices.empty())
    throw argn::ConfigError("no audit targets: set audit.target_indices or pass --auto-target");
  const auto generator = argn::argn_shadow_generator(cfg.value_protection, cfg.encoding, cfg.train);
  const auto report = argn::run_audit(raw, cfg.audit, generator);
  write_text(a.report, argn::to_json(report));
  for (const auto& t : report.targets)
    for (const auto& r : t.attacks)
      std::clog << "target " << t.target_index << ' ' << r.attack << " auc " << r.auc << " accuracy " << r.accuracy
                << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flat autoregressive tabular synthesizer"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Fit a model on a CSV table");
  train->add_option("--data", train_args.data, "Training CSV (overrides config \"data\")");
  train->add_option("--config", train_args.config, "Run configuration JSON");
  train->add_option("--out", train_args.out, "Model file to write")->required();
  train->add_option("--seed", train_args.seed, "Training seed");

  GenerateArgs gen_args;
  auto* generate = app.add_subcommand("generate", "Sample synthetic rows from a model");
  generate->add_option("--model", gen_args.model, "Model file")->required();
  generate->add_option("-n", gen_args.n, "Number of rows")->required();
  generate->add_option("--out", gen_args.out, "Output CSV")->required();
  generate->add_option("--condition", gen_args.conditions, "Fix a column: col=value (repeatable)");
  generate->add_option("--order", gen_args.order, "Generation order: col,col,...");
  generate->add_option("--temperature", gen_args.temperature, "Sampling temperature")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_args.seed, "Sampling seed");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Fidelity and privacy metrics");
  evaluate->add_option("--real", eval_args.real, "Real (training) CSV")->required();
  evaluate->add_option("--syn", eval_args.syn, "Synthetic CSV")->required();
  evaluate->add_option("--holdout", eval_args.holdout, "Real holdout CSV");
  evaluate->add_option("--target", eval_args.target, "Target column for ML efficiency");
  evaluate->add_option("--report", eval_args.report, "Report JSON to write")->required();
  evaluate->add_option("--seed", eval_args.seed, "Seed for detection splits");

  DcrArgs dcr_args;
  auto* dcr = app.add_subcommand("dcr", "Distance-to-closest-record CDF comparison");
  dcr->add_option("--train", dcr_args.train, "Training CSV")->required();
  dcr->add_option("--syn", dcr_args.syn, "Synthetic CSV")->required();
  dcr->add_option("--test", dcr_args.test, "Holdout CSV")->required();
  dcr->add_option("--out-cdf", dcr_args.out_cdf, "CSV of the two CDFs")->required();

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "Membership-inference audit with shadow models");
  audit->add_option("--data", audit_args.data, "Table to audit")->required();
  audit->add_option("--config", audit_args.config, "Run configuration JSON");
  audit->add_option("--report", audit_args.report, "Report JSON to write")->required();
  audit->add_option("--auto-target", audit_args.auto_target, "Audit the N most vulnerable rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsageError;
  }

  try {
    if (*train) return run_train(train_args);
    if (*generate) return run_generate(gen_args);
    if (*evaluate) return run_evaluate(eval_args);
    if (*dcr) return run_dcr(dcr_args);
    if (*audit) return run_audit_cmd(audit_args);
  } catch (const argn::ConfigError& e) {
    std::cerr << "argn: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "argn: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
