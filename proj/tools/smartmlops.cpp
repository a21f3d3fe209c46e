/*
 * Copyright 2026 The smartmlops Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// smartmlops: command-line entry point.
//
// Exit codes: 0 success, 1 domain-negative outcome (run failed, drift
// flagged), 2 usage or input error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "smartmlops/config.hpp"
#include "smartmlops/dataset.hpp"
#include "smartmlops/drift_harness.hpp"
#include "smartmlops/error.hpp"
#include "smartmlops/executor.hpp"
#include "smartmlops/feature_store.hpp"
#include "smartmlops/model_registry.hpp"
#include "smartmlops/monitor_engine.hpp"
#include "smartmlops/pipeline_synth.hpp"
#include "smartmlops/pipeline_yaml.hpp"
#include "smartmlops/storage.hpp"
#include "smartmlops/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smartmlops;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;

struct Globals {
  std::string config_path;
  std::string store;
  std::string runs;
  int max_parallel = 0;  // 0: take from config, else 1
  bool json = false;
  std::string log_level = "warn";

  // Resolved values.
  fs::path store_root = "store";
  fs::path runs_root = "runs";
  int parallel = 1;
  drift::DriftThresholds thresholds;
  policy::PolicyConfig policy;
};

// Precedence: flag, then SMARTMLOPS_STORE (store only), then config file, then default.
void resolve_globals(Globals& g) {
  json cfg = json::object();
  if (!g.config_path.empty()) cfg = config::load_document(g.config_path);
  if (!cfg.is_object()) fail(ErrorCode::kParse, "global config must be a mapping");
  if (cfg.contains("store")) g.store_root = cfg["store"].get<std::string>();
  if (cfg.contains("runs")) g.runs_root = cfg["runs"].get<std::string>();
  if (cfg.contains("max_parallel")) g.parallel = cfg["max_parallel"].get<int>();
  if (cfg.contains("thresholds")) g.thresholds = drift::thresholds_from_json(cfg["thresholds"]);
  if (cfg.contains("policy")) g.policy = policy::policy_from_json(cfg["policy"]);
  if (cfg.contains("log_level") && g.log_level == "warn") g.log_level = cfg["log_level"].get<std::string>();
  if (const char* env = std::getenv("SMARTMLOPS_STORE"); env != nullptr && *env != '\0') g.store_root = env;
  if (!g.store.empty()) g.store_root = g.store;
  if (!g.runs.empty()) g.runs_root = g.runs;
  if (g.max_parallel != 0) g.parallel = g.max_parallel;
  if (g.parallel < 1) fail(ErrorCode::kInvalidArgument, "max_parallel must be at least 1");
  spdlog::set_level(spdlog::level::from_str(g.log_level));
}

void emit(const Globals& g, const json& doc, const std::string& text) {
  if (g.json) {
    std::cout << doc.dump(2) << "\n";
  } else if (!text.empty()) {
    std::cout << text << (text.back() == '\n' ? "" : "\n");
  }
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::vector<std::string> paths;
  std::string out = "pipelines";
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  std::vector<fs::path> paths;
  for (const auto& p : a.paths) {
    if (!fs::exists(p)) fail(ErrorCode::kNotFound, fmt::format("cannot read '{}'", p));
    paths.emplace_back(p);
  }
  const auto intents = synth::scan_source(paths);
  json doc{{"pipelines", json::array()}};
  if (intents.empty()) {
    emit(g, doc, "no intents found");
    return kOk;
  }
  const synth::RuleBasedProvider provider;
  const auto specs = synth::synthesize_all(intents, provider);
  fs::create_directories(a.out);
  std::string text;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto path = fs::path(a.out) / (specs[i].name + ".yaml");
    pipeline::save_pipeline(path, specs[i]);
    doc["pipelines"].push_back({{"name", specs[i].name},
                                {"path", path.string()},
                                {"source", fmt::format("{}:{}", intents[i].location.file, intents[i].location.line)}});
    text += fmt::format("wrote {} ({}:{})\n", path.string(), intents[i].location.file, intents[i].location.line);
  }
  emit(g, doc, text);
  return kOk;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string pipeline;
  int max_parallel = 0;
  std::optional<std::uint64_t> seed;
  std::string run_id;
  std::vector<std::string> inputs;
};

int cmd_run(const Globals& g, const RunArgs& a) {
  auto spec = pipeline::load_pipeline(a.pipeline);
  if (const auto errors = pipeline::validate_graph(spec); !errors.empty()) {
    json list = json::array();
    for (const auto& e : errors) list.push_back({{"kind", pipeline::to_string(e.kind)}, {"nodes", e.nodes}, {"message", e.message}});
    emit(g, {{"valid", false}, {"errors", list}}, "");
    if (!g.json) std::cerr << "invalid pipeline: " << pipeline::describe(errors) << "\n";
    return kUsage;
  }
  if (a.seed) {
    for (auto& n : spec.nodes) {
      if (n.kind != pipeline::StepKind::kCommand) n.params["seed"] = std::to_string(*a.seed);
    }
  }
  exec::ExecutionOptions opt;
  opt.max_parallel = a.max_parallel != 0 ? a.max_parallel : g.parallel;
  opt.runs_root = g.runs_root;
  opt.store_root = g.store_root;
  opt.run_id = a.run_id;
  for (const auto& kv : a.inputs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::kInvalidArgument, fmt::format("--input expects name=path, got '{}'", kv));
    opt.external_inputs[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const auto record = exec::execute(spec, opt);
  const auto record_path = g.runs_root / record.run_id / "record.json";
  auto doc = exec::to_json(record);
  doc["record_path"] = record_path.string();
  std::string text = fmt::format("run {} {}\n", record.run_id, exec::to_string(record.status));
  for (const auto& layer : record.layers) {
    for (const auto& id : layer) {
      const auto& n = record.nodes.at(id);
      text += fmt::format("  {:<16} {}{}\n", id, exec::to_string(n.status), n.cause.empty() ? "" : "  (" + n.cause + ")");
    }
  }
  text += fmt::format("record: {}\n", record_path.string());
  emit(g, doc, text);
  return record.succeeded() ? kOk : kNegative;
}

// ---- validate -------------------------------------------------------------

struct ValidateArgs {
  std::string incoming;
  std::string reference;
  std::string reference_csv;
  std::string features;
  std::size_t bins = drift::kDefaultBinCount;
  std::optional<double> kl_delta;
};

int cmd_validate(const Globals& g, const ValidateArgs& a) {
  if (a.reference.empty() == a.reference_csv.empty()) {
    fail(ErrorCode::kInvalidArgument, "give exactly one of --reference <dataset_id> or --reference-csv <file>");
  }
  const auto features = split_commas(a.features);
  validation::ReferenceSet ref;
  if (!a.reference.empty()) {
    ref = validation::ReferenceSet::latest(store::FeatureStore(g.store_root), a.reference, features);
  } else {
    const auto reference = data::ingest_csv(a.reference_csv);
    std::vector<store::FeatureStatsRecord> records;
    for (const auto& name : features.empty() ? reference.column_names() : features) {
      records.push_back(store::compute_feature_stats("reference", reference.at(name), a.bins));
    }
    ref = validation::ReferenceSet::from_records(std::move(records));
  }
  auto thresholds = g.thresholds;
  if (a.kl_delta) thresholds.kl_delta = *a.kl_delta;
  thresholds.validate();
  const auto report = validation::validate_ingest(ref, data::ingest_csv(a.incoming), thresholds);
  std::cout << validation::to_json(report).dump(2) << "\n";
  return report.passed ? kOk : kNegative;
}

// ---- monitor --------------------------------------------------------------

int cmd_monitor(const Globals& g, const std::string& config_path) {
  const auto doc = config::load_document(config_path);
  const auto base = fs::absolute(config_path).parent_path();
  auto with_defaults = doc;
  if (!with_defaults.contains("store") || std::getenv("SMARTMLOPS_STORE") != nullptr || !g.store.empty()) {
    with_defaults["store"] = fs::absolute(g.store_root).string();
  }
  if (!with_defaults.contains("runs") || !g.runs.empty()) with_defaults["runs"] = fs::absolute(g.runs_root).string();
  if (!with_defaults.contains("thresholds")) with_defaults["thresholds"] = drift::to_json(g.thresholds);
  if (!with_defaults.contains("policy")) with_defaults["policy"] = policy::to_json(g.policy);
  if (!with_defaults.contains("max_parallel")) with_defaults["max_parallel"] = g.parallel;
  const auto config = monitor::config_from_json(with_defaults, base);
  const auto stream = monitor::stream_from_json(doc, base);
  const auto result = monitor::run(config, stream);

  json events = json::array();
  std::size_t retrains = 0;
  for (const auto& e : result.events) {
    events.push_back(monitor::to_json(e));
    if (e.kind == monitor::EventKind::kRetrainTriggered) ++retrains;
  }
  const auto version_json = [](const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); };
  json out{{"session", config.session},
           {"batches", result.metrics.size()},
           {"events", events},
           {"events_path", (result.session_dir / "events.jsonl").string()},
           {"metrics_path", (result.session_dir / "metrics.csv").string()},
           {"initial_production", version_json(result.initial_production)},
           {"final_production", version_json(result.final_production)}};
  std::string text = fmt::format("monitored {} batches, {} events, {} retrain triggers\n", result.metrics.size(),
                                 result.events.size(), retrains);
  for (const auto& e : result.events) text += fmt::format("  batch {:>3} {}\n", e.batch, monitor::to_string(e.kind));
  text += fmt::format("events: {}\n", (result.session_dir / "events.jsonl").string());
  emit(g, out, text);
  return kOk;
}

// ---- registry -------------------------------------------------------------

json version_summary(const registry::ModelVersion& mv) {
  auto j = registry::to_json(mv);
  return j;
}

std::string stage_line(const registry::ModelVersion& mv) {
  std::string metrics;
  for (const auto& [k, v] : mv.metrics) metrics += fmt::format(" {}={:.4f}", k, v);
  return fmt::format("{} v{} {}{}", mv.model_name, mv.version, registry::to_string(mv.stage), metrics);
}

struct RegistryArgs {
  std::string model;
  std::uint64_t version = 0;
  std::optional<std::uint64_t> to;
  bool verify = false;
};

int cmd_registry_list(const Globals& g, const RegistryArgs& a) {
  registry::ModelRegistry reg(g.store_root);
  json doc = json::array();
  std::string text;
  const auto models = a.model.empty() ? reg.list_models() : std::vector<std::string>{a.model};
  for (const auto& m : models) {
    for (const auto& mv : reg.list(m)) {
      doc.push_back(version_summary(mv));
      text += stage_line(mv) + "\n";
    }
  }
  emit(g, doc, text.empty() ? "no models registered" : text);
  return kOk;
}

int cmd_registry_show(const Globals& g, const RegistryArgs& a) {
  registry::ModelRegistry reg(g.store_root);
  const auto mv = reg.get(a.model, a.version, a.verify);
  auto doc = version_summary(mv);
  if (a.verify) doc["verified"] = true;
  emit(g, doc, stage_line(mv) + (a.verify ? " (artifact verified)" : ""));
  return kOk;
}

int cmd_registry_promote(const Globals& g, const RegistryArgs& a) {
  registry::ModelRegistry reg(g.store_root);
  const auto before = reg.state(a.model).production;
  const auto after = reg.promote(a.model, a.version);
  json doc{{"model_name", a.model}, {"production", *after.production}};
  doc["previous"] = before ? json(*before) : json(nullptr);
  emit(g, doc,
       fmt::format("{}: production {} -> v{}", a.model, before ? fmt::format("v{}", *before) : "none", *after.production));
  return kOk;
}

int cmd_registry_rollback(const Globals& g, const RegistryArgs& a) {
  registry::ModelRegistry reg(g.store_root);
  const auto before = reg.state(a.model).production;
  const auto after = reg.rollback(a.model, a.to);
  json doc{{"model_name", a.model}, {"previous", *before}, {"production", *after.production}};
  emit(g, doc, fmt::format("{}: production v{} -> v{}", a.model, *before, *after.production));
  return kOk;
}

int cmd_registry_archive(const Globals& g, const RegistryArgs& a) {
  registry::ModelRegistry reg(g.store_root);
  reg.archive(a.model, a.version);
  emit(g, {{"model_name", a.model}, {"archived", a.version}}, fmt::format("{}: v{} archived", a.model, a.version));
  return kOk;
}

int cmd_registry_lineage(const Globals& g, const RegistryArgs& a) {
  registry::ModelRegistry reg(g.store_root);
  const auto chain = reg.lineage_of(a.model, a.version);
  json doc = json::array();
  std::string text;
  for (const auto& mv : chain) {
    doc.push_back(version_summary(mv));
    text += fmt::format("{}v{} run={} stage={} feature_stats={}\n", text.empty() ? "" : "<- ", mv.version,
                        mv.lineage.run_id, registry::to_string(mv.stage), mv.lineage.feature_stats.size());
  }
  emit(g, doc, text);
  return kOk;
}

// ---- features -------------------------------------------------------------

struct FeaturesArgs {
  std::string dataset_id;
  std::string feature;
  std::optional<std::uint64_t> version;
  std::string csv;
  std::string features;
  std::size_t bins = drift::kDefaultBinCount;
};

int cmd_features_list(const Globals& g, const FeaturesArgs& a) {
  store::FeatureStore fstore(g.store_root);
  json doc = json::array();
  std::string text;
  if (a.dataset_id.empty()) {
    for (const auto& ds : fstore.list_datasets()) {
      doc.push_back(ds);
      text += ds + "\n";
    }
  } else {
    for (const auto& s : fstore.list_stats(a.dataset_id)) {
      doc.push_back({{"feature", s.feature}, {"latest_version", s.latest_version}, {"created_at", format_timestamp(s.created_at)}});
      text += fmt::format("{} v{} {}\n", s.feature, s.latest_version, format_timestamp(s.created_at));
    }
  }
  emit(g, doc, text.empty() ? "no feature stats" : text);
  return kOk;
}

int cmd_features_show(const Globals& g, const FeaturesArgs& a) {
  const auto rec = store::FeatureStore(g.store_root).get_stats(a.dataset_id, a.feature, a.version);
  const auto doc = store::to_json(rec);
  emit(g, doc, doc.dump(2));
  return kOk;
}

int cmd_features_put(const Globals& g, const FeaturesArgs& a) {
  store::FeatureStore fstore(g.store_root);
  const auto dataset = data::ingest_csv(a.csv);
  const auto names = a.features.empty() ? dataset.column_names() : split_commas(a.features);
  json doc = json::array();
  std::string text;
  for (const auto& name : names) {
    const auto version = fstore.put_stats(store::compute_feature_stats(a.dataset_id, dataset.at(name), a.bins));
    doc.push_back({{"feature", name}, {"version", version}});
    text += fmt::format("{}/{} v{}\n", a.dataset_id, name, version);
  }
  emit(g, doc, text);
  return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string scenario;
  std::string out;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> seed;
  bool serial = false;
};

// Scenario file: {scenario: {...}, seeds: N, first_seed: S, bins: K, psi_threshold: T}
int cmd_bench(const Globals& g, const BenchArgs& a) {
  const auto doc = config::load_document(a.scenario);
  if (!doc.is_object() || !doc.contains("scenario")) fail(ErrorCode::kParse, "bench file needs a 'scenario' mapping");
  for (const auto& [k, v] : doc.items()) {
    if (k != "scenario" && k != "seeds" && k != "first_seed" && k != "bins" && k != "psi_threshold") {
      fail(ErrorCode::kParse, fmt::format("bench file: unknown key '{}'", k));
    }
  }
  const auto config = harness::scenario_from_json(doc["scenario"]);
  harness::DdaOptions options;
  options.thresholds = g.thresholds;
  if (doc.contains("psi_threshold")) options.thresholds.psi_threshold = doc["psi_threshold"].get<double>();
  options.bins = doc.value("bins", options.bins);
  const std::size_t count = a.seeds.value_or(doc.value("seeds", std::size_t{1}));
  const std::uint64_t first = a.seed.value_or(doc.value("first_seed", config.seed));
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;

  const auto result = a.serial ? harness::serial::run_dda_monte_carlo(config, seeds, options)
                               : harness::parallel::run_dda_monte_carlo(config, seeds, options);
  auto out = harness::to_json(result);
  out["seeds"] = count;
  out["first_seed"] = first;
  out["scenario"] = harness::to_json(config);
  out["psi_threshold"] = options.thresholds.psi_threshold;
  out["bins"] = options.bins;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    storage::write_file_atomic(fs::path(a.out) / "dda.json", out.dump(2) + "\n");
    storage::write_file_atomic(fs::path(a.out) / "decisions.csv", harness::decisions_csv(result));
  }
  emit(g, out,
       fmt::format("DDA {:.4f}  FPR {:.4f}  (TP {} FP {} TN {} FN {}, {} seeds)", result.dda(),
                   result.false_positive_rate(), result.tp, result.fp, result.tn, result.fn, count));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("smartmlops");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"smartmlops: pipeline synthesis, orchestration, validation, monitoring and model registry"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Global config file (YAML or JSON)");
  app.add_option("--store", g.store, "Store root (default ./store, env SMARTMLOPS_STORE)");
  app.add_option("--runs", g.runs, "Runs root (default ./runs)");
  app.add_option("--max-parallel", g.max_parallel, "Default executor parallelism")->check(CLI::PositiveNumber);
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

  int code = kOk;
  std::function<int()> action;

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Scan sources for mlops directives and write pipeline YAML");
  synth_cmd->fallthrough();
  synth_cmd->add_option("paths", synth_args.paths, "Files or directories to scan")->required();
  synth_cmd->add_option("-o,--out", synth_args.out, "Output directory");
  synth_cmd->callback([&] { action = [&] { return cmd_synth(g, synth_args); }; });

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Validate, schedule and execute a pipeline");
  run_cmd->fallthrough();
  run_cmd->add_option("pipeline", run_args.pipeline, "Pipeline YAML")->required();
  run_cmd->add_option("--max-parallel", run_args.max_parallel, "Concurrent steps per layer")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_args.seed, "Seed for every builtin step");
  run_cmd->add_option("--run-id", run_args.run_id, "Explicit run id");
  run_cmd->add_option("--input", run_args.inputs, "External artifact name=path");
  run_cmd->callback([&] { action = [&] { return cmd_run(g, run_args); }; });

  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand("validate", "Check an incoming CSV against reference statistics");
  val_cmd->fallthrough();
  val_cmd->add_option("incoming", val_args.incoming, "Incoming CSV")->required();
  val_cmd->add_option("--reference", val_args.reference, "Feature-store dataset id");
  val_cmd->add_option("--reference-csv", val_args.reference_csv, "Reference CSV");
  val_cmd->add_option("--features", val_args.features, "Comma-separated monitored features");
  val_cmd->add_option("--bins", val_args.bins, "Bins for --reference-csv");
  val_cmd->add_option("--kl-delta", val_args.kl_delta, "KL threshold");
  val_cmd->callback([&] { action = [&] { return cmd_validate(g, val_args); }; });

  std::string monitor_config;
  auto* mon_cmd = app.add_subcommand("monitor", "Run the monitoring loop described by a config file");
  mon_cmd->fallthrough();
  mon_cmd->add_option("config", monitor_config, "Monitor config (YAML or JSON)")->required();
  mon_cmd->callback([&] { action = [&] { return cmd_monitor(g, monitor_config); }; });

  RegistryArgs reg_args;
  auto* reg_cmd = app.add_subcommand("registry", "Inspect and change model versions");
  reg_cmd->fallthrough();
  reg_cmd->require_subcommand(1);
  auto* reg_list = reg_cmd->add_subcommand("list", "List versions");
  reg_list->fallthrough();
  reg_list->add_option("model", reg_args.model, "Model name");
  reg_list->callback([&] { action = [&] { return cmd_registry_list(g, reg_args); }; });
  auto* reg_show = reg_cmd->add_subcommand("show", "Show one version");
  reg_show->fallthrough();
  reg_show->add_option("model", reg_args.model)->required();
  reg_show->add_option("version", reg_args.version)->required();
  reg_show->add_flag("--verify", reg_args.verify, "Re-hash the artifact");
  reg_show->callback([&] { action = [&] { return cmd_registry_show(g, reg_args); }; });
  auto* reg_promote = reg_cmd->add_subcommand("promote", "Promote a candidate to production");
  reg_promote->fallthrough();
  reg_promote->add_option("model", reg_args.model)->required();
  reg_promote->add_option("version", reg_args.version)->required();
  reg_promote->callback([&] { action = [&] { return cmd_registry_promote(g, reg_args); }; });
  auto* reg_rollback = reg_cmd->add_subcommand("rollback", "Restore an earlier production version");
  reg_rollback->fallthrough();
  reg_rollback->add_option("model", reg_args.model)->required();
  reg_rollback->add_option("--to", reg_args.to, "Target version");
  reg_rollback->callback([&] { action = [&] { return cmd_registry_rollback(g, reg_args); }; });
  auto* reg_archive = reg_cmd->add_subcommand("archive", "Archive a candidate");
  reg_archive->fallthrough();
  reg_archive->add_option("model", reg_args.model)->required();
  reg_archive->add_option("version", reg_args.version)->required();
  reg_archive->callback([&] { action = [&] { return cmd_registry_archive(g, reg_args); }; });
  auto* reg_lineage = reg_cmd->add_subcommand("lineage", "Parent chain of a version");
  reg_lineage->fallthrough();
  reg_lineage->add_option("model", reg_args.model)->required();
  reg_lineage->add_option("version", reg_args.version)->required();
  reg_lineage->callback([&] { action = [&] { return cmd_registry_lineage(g, reg_args); }; });

  FeaturesArgs feat_args;
  auto* feat_cmd = app.add_subcommand("features", "Inspect and publish reference feature statistics");
  feat_cmd->fallthrough();
  feat_cmd->require_subcommand(1);
  auto* feat_list = feat_cmd->add_subcommand("list", "List datasets, or features of one dataset");
  feat_list->fallthrough();
  feat_list->add_option("dataset_id", feat_args.dataset_id);
  feat_list->callback([&] { action = [&] { return cmd_features_list(g, feat_args); }; });
  auto* feat_show = feat_cmd->add_subcommand("show", "Show one stats record");
  feat_show->fallthrough();
  feat_show->add_option("dataset_id", feat_args.dataset_id)->required();
  feat_show->add_option("feature", feat_args.feature)->required();
  feat_show->add_option("--version", feat_args.version);
  feat_show->callback([&] { action = [&] { return cmd_features_show(g, feat_args); }; });
  auto* feat_put = feat_cmd->add_subcommand("put", "Compute and publish stats from a CSV");
  feat_put->fallthrough();
  feat_put->add_option("dataset_id", feat_args.dataset_id)->required();
  feat_put->add_option("csv", feat_args.csv)->required();
  feat_put->add_option("--features", feat_args.features, "Comma-separated columns");
  feat_put->add_option("--bins", feat_args.bins);
  feat_put->callback([&] { action = [&] { return cmd_features_put(g, feat_args); }; });

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Measure drift detection accuracy on a synthetic scenario");
  bench_cmd->fallthrough();
  bench_cmd->add_option("scenario", bench_args.scenario, "Bench file (YAML or JSON)")->required();
  bench_cmd->add_option("-o,--out", bench_args.out, "Directory for dda.json and decisions.csv");
  bench_cmd->add_option("--seeds", bench_args.seeds, "Number of Monte Carlo seeds");
  bench_cmd->add_option("--seed", bench_args.seed, "First seed");
  bench_cmd->add_flag("--serial", bench_args.serial, "Use the serial reference loop");
  bench_cmd->callback([&] { action = [&] { return cmd_bench(g, bench_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    resolve_globals(g);
    code = action ? action() : kUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    if (g.json) std::cout << json{{"error", e.what()}, {"code", to_string(e.code())}}.dump(2) << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    if (g.json) std::cout << json{{"error", e.what()}}.dump(2) << "\n";
    return kUsage;
  }
  return code;
}
