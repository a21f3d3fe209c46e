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

#include "smartmlops/monitor_engine.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "smartmlops/config.hpp"
#include "smartmlops/error.hpp"
#include "smartmlops/executor.hpp"
#include "smartmlops/feature_store.hpp"
#include "smartmlops/model_registry.hpp"
#include "smartmlops/pipeline_yaml.hpp"
#include "smartmlops/storage.hpp"

namespace smartmlops::monitor {

namespace fs = std::filesystem;

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kDriftFlagged: return "drift_flagged";
    case EventKind::kRetrainTriggered: return "retrain_triggered";
    case EventKind::kRetrainCompleted: return "retrain_completed";
    case EventKind::kRetrainFailed: return "retrain_failed";
    case EventKind::kModelPromoted: return "model_promoted";
    case EventKind::kCooldownSuppressed: return "cooldown_suppressed";
    case EventKind::kSchemaViolation: return "schema_violation";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view text) {
  for (const auto k : {EventKind::kDriftFlagged, EventKind::kRetrainTriggered, EventKind::kRetrainCompleted,
                       EventKind::kRetrainFailed, EventKind::kModelPromoted, EventKind::kCooldownSuppressed,
                       EventKind::kSchemaViolation}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::kParse, fmt::format("unknown monitor event kind '{}'", text));
}

BatchScore score_batch(const validation::ReferenceSet& reference, const data::Dataset& batch, double epsilon) {
  BatchScore score;
  bool first = true;
  for (const auto& feature : reference.monitored) {
    const auto* column = batch.find(feature);
    if (column == nullptr) continue;
    const auto& ref = reference.stats.at(feature);
    const bool numeric_ref = ref.binning.kind == drift::BinKind::kNumeric;
    if (numeric_ref && column->type != data::ColumnType::kNumeric) continue;
    const auto current = validation::bin_column(*column, ref.binning);
    if (!current) continue;
    const double value = drift::psi(ref.distribution(), *current, epsilon).total;
    score.psi[feature] = value;
    if (first || value > score.max_psi) {
      score.max_psi = value;
      score.max_feature = feature;
      first = false;
    }
  }
  return score;
}

void MonitorConfig::validate() const {
  if (session.empty()) fail(ErrorCode::kInvalidArgument, "monitor session name must not be empty");
  if (model_name.empty()) fail(ErrorCode::kInvalidArgument, "monitor config needs model_name");
  if (dataset_id.empty()) fail(ErrorCode::kInvalidArgument, "monitor config needs dataset_id");
  if (labels_available && target.empty()) fail(ErrorCode::kInvalidArgument, "labels_available needs a target column");
  if (retrain_pipeline.empty()) fail(ErrorCode::kInvalidArgument, "monitor config needs retrain_pipeline");
  if (retrain_window == 0) fail(ErrorCode::kInvalidArgument, "retrain_window must be at least 1");
  if (max_parallel < 1) fail(ErrorCode::kInvalidArgument, "max_parallel must be at least 1");
  thresholds.validate();
  policy.validate();
}

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

const std::set<std::string> kConfigKeys{
    "session", "store", "runs", "model_name", "dataset_id", "target", "features", "thresholds", "policy",
    "retrain_pipeline", "cooldown", "labels_available", "retrain_window", "max_parallel", "seed", "stream", "bootstrap"};

}  // namespace

MonitorConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::kParse, "monitor config must be a mapping");
  for (const auto& [k, v] : j.items()) {
    if (!kConfigKeys.contains(k)) fail(ErrorCode::kParse, fmt::format("monitor config: unknown key '{}'", k));
  }
  MonitorConfig c;
  try {
    c.session = j.value("session", c.session);
    if (j.contains("store")) c.store_root = resolve(base_dir, j["store"].get<std::string>());
    if (j.contains("runs")) c.runs_root = resolve(base_dir, j["runs"].get<std::string>());
    c.model_name = j.value("model_name", std::string{});
    c.dataset_id = j.value("dataset_id", c.model_name);
    c.target = j.value("target", std::string{});
    c.features = j.value("features", std::vector<std::string>{});
    if (j.contains("thresholds")) c.thresholds = drift::thresholds_from_json(j["thresholds"]);
    if (j.contains("policy")) c.policy = policy::policy_from_json(j["policy"]);
    if (j.contains("retrain_pipeline")) c.retrain_pipeline = resolve(base_dir, j["retrain_pipeline"].get<std::string>());
    const auto cooldown = j.value("cooldown", static_cast<std::int64_t>(c.cooldown));
    if (cooldown < 0) fail(ErrorCode::kInvalidArgument, "cooldown must be nonnegative");
    c.cooldown = static_cast<std::size_t>(cooldown);
    c.labels_available = j.value("labels_available", c.labels_available);
    c.retrain_window = j.value("retrain_window", c.retrain_window);
    c.max_parallel = j.value("max_parallel", c.max_parallel);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("monitor config: {}", e.what()));
  }
  c.validate();
  return c;
}

StreamSpec stream_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  StreamSpec s;
  if (!j.contains("stream")) fail(ErrorCode::kParse, "monitor config needs a stream");
  const auto& stream = j["stream"];
  if (stream.contains("scenario")) {
    auto scenario = harness::generate_scenario(harness::scenario_from_json(stream["scenario"]));
    s.batches = std::move(scenario.batches);
    s.bootstrap = std::move(scenario.reference);
  } else if (stream.contains("batches")) {
    for (const auto& p : stream["batches"]) s.batches.push_back(data::ingest_csv(resolve(base_dir, p.get<std::string>())));
  } else {
    fail(ErrorCode::kParse, "stream needs either 'scenario' or 'batches'");
  }
  if (j.contains("bootstrap")) s.bootstrap = data::ingest_csv(resolve(base_dir, j["bootstrap"].get<std::string>()));
  return s;
}

MonitorEngine::MonitorEngine(MonitorConfig config)
    : config_(std::move(config)), sequential_(config_.policy) {
  config_.validate();
  if (!fs::exists(config_.retrain_pipeline)) {
    fail(ErrorCode::kNotFound, fmt::format("retrain pipeline '{}' not found", config_.retrain_pipeline.string()));
  }
  set_retrain_pipeline(pipeline::load_pipeline(config_.retrain_pipeline));
  const auto dir = session_dir();
  fs::create_directories(dir);
  storage::write_file_atomic(dir / "events.jsonl", "");
  storage::write_file_atomic(dir / "metrics.csv", metrics_csv_header());
  load_production();
}

fs::path MonitorEngine::session_dir() const {
  return config_.runs_root / "monitor" / storage::encode_path_component(config_.session);
}

void MonitorEngine::set_retrain_pipeline(pipeline::PipelineSpec spec) {
  if (const auto errors = pipeline::validate_graph(spec); !errors.empty()) {
    fail(ErrorCode::kInvalidArgument, "retrain pipeline is invalid: " + pipeline::describe(errors));
  }
  bool has_register = false;
  for (const auto& n : spec.nodes) has_register = has_register || n.kind == pipeline::StepKind::kRegister;
  if (!has_register) fail(ErrorCode::kInvalidArgument, "retrain pipeline has no register step");
  retrain_spec_ = std::move(spec);
}

void MonitorEngine::load_production() {
  registry::ModelRegistry reg(config_.store_root);
  store::FeatureStore features(config_.store_root);
  const auto prod = reg.production(config_.model_name);
  if (prod) {
    reg.get(config_.model_name, prod->version, true);
    production_version_ = prod->version;
    model_ = learn::model_from_json(
        nlohmann::json::parse(storage::read_file(reg.artifact_path(config_.model_name, prod->version))));
    const auto acc = prod->metrics.find("accuracy");
    reference_accuracy_ = acc == prod->metrics.end() ? 0.0 : acc->second;

    // Prefer the exact stats versions the production model was trained against.
    std::vector<store::FeatureStatsRecord> records;
    for (const auto& ref : prod->lineage.feature_stats) {
      if (ref.dataset_id != config_.dataset_id) continue;
      if (!config_.features.empty() &&
          std::find(config_.features.begin(), config_.features.end(), ref.feature) == config_.features.end()) {
        continue;
      }
      records.push_back(features.get_stats(ref.dataset_id, ref.feature, ref.version));
    }
    const bool covers = !records.empty() && (config_.features.empty() || records.size() == config_.features.size());
    if (covers) {
      reference_ = validation::ReferenceSet::from_records(std::move(records));
      return;
    }
  }
  try {
    reference_ = validation::ReferenceSet::latest(features, config_.dataset_id, config_.features);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotFound) throw;
    reference_ = {};
  }
}

namespace {

pipeline::PipelineSpec with_overrides(pipeline::PipelineSpec spec, const MonitorConfig& c, const fs::path& rows) {
  std::string features;
  for (const auto& f : c.features) features += (features.empty() ? "" : ",") + f;
  for (auto& n : spec.nodes) {
    using pipeline::StepKind;
    if (n.kind == StepKind::kCommand) continue;
    n.params["seed"] = std::to_string(c.seed);
    if (n.kind == StepKind::kIngest) n.params["dataset"] = rows.string();
    if (n.kind == StepKind::kFeatures) {
      n.params["dataset_id"] = c.dataset_id;
      if (!features.empty()) n.params["features"] = features;
    }
    if (!c.target.empty() && (n.kind == StepKind::kFeatures || n.kind == StepKind::kTrain || n.kind == StepKind::kEvaluate)) {
      n.params["target"] = c.target;
    }
    if (n.kind == StepKind::kRegister || n.params.contains("model_name")) n.params["model_name"] = c.model_name;
    if (n.kind == StepKind::kDeployGate) n.params.erase("promote");
  }
  return spec;
}

struct RetrainOutcome {
  std::optional<std::uint64_t> version;
  std::string run_id;
  nlohmann::json failures = nlohmann::json::object();
};

RetrainOutcome run_retrain(const pipeline::PipelineSpec& base, const MonitorConfig& c, const data::Dataset& rows,
                           const fs::path& scratch) {
  fs::create_directories(scratch);
  const auto rows_path = scratch / "retrain_rows.csv";
  data::write_csv(rows_path, rows);
  exec::ExecutionOptions opt;
  opt.max_parallel = c.max_parallel;
  opt.runs_root = c.runs_root;
  opt.store_root = c.store_root;
  RetrainOutcome out;
  try {
    const auto record = exec::execute(with_overrides(base, c, rows_path), opt);
    out.run_id = record.run_id;
    for (const auto& [id, nr] : record.nodes) {
      if (nr.status == exec::NodeStatus::kFailed) out.failures[id] = nr.cause;
    }
    if (record.succeeded()) {
      for (const auto& n : base.nodes) {
        if (n.kind != pipeline::StepKind::kRegister) continue;
        const auto& notes = record.nodes.at(n.id).notes;
        if (notes.contains("version")) out.version = notes["version"].get<std::uint64_t>();
      }
      if (!out.version) out.failures["register"] = "register step reported no version";
    }
  } catch (const std::exception& e) {
    out.failures["pipeline"] = e.what();
  }
  return out;
}

}  // namespace

std::uint64_t MonitorEngine::bootstrap(const data::Dataset& data) {
  if (production_version_) return *production_version_;
  const auto outcome = run_retrain(retrain_spec_, config_, data, session_dir() / "bootstrap");
  if (!outcome.version) {
    fail(ErrorCode::kFailedPrecondition, fmt::format("bootstrap training failed: {}", outcome.failures.dump()));
  }
  registry::ModelRegistry(config_.store_root).promote(config_.model_name, *outcome.version, "monitor bootstrap");
  load_production();
  return *production_version_;
}

bool MonitorEngine::retrain(std::size_t batch_index, std::vector<MonitorEvent>& out) {
  data::Dataset rows = buffer_.front();
  for (std::size_t i = 1; i < buffer_.size(); ++i) rows.append(buffer_[i]);
  const auto outcome =
      run_retrain(retrain_spec_, config_, rows, session_dir() / "retrain" / fmt::format("batch-{}", batch_index));
  if (!outcome.version) {
    out.push_back({EventKind::kRetrainFailed, batch_index, {{"run_id", outcome.run_id}, {"failures", outcome.failures}}});
    return false;
  }
  const auto previous = production_version_;
  try {
    registry::ModelRegistry(config_.store_root)
        .promote(config_.model_name, *outcome.version, fmt::format("monitor retrain at batch {}", batch_index));
  } catch (const Error& e) {
    out.push_back({EventKind::kRetrainFailed, batch_index,
                   {{"run_id", outcome.run_id}, {"failures", {{"promote", e.what()}}}}});
    return false;
  }
  load_production();
  sequential_.reset();
  out.push_back({EventKind::kRetrainCompleted, batch_index,
                 {{"run_id", outcome.run_id}, {"version", *outcome.version}, {"rows", rows.row_count()}}});
  nlohmann::json promoted{{"version", *production_version_}, {"reference_accuracy", reference_accuracy_}};
  promoted["previous"] = previous ? nlohmann::json(*previous) : nlohmann::json(nullptr);
  out.push_back({EventKind::kModelPromoted, batch_index, promoted});
  return true;
}

MonitorEngine::StepOutput MonitorEngine::step(const data::Dataset& batch) {
  const auto t0 = std::chrono::steady_clock::now();
  if (reference_.monitored.empty()) {
    fail(ErrorCode::kFailedPrecondition,
         fmt::format("no reference stats for dataset '{}' in the feature store", config_.dataset_id));
  }
  StepOutput out;
  auto& sample = out.sample;
  sample.batch = next_batch_++;

  auto violations = data::check_schema(batch, validation::schema_from_reference(reference_));
  std::erase_if(violations, [](const auto& v) { return v.rule == "extra-column"; });
  if (!violations.empty()) {
    auto list = nlohmann::json::array();
    for (const auto& v : violations) list.push_back(data::to_json(v));
    out.events.push_back({EventKind::kSchemaViolation, sample.batch, {{"violations", list}}});
  }

  const auto score = score_batch(reference_, batch);
  sample.psi = score.psi;
  sample.drift_score = score.max_psi;

  std::optional<policy::RetrainDecision> decision;
  if (config_.labels_available && model_ && batch.find(config_.target) != nullptr) {
    try {
      const auto x = learn::encode_for_model(batch, model_->feature_names);
      const auto y = learn::binary_target(batch.at(config_.target));
      sample.accuracy = learn::accuracy(*model_, x, y);
      sample.s_t = reference_accuracy_ - *sample.accuracy;
      const policy::DegradationSignal signal{*sample.s_t, now()};
      decision = config_.policy.sequential ? sequential_.observe(signal) : policy::decide(signal, config_.policy);
      sample.posterior = decision->posterior;
    } catch (const Error& e) {
      spdlog::warn("batch {}: accuracy unavailable: {}", sample.batch, e.what());
    }
  }
  sample.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const bool psi_flag = sample.drift_score > config_.thresholds.psi_threshold;
  const bool posterior_flag = decision && decision->trigger;
  if (psi_flag) {
    out.events.push_back({EventKind::kDriftFlagged, sample.batch,
                          {{"feature", score.max_feature}, {"psi", score.max_psi},
                           {"threshold", config_.thresholds.psi_threshold}}});
  }

  buffer_.push_back(batch);
  while (buffer_.size() > config_.retrain_window) buffer_.pop_front();

  if (psi_flag || posterior_flag) {
    auto reasons = nlohmann::json::array();
    if (psi_flag) reasons.push_back("psi");
    if (posterior_flag) reasons.push_back("posterior");
    nlohmann::json detail{{"reasons", reasons}, {"drift_score", sample.drift_score}};
    if (sample.posterior) detail["posterior"] = *sample.posterior;
    if (last_retrain_batch_ && sample.batch - *last_retrain_batch_ <= config_.cooldown) {
      detail["cooldown_until"] = *last_retrain_batch_ + config_.cooldown;
      out.events.push_back({EventKind::kCooldownSuppressed, sample.batch, detail});
    } else {
      out.events.push_back({EventKind::kRetrainTriggered, sample.batch, detail});
      last_retrain_batch_ = sample.batch;
      retrain(sample.batch, out.events);
    }
  }
  record(out);
  return out;
}

void MonitorEngine::record(const StepOutput& output) {
  const auto dir = session_dir();
  for (const auto& e : output.events) {
    storage::append_line(dir / "events.jsonl", to_json(e).dump());
    events_.push_back(e);
  }
  storage::append_line(dir / "metrics.csv", metrics_csv_row(output.sample));
  metrics_.push_back(output.sample);
}

MonitorRun run(const MonitorConfig& config, const StreamSpec& stream) {
  MonitorEngine engine(config);
  if (stream.bootstrap) engine.bootstrap(*stream.bootstrap);
  MonitorRun result;
  result.initial_production = engine.production_version();
  for (const auto& batch : stream.batches) engine.step(batch);
  result.events = engine.events();
  result.metrics = engine.metrics();
  result.final_production = engine.production_version();
  result.session_dir = engine.session_dir();
  return result;
}

nlohmann::json to_json(const MonitorEvent& e) {
  return {{"kind", to_string(e.kind)}, {"batch", e.batch}, {"detail", e.detail}};
}

MonitorEvent event_from_json(const nlohmann::json& j) {
  return {parse_event_kind(j.at("kind").get<std::string>()), j.at("batch").get<std::size_t>(),
          j.value("detail", nlohmann::json::object())};
}

nlohmann::json to_json(const MetricsSample& s) {
  nlohmann::json j{{"batch", s.batch}, {"psi", s.psi}, {"drift_score", s.drift_score}, {"latency_ms", s.latency_ms}};
  j["accuracy"] = s.accuracy ? nlohmann::json(*s.accuracy) : nlohmann::json(nullptr);
  j["s_t"] = s.s_t ? nlohmann::json(*s.s_t) : nlohmann::json(nullptr);
  j["posterior"] = s.posterior ? nlohmann::json(*s.posterior) : nlohmann::json(nullptr);
  return j;
}

std::string metrics_csv_header() { return "batch,drift_score,accuracy,latency_ms,posterior\n"; }

std::string metrics_csv_row(const MetricsSample& s) {
  const auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string{}; };
  return fmt::format("{},{},{},{:.3f},{}", s.batch, s.drift_score, opt(s.accuracy), s.latency_ms, opt(s.posterior));
}

}  // namespace smartmlops::monitor
