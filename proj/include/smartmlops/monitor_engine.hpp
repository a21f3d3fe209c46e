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

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/dataset.hpp"
#include "smartmlops/drift_harness.hpp"
#include "smartmlops/drift_metrics.hpp"
#include "smartmlops/logreg.hpp"
#include "smartmlops/pipeline_graph.hpp"
#include "smartmlops/retraining_policy.hpp"
#include "smartmlops/validation.hpp"

namespace smartmlops::monitor {

enum class EventKind {
  kDriftFlagged,
  kRetrainTriggered,
  kRetrainCompleted,
  kRetrainFailed,
  kModelPromoted,
  kCooldownSuppressed,
  kSchemaViolation,
};

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct MonitorEvent {
  EventKind kind = EventKind::kDriftFlagged;
  std::size_t batch = 0;
  nlohmann::json detail = nlohmann::json::object();
};

struct MetricsSample {
  std::size_t batch = 0;
  std::map<std::string, double> psi;
  double drift_score = 0.0;  // max of `psi`
  std::optional<double> accuracy;
  double latency_ms = 0.0;
  std::optional<double> s_t;
  std::optional<double> posterior;
};

struct BatchScore {
  std::map<std::string, double> psi;
  double max_psi = 0.0;
  std::string max_feature;
};

// PSI of every monitored feature present in `batch` against its reference.
// Features missing from the batch or without non-null values are left out.
BatchScore score_batch(const validation::ReferenceSet& reference, const data::Dataset& batch,
                       double epsilon = drift::kDefaultEpsilon);

struct MonitorConfig {
  std::string session = "default";
  std::filesystem::path store_root = "store";
  std::filesystem::path runs_root = "runs";
  std::string model_name;
  std::string dataset_id;  // feature-store id of the reference stats
  std::string target;
  std::vector<std::string> features;
  drift::DriftThresholds thresholds;
  policy::PolicyConfig policy;
  std::filesystem::path retrain_pipeline;
  std::size_t cooldown = 3;
  bool labels_available = true;
  std::size_t retrain_window = 1;  // recent batches kept as retraining rows
  int max_parallel = 1;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Batches the monitor consumes, plus optional bootstrap data used to train
/// and promote a first model when none is in production.
struct StreamSpec {
  std::vector<data::Dataset> batches;
  std::optional<data::Dataset> bootstrap;
};

// Relative paths in `j` resolve against `base_dir`. Accepts `stream` as
// either {batches: [csv, ...]} or {scenario: {...}}.
MonitorConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
StreamSpec stream_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// The monitoring loop for one model. Owns every state transition; retraining
/// runs synchronously through the pipeline executor.
class MonitorEngine {
 public:
  // Loads the retrain pipeline. Throws Error(kNotFound) if it cannot be read
  // or Error(kInvalidArgument) if it does not validate.
  explicit MonitorEngine(MonitorConfig config);

  // Trains and promotes a first model from `data` unless one is already in
  // production. Returns the production version.
  std::uint64_t bootstrap(const data::Dataset& data);

  struct StepOutput {
    MetricsSample sample;
    std::vector<MonitorEvent> events;
  };
  StepOutput step(const data::Dataset& batch);

  std::optional<std::uint64_t> production_version() const { return production_version_; }
  double reference_accuracy() const { return reference_accuracy_; }
  const validation::ReferenceSet& reference() const { return reference_; }
  const std::vector<MonitorEvent>& events() const { return events_; }
  const std::vector<MetricsSample>& metrics() const { return metrics_; }
  std::filesystem::path session_dir() const;
  const MonitorConfig& config() const { return config_; }
  // Replaces the retrain pipeline, e.g. to point at a different template.
  void set_retrain_pipeline(pipeline::PipelineSpec spec);

 private:
  void load_production();
  bool retrain(std::size_t batch_index, std::vector<MonitorEvent>& out);
  void record(const StepOutput& output);

  MonitorConfig config_;
  pipeline::PipelineSpec retrain_spec_;
  std::optional<std::uint64_t> production_version_;
  std::optional<learn::LogisticModel> model_;
  double reference_accuracy_ = 0.0;
  validation::ReferenceSet reference_;
  policy::SequentialPolicy sequential_;
  std::deque<data::Dataset> buffer_;
  std::optional<std::size_t> last_retrain_batch_;
  std::size_t next_batch_ = 0;
  std::vector<MonitorEvent> events_;
  std::vector<MetricsSample> metrics_;
};

struct MonitorRun {
  std::vector<MonitorEvent> events;
  std::vector<MetricsSample> metrics;
  std::optional<std::uint64_t> initial_production;
  std::optional<std::uint64_t> final_production;
  std::filesystem::path session_dir;
};

MonitorRun run(const MonitorConfig& config, const StreamSpec& stream);

nlohmann::json to_json(const MonitorEvent& event);
MonitorEvent event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetricsSample& sample);
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsSample& sample);

}  // namespace smartmlops::monitor
