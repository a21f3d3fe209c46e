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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/storage.hpp"
#include "smartmlops/timestamp.hpp"

namespace smartmlops::registry {

enum class Stage { kCandidate, kProduction, kArchived };
enum class EventKind { kRegistered, kPromoted, kRolledBack, kArchived };

std::string_view to_string(Stage stage);
std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct FeatureStatsRef {
  std::string dataset_id;
  std::string feature;
  std::uint64_t version = 0;

  friend bool operator==(const FeatureStatsRef&, const FeatureStatsRef&) = default;
};

struct Lineage {
  std::string run_id;
  std::optional<std::uint64_t> parent_version;
  std::vector<FeatureStatsRef> feature_stats;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

/// A registered model version: parameters (by content digest), metrics,
/// training time, lineage and current stage.
struct ModelVersion {
  std::string model_name;
  std::uint64_t version = 0;
  std::string artifact_digest;  // sha256 hex of artifact.bin
  std::map<std::string, double> metrics;
  Timestamp trained_at{};
  Lineage lineage;
  Stage stage = Stage::kCandidate;

  friend bool operator==(const ModelVersion&, const ModelVersion&) = default;
};

struct RegistryEvent {
  EventKind kind = EventKind::kRegistered;
  std::string model_name;
  std::uint64_t version = 0;
  Timestamp timestamp{};
  std::string cause;

  friend bool operator==(const RegistryEvent&, const RegistryEvent&) = default;
};

/// Stage bookkeeping for one model. `production_history` is the stack of
/// versions displaced from production by promotions, most recent last;
/// rollback walks it back.
struct RegistryState {
  std::map<std::uint64_t, Stage> stages;
  std::optional<std::uint64_t> production;
  std::vector<std::uint64_t> production_history;
  std::uint64_t latest_version = 0;
  std::size_t event_count = 0;

  friend bool operator==(const RegistryState&, const RegistryState&) = default;
};

// Throws Error(kFailedPrecondition / kNotFound) if `event` is not legal in
// `state`; otherwise returns the successor state.
RegistryState apply_event(const RegistryState& state, const RegistryEvent& event);
RegistryState replay(std::span<const RegistryEvent> events);

nlohmann::json to_json(const ModelVersion& mv);
ModelVersion model_version_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegistryEvent& event);
RegistryEvent event_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RegistryState& state);
RegistryState state_from_json(const nlohmann::json& j);

/// Layout under `root`:
///   models/<name>/<version>/artifact.bin, meta.json
///   models/<name>/events.log   JSON lines, append-only
///   models/<name>/state.json   stages and production pointer
/// Each mutation appends its event before replacing state.json, so a crash in
/// between is repaired on the next access by replaying the log.
class ModelRegistry {
 public:
  explicit ModelRegistry(std::filesystem::path root);

  ModelVersion register_model(const std::string& model_name, const std::filesystem::path& artifact,
                              std::map<std::string, double> metrics, Lineage lineage,
                              std::optional<Timestamp> trained_at = std::nullopt);
  RegistryState promote(const std::string& model_name, std::uint64_t version,
                        const std::string& cause = "manual promotion");
  // Without `to`, steps back one production version; with `to`, walks back to
  // that ex-production version.
  RegistryState rollback(const std::string& model_name, std::optional<std::uint64_t> to = std::nullopt,
                         const std::string& cause = "manual rollback");
  RegistryState archive(const std::string& model_name, std::uint64_t version,
                        const std::string& cause = "manual archive");

  ModelVersion get(const std::string& model_name, std::uint64_t version, bool verify = false) const;
  std::vector<ModelVersion> list(const std::string& model_name) const;
  std::vector<std::string> list_models() const;
  // version -> parent -> ... until a version without a parent.
  std::vector<ModelVersion> lineage_of(const std::string& model_name, std::uint64_t version) const;
  std::optional<ModelVersion> production(const std::string& model_name) const;
  RegistryState state(const std::string& model_name) const;
  std::vector<RegistryEvent> events(const std::string& model_name) const;
  std::filesystem::path artifact_path(const std::string& model_name, std::uint64_t version) const;

  void set_fault_hook(storage::FaultHook hook) { hook_ = std::move(hook); }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path model_dir(const std::string& model_name) const;
  RegistryState load_state(const std::string& model_name) const;
  RegistryState commit(const std::string& model_name, const RegistryState& state, RegistryEvent event);

  std::filesystem::path root_;
  storage::FaultHook hook_;
};

}  // namespace smartmlops::registry
