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

#include "smartmlops/model_registry.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "smartmlops/error.hpp"

namespace smartmlops::registry {

namespace fs = std::filesystem;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kCandidate: return "candidate";
    case Stage::kProduction: return "production";
    case Stage::kArchived: return "archived";
  }
  return "unknown";
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kRegistered: return "registered";
    case EventKind::kPromoted: return "promoted";
    case EventKind::kRolledBack: return "rolled_back";
    case EventKind::kArchived: return "archived";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view text) {
  for (const auto k : {EventKind::kRegistered, EventKind::kPromoted, EventKind::kRolledBack,
                       EventKind::kArchived}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::kParse, fmt::format("unknown registry event kind '{}'", text));
}

namespace {

Stage parse_stage(std::string_view text) {
  for (const auto s : {Stage::kCandidate, Stage::kProduction, Stage::kArchived}) {
    if (to_string(s) == text) return s;
  }
  fail(ErrorCode::kParse, fmt::format("unknown stage '{}'", text));
}

Stage stage_of(const RegistryState& state, const RegistryEvent& event) {
  const auto it = state.stages.find(event.version);
  if (it == state.stages.end()) {
    fail(ErrorCode::kNotFound, fmt::format("model '{}' has no version {}", event.model_name, event.version));
  }
  return it->second;
}

}  // namespace

RegistryState apply_event(const RegistryState& state, const RegistryEvent& event) {
  RegistryState next = state;
  switch (event.kind) {
    case EventKind::kRegistered:
      if (event.version != state.latest_version + 1) {
        fail(ErrorCode::kFailedPrecondition,
             fmt::format("registration of version {} out of order (latest {})", event.version,
                         state.latest_version));
      }
      next.stages[event.version] = Stage::kCandidate;
      next.latest_version = event.version;
      break;
    case EventKind::kPromoted: {
      const auto stage = stage_of(state, event);
      if (stage != Stage::kCandidate) {
        fail(ErrorCode::kFailedPrecondition,
             fmt::format("cannot promote version {} of '{}': stage is {}, not candidate", event.version,
                         event.model_name, to_string(stage)));
      }
      if (state.production) {
        next.stages[*state.production] = Stage::kArchived;
        next.production_history.push_back(*state.production);
      }
      next.stages[event.version] = Stage::kProduction;
      next.production = event.version;
      break;
    }
    case EventKind::kRolledBack: {
      if (!state.production) {
        fail(ErrorCode::kFailedPrecondition,
             fmt::format("nothing to roll back to: '{}' has no production version", event.model_name));
      }
      const auto pos = std::find(state.production_history.rbegin(), state.production_history.rend(),
                                 event.version);
      if (pos == state.production_history.rend()) {
        fail(ErrorCode::kFailedPrecondition,
             fmt::format("nothing to roll back to: version {} of '{}' was never displaced from production",
                         event.version, event.model_name));
      }
      const auto keep = static_cast<std::size_t>(state.production_history.rend() - pos) - 1;
      next.production_history.resize(keep);
      next.stages[*state.production] = Stage::kArchived;
      next.stages[event.version] = Stage::kProduction;
      next.production = event.version;
      break;
    }
    case EventKind::kArchived: {
      const auto stage = stage_of(state, event);
      if (stage != Stage::kCandidate) {
        fail(ErrorCode::kFailedPrecondition,
             fmt::format("only candidates can be archived directly; version {} is {}", event.version,
                         to_string(stage)));
      }
      next.stages[event.version] = Stage::kArchived;
      break;
    }
  }
  ++next.event_count;
  return next;
}

RegistryState replay(std::span<const RegistryEvent> events) {
  RegistryState state;
  for (const auto& e : events) state = apply_event(state, e);
  return state;
}

nlohmann::json to_json(const ModelVersion& mv) {
  auto stats = nlohmann::json::array();
  for (const auto& s : mv.lineage.feature_stats) {
    stats.push_back({{"dataset_id", s.dataset_id}, {"feature", s.feature}, {"version", s.version}});
  }
  nlohmann::json lineage{{"run_id", mv.lineage.run_id}, {"feature_stats", stats}};
  lineage["parent_version"] =
      mv.lineage.parent_version ? nlohmann::json(*mv.lineage.parent_version) : nlohmann::json(nullptr);
  return {{"model_name", mv.model_name},
          {"version", mv.version},
          {"artifact_digest", mv.artifact_digest},
          {"metrics", mv.metrics},
          {"trained_at", format_timestamp(mv.trained_at)},
          {"lineage", lineage},
          {"stage", to_string(mv.stage)}};
}

ModelVersion model_version_from_json(const nlohmann::json& j) {
  ModelVersion mv;
  mv.model_name = j.at("model_name").get<std::string>();
  mv.version = j.at("version").get<std::uint64_t>();
  mv.artifact_digest = j.at("artifact_digest").get<std::string>();
  mv.metrics = j.at("metrics").get<std::map<std::string, double>>();
  mv.trained_at = parse_timestamp(j.at("trained_at").get<std::string>());
  const auto& l = j.at("lineage");
  mv.lineage.run_id = l.at("run_id").get<std::string>();
  if (!l.at("parent_version").is_null()) mv.lineage.parent_version = l["parent_version"].get<std::uint64_t>();
  for (const auto& s : l.at("feature_stats")) {
    mv.lineage.feature_stats.push_back({s.at("dataset_id").get<std::string>(),
                                        s.at("feature").get<std::string>(),
                                        s.at("version").get<std::uint64_t>()});
  }
  if (j.contains("stage")) mv.stage = parse_stage(j["stage"].get<std::string>());
  return mv;
}

nlohmann::json to_json(const RegistryEvent& e) {
  return {{"kind", to_string(e.kind)},
          {"model_name", e.model_name},
          {"version", e.version},
          {"timestamp", format_timestamp(e.timestamp)},
          {"cause", e.cause}};
}

RegistryEvent event_from_json(const nlohmann::json& j) {
  return {parse_event_kind(j.at("kind").get<std::string>()), j.at("model_name").get<std::string>(),
          j.at("version").get<std::uint64_t>(), parse_timestamp(j.at("timestamp").get<std::string>()),
          j.value("cause", std::string{})};
}

nlohmann::json to_json(const RegistryState& s) {
  auto stages = nlohmann::json::object();
  for (const auto& [v, st] : s.stages) stages[std::to_string(v)] = to_string(st);
  return {{"stages", stages},
          {"production", s.production ? nlohmann::json(*s.production) : nlohmann::json(nullptr)},
          {"production_history", s.production_history},
          {"latest_version", s.latest_version},
          {"event_count", s.event_count}};
}

RegistryState state_from_json(const nlohmann::json& j) {
  RegistryState s;
  for (const auto& [v, st] : j.at("stages").items()) {
    s.stages[std::stoull(v)] = parse_stage(st.get<std::string>());
  }
  if (!j.at("production").is_null()) s.production = j["production"].get<std::uint64_t>();
  s.production_history = j.at("production_history").get<std::vector<std::uint64_t>>();
  s.latest_version = j.at("latest_version").get<std::uint64_t>();
  s.event_count = j.at("event_count").get<std::size_t>();
  return s;
}

ModelRegistry::ModelRegistry(fs::path root) : root_(std::move(root)) {}

fs::path ModelRegistry::model_dir(const std::string& model_name) const {
  if (model_name.empty()) fail(ErrorCode::kInvalidArgument, "model name must not be empty");
  return root_ / "models" / storage::encode_path_component(model_name);
}

fs::path ModelRegistry::artifact_path(const std::string& model_name, std::uint64_t version) const {
  return model_dir(model_name) / std::to_string(version) / "artifact.bin";
}

std::vector<RegistryEvent> ModelRegistry::events(const std::string& model_name) const {
  std::vector<RegistryEvent> out;
  const auto path = model_dir(model_name) / "events.log";
  if (!fs::exists(path)) return out;
  std::istringstream in(storage::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception&) {
      break;  // torn trailing line from an interrupted append
    }
  }
  return out;
}

RegistryState ModelRegistry::load_state(const std::string& model_name) const {
  const auto path = model_dir(model_name) / "state.json";
  RegistryState state;
  if (fs::exists(path)) state = state_from_json(nlohmann::json::parse(storage::read_file(path)));
  const auto log = events(model_name);
  if (log.size() != state.event_count) state = replay(log);
  return state;
}

RegistryState ModelRegistry::state(const std::string& model_name) const { return load_state(model_name); }

RegistryState ModelRegistry::commit(const std::string& model_name, const RegistryState& state,
                                    RegistryEvent event) {
  event.model_name = model_name;
  if (event.timestamp == Timestamp{}) event.timestamp = now();
  RegistryState next = apply_event(state, event);
  const auto dir = model_dir(model_name);
  storage::append_line(dir / "events.log", to_json(event).dump());
  if (hook_) hook_("after-event-append");
  storage::write_file_atomic(dir / "state.json", to_json(next).dump(2) + "\n", hook_);
  return next;
}

ModelVersion ModelRegistry::register_model(const std::string& model_name, const fs::path& artifact,
                                           std::map<std::string, double> metrics, Lineage lineage,
                                           std::optional<Timestamp> trained_at) {
  if (!fs::is_regular_file(artifact)) {
    fail(ErrorCode::kNotFound, fmt::format("model artifact '{}' does not exist", artifact.string()));
  }
  const auto dir = model_dir(model_name);
  storage::FileLock lock(dir / ".lock");
  const auto state = load_state(model_name);

  ModelVersion mv;
  mv.model_name = model_name;
  mv.version = state.latest_version + 1;
  mv.metrics = std::move(metrics);
  mv.trained_at = trained_at.value_or(now());
  mv.lineage = std::move(lineage);
  mv.stage = Stage::kCandidate;

  const auto version_dir = dir / std::to_string(mv.version);
  const std::string bytes = storage::read_file(artifact);
  mv.artifact_digest = storage::sha256_hex(bytes);
  storage::write_file_atomic(version_dir / "artifact.bin", bytes, hook_);
  auto meta = to_json(mv);
  meta.erase("stage");  // stages live in state.json
  storage::write_file_atomic(version_dir / "meta.json", meta.dump(2) + "\n", hook_);
  commit(model_name, state, {EventKind::kRegistered, model_name, mv.version, {}, "registered"});
  return mv;
}

RegistryState ModelRegistry::promote(const std::string& model_name, std::uint64_t version,
                                     const std::string& cause) {
  storage::FileLock lock(model_dir(model_name) / ".lock");
  return commit(model_name, load_state(model_name), {EventKind::kPromoted, model_name, version, {}, cause});
}

RegistryState ModelRegistry::rollback(const std::string& model_name, std::optional<std::uint64_t> to,
                                      const std::string& cause) {
  storage::FileLock lock(model_dir(model_name) / ".lock");
  const auto state = load_state(model_name);
  std::uint64_t target = 0;
  if (to) {
    target = *to;
  } else if (!state.production_history.empty()) {
    target = state.production_history.back();
  } else {
    fail(ErrorCode::kFailedPrecondition,
         fmt::format("nothing to roll back to: '{}' has no earlier production version", model_name));
  }
  return commit(model_name, state, {EventKind::kRolledBack, model_name, target, {}, cause});
}

RegistryState ModelRegistry::archive(const std::string& model_name, std::uint64_t version,
                                     const std::string& cause) {
  storage::FileLock lock(model_dir(model_name) / ".lock");
  return commit(model_name, load_state(model_name), {EventKind::kArchived, model_name, version, {}, cause});
}

ModelVersion ModelRegistry::get(const std::string& model_name, std::uint64_t version, bool verify) const {
  const auto state = load_state(model_name);
  const auto it = state.stages.find(version);
  if (it == state.stages.end()) {
    fail(ErrorCode::kNotFound, fmt::format("model '{}' has no version {}", model_name, version));
  }
  const auto meta_path = model_dir(model_name) / std::to_string(version) / "meta.json";
  auto mv = model_version_from_json(nlohmann::json::parse(storage::read_file(meta_path)));
  mv.stage = it->second;
  if (verify) {
    const auto actual = storage::sha256_hex_file(artifact_path(model_name, version));
    if (actual != mv.artifact_digest) {
      fail(ErrorCode::kIntegrity, fmt::format("artifact of '{}' v{} is corrupted: digest {} != recorded {}",
                                              model_name, version, actual, mv.artifact_digest));
    }
  }
  return mv;
}

std::vector<ModelVersion> ModelRegistry::list(const std::string& model_name) const {
  std::vector<ModelVersion> out;
  for (const auto& [v, stage] : load_state(model_name).stages) out.push_back(get(model_name, v));
  return out;
}

std::vector<std::string> ModelRegistry::list_models() const {
  std::vector<std::string> out;
  const auto dir = root_ / "models";
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) out.push_back(storage::decode_path_component(entry.path().filename().string()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ModelVersion> ModelRegistry::lineage_of(const std::string& model_name, std::uint64_t version) const {
  std::vector<ModelVersion> chain;
  std::optional<std::uint64_t> next = version;
  while (next) {
    if (chain.size() > load_state(model_name).latest_version) {
      fail(ErrorCode::kIntegrity, "lineage contains a cycle");
    }
    chain.push_back(get(model_name, *next));
    next = chain.back().lineage.parent_version;
  }
  return chain;
}

std::optional<ModelVersion> ModelRegistry::production(const std::string& model_name) const {
  const auto state = load_state(model_name);
  if (!state.production) return std::nullopt;
  return get(model_name, *state.production);
}

}  // namespace smartmlops::registry
