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

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/pipeline_graph.hpp"
#include "smartmlops/timestamp.hpp"

namespace smartmlops::exec {

enum class NodeStatus { kSucceeded, kFailed, kSkipped };

std::string_view to_string(NodeStatus status);
NodeStatus parse_node_status(std::string_view text);

struct NodeRecord {
  std::string id;
  NodeStatus status = NodeStatus::kSkipped;
  Timestamp started_at{};
  Timestamp ended_at{};
  std::map<std::string, std::string> artifacts;  // output name -> sha256 hex
  std::string cause;                             // failure or skip reason
  nlohmann::json notes = nlohmann::json::object();
};

struct RunRecord {
  std::string run_id;
  std::string pipeline;
  NodeStatus status = NodeStatus::kSucceeded;  // kFailed if any node failed
  Timestamp started_at{};
  Timestamp ended_at{};
  std::vector<std::vector<std::string>> layers;
  std::map<std::string, NodeRecord> nodes;

  bool succeeded() const { return status == NodeStatus::kSucceeded; }
};

/// What a step sees while it runs. Inputs are resolved to absolute paths;
/// outputs must be written into `work_dir` under their declared names.
struct StepContext {
  const pipeline::StepNode& node;
  std::filesystem::path work_dir;
  std::map<std::string, std::filesystem::path> inputs;
  std::filesystem::path store_root;
  std::string run_id;
  // Notes published by nodes of earlier layers, keyed by node id.
  const std::map<std::string, nlohmann::json>& upstream_notes;

  std::filesystem::path input(const std::string& name) const;
  std::filesystem::path output(const std::string& name) const { return work_dir / name; }
};

// Returns notes (JSON object) for later nodes; throws to fail the node.
using StepRunner = std::function<nlohmann::json(const StepContext&)>;
using RunnerTable = std::map<pipeline::StepKind, StepRunner>;

struct ExecutionOptions {
  int max_parallel = 1;
  std::filesystem::path runs_root = "runs";
  std::filesystem::path store_root = "store";
  std::string run_id;  // generated when empty
  // Artifacts supplied from outside the pipeline, by name.
  std::map<std::string, std::filesystem::path> external_inputs;
  // Overrides the builtin table for the listed kinds.
  RunnerTable runners;
};

// Builtin steps for every kind except `command`, which the executor runs as
// a shell command.
RunnerTable builtin_runners();
StepRunner command_runner();

std::string new_run_id();

// Runs the pipeline layer by layer. Throws Error(kInvalidArgument) if the
// graph does not validate; step failures are recorded, never thrown.
RunRecord execute(const pipeline::PipelineSpec& spec, const ExecutionOptions& options);

// Statuses and artifact digests agree node by node.
bool same_outcome(const RunRecord& a, const RunRecord& b);

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

}  // namespace smartmlops::exec
