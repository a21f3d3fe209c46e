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

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smartmlops::pipeline {

enum class StepKind { kIngest, kValidate, kFeatures, kTrain, kEvaluate, kRegister, kDeployGate, kCommand };

std::string_view to_string(StepKind kind);
std::optional<StepKind> parse_step_kind(std::string_view text);
const std::vector<std::string_view>& step_kind_names();

struct StepNode {
  std::string id;
  StepKind kind = StepKind::kCommand;
  std::map<std::string, std::string> params;
  std::vector<std::string> inputs;   // artifact names consumed
  std::vector<std::string> outputs;  // artifact names produced
  std::string command;               // kind == kCommand only

  std::string param(const std::string& key, std::string fallback = {}) const;

  friend bool operator==(const StepNode&, const StepNode&) = default;
};

struct Edge {
  std::string from;
  std::string to;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A pipeline DAG. Dependencies come from `edges` plus one derived edge from
/// each artifact's producer to every node that lists it as an input.
struct PipelineSpec {
  std::string name;
  std::vector<StepNode> nodes;
  std::vector<Edge> edges;

  const StepNode* find(std::string_view id) const;
  StepNode* find(std::string_view id);

  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

enum class GraphErrorKind {
  kEmptyId,
  kDuplicateId,
  kDanglingEdge,
  kSelfEdge,
  kCycle,
  kDuplicateProducer,
  kMissingParam,
  kBadArity,
};

std::string_view to_string(GraphErrorKind kind);

struct GraphError {
  GraphErrorKind kind;
  std::vector<std::string> nodes;
  std::string message;
};

// Explicit plus artifact-derived edges, sorted and deduplicated. Edges whose
// endpoints do not exist are kept; validate_graph reports them.
std::vector<Edge> effective_edges(const PipelineSpec& spec);

// Maps artifact name -> producing node id (first producer wins).
std::map<std::string, std::string> artifact_producers(const PipelineSpec& spec);

std::vector<GraphError> validate_graph(const PipelineSpec& spec);
std::string describe(const std::vector<GraphError>& errors);

struct Schedule {
  std::vector<std::vector<std::string>> layers;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// ASAP layering: a node's layer is the length of the longest path reaching it
// from a source. Ids within a layer are sorted. Throws Error(kInvalidArgument)
// if the graph does not validate.
Schedule topo_schedule(const PipelineSpec& spec);

// Ids of every node reachable from `id` (excluding `id`).
std::vector<std::string> descendants(const PipelineSpec& spec, std::string_view id);

}  // namespace smartmlops::pipeline
