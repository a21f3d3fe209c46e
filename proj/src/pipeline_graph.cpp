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

#include "smartmlops/pipeline_graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "smartmlops/error.hpp"

namespace smartmlops::pipeline {

namespace {

struct KindRule {
  StepKind kind;
  std::string_view name;
  std::vector<std::string_view> required_params;
  std::size_t min_inputs;
  std::size_t max_inputs;
  std::size_t min_outputs;
};

const std::vector<KindRule>& kind_rules() {
  static const std::vector<KindRule> rules = {
      {StepKind::kIngest, "ingest", {"dataset"}, 0, 0, 1},
      {StepKind::kValidate, "validate", {}, 1, 1, 1},
      {StepKind::kFeatures, "features", {"target"}, 1, 1, 1},
      {StepKind::kTrain, "train", {"target"}, 1, 1, 1},
      {StepKind::kEvaluate, "evaluate", {"target"}, 1, 2, 1},
      {StepKind::kRegister, "register", {"model_name"}, 2, 2, 1},
      {StepKind::kDeployGate, "deploy_gate", {}, 1, 1, 1},
      {StepKind::kCommand, "command", {}, 0, SIZE_MAX, 0},
  };
  return rules;
}

const KindRule& rule_for(StepKind kind) {
  for (const auto& r : kind_rules()) {
    if (r.kind == kind) return r;
  }
  fail(ErrorCode::kInvalidArgument, "unknown step kind");
}

// Adjacency over node indices; edges with unknown endpoints are dropped.
struct IndexedGraph {
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> in_degree;
};

IndexedGraph index_graph(const PipelineSpec& spec) {
  IndexedGraph g;
  for (const auto& n : spec.nodes) {
    if (g.index.emplace(n.id, g.ids.size()).second) g.ids.push_back(n.id);
  }
  g.out.resize(g.ids.size());
  g.in_degree.assign(g.ids.size(), 0);
  for (const auto& e : effective_edges(spec)) {
    const auto f = g.index.find(e.from);
    const auto t = g.index.find(e.to);
    if (f == g.index.end() || t == g.index.end() || f->second == t->second) continue;
    g.out[f->second].push_back(t->second);
    ++g.in_degree[t->second];
  }
  return g;
}

}  // namespace

std::string_view to_string(StepKind kind) { return rule_for(kind).name; }

std::optional<StepKind> parse_step_kind(std::string_view text) {
  for (const auto& r : kind_rules()) {
    if (r.name == text) return r.kind;
  }
  return std::nullopt;
}

const std::vector<std::string_view>& step_kind_names() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> v;
    for (const auto& r : kind_rules()) v.push_back(r.name);
    return v;
  }();
  return names;
}

std::string StepNode::param(const std::string& key, std::string fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

const StepNode* PipelineSpec::find(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

StepNode* PipelineSpec::find(std::string_view id) {
  for (auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::string_view to_string(GraphErrorKind kind) {
  switch (kind) {
    case GraphErrorKind::kEmptyId: return "empty-id";
    case GraphErrorKind::kDuplicateId: return "duplicate-id";
    case GraphErrorKind::kDanglingEdge: return "dangling-edge";
    case GraphErrorKind::kSelfEdge: return "self-edge";
    case GraphErrorKind::kCycle: return "cycle";
    case GraphErrorKind::kDuplicateProducer: return "duplicate-producer";
    case GraphErrorKind::kMissingParam: return "missing-param";
    case GraphErrorKind::kBadArity: return "bad-arity";
  }
  return "unknown";
}

std::map<std::string, std::string> artifact_producers(const PipelineSpec& spec) {
  std::map<std::string, std::string> producers;
  for (const auto& n : spec.nodes) {
    for (const auto& out : n.outputs) producers.emplace(out, n.id);
  }
  return producers;
}

std::vector<Edge> effective_edges(const PipelineSpec& spec) {
  std::set<Edge> edges(spec.edges.begin(), spec.edges.end());
  const auto producers = artifact_producers(spec);
  for (const auto& n : spec.nodes) {
    for (const auto& in : n.inputs) {
      const auto it = producers.find(in);
      if (it != producers.end() && it->second != n.id) edges.insert({it->second, n.id});
    }
  }
  return {edges.begin(), edges.end()};
}

std::vector<GraphError> validate_graph(const PipelineSpec& spec) {
  std::vector<GraphError> errors;
  std::set<std::string> seen;
  for (const auto& n : spec.nodes) {
    if (n.id.empty()) {
      errors.push_back({GraphErrorKind::kEmptyId, {}, "node with empty id"});
    } else if (!seen.insert(n.id).second) {
      errors.push_back({GraphErrorKind::kDuplicateId, {n.id}, fmt::format("duplicate node id '{}'", n.id)});
    }
  }

  for (const auto& e : spec.edges) {
    for (const auto* end : {&e.from, &e.to}) {
      if (!seen.contains(*end)) {
        errors.push_back({GraphErrorKind::kDanglingEdge, {*end},
                          fmt::format("edge {} -> {} references unknown node '{}'", e.from, e.to, *end)});
      }
    }
    if (e.from == e.to) {
      errors.push_back({GraphErrorKind::kSelfEdge, {e.from}, fmt::format("self-edge on '{}'", e.from)});
    }
  }

  std::map<std::string, std::string> producer;
  for (const auto& n : spec.nodes) {
    for (const auto& out : n.outputs) {
      auto [it, inserted] = producer.emplace(out, n.id);
      if (!inserted) {
        errors.push_back({GraphErrorKind::kDuplicateProducer, {it->second, n.id},
                          fmt::format("artifact '{}' produced by both '{}' and '{}'", out, it->second, n.id)});
      }
    }
    for (const auto& in : n.inputs) {
      if (std::find(n.outputs.begin(), n.outputs.end(), in) != n.outputs.end()) {
        errors.push_back({GraphErrorKind::kSelfEdge, {n.id},
                          fmt::format("node '{}' consumes its own output '{}'", n.id, in)});
      }
    }
  }

  for (const auto& n : spec.nodes) {
    const auto& rule = rule_for(n.kind);
    for (const auto key : rule.required_params) {
      if (!n.params.contains(std::string(key))) {
        errors.push_back({GraphErrorKind::kMissingParam, {n.id},
                          fmt::format("{} node '{}' requires param '{}'", rule.name, n.id, key)});
      }
    }
    if (n.kind == StepKind::kCommand && n.command.empty()) {
      errors.push_back({GraphErrorKind::kMissingParam, {n.id},
                        fmt::format("command node '{}' has no command", n.id)});
    }
    if (n.inputs.size() < rule.min_inputs || n.inputs.size() > rule.max_inputs ||
        n.outputs.size() < rule.min_outputs) {
      errors.push_back({GraphErrorKind::kBadArity, {n.id},
                        fmt::format("{} node '{}' has {} inputs and {} outputs", rule.name, n.id,
                                    n.inputs.size(), n.outputs.size())});
    }
  }

  // Kahn source elimination; whatever survives lies on or behind a cycle.
  auto g = index_graph(spec);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < g.ids.size(); ++i) {
    if (g.in_degree[i] == 0) ready.push_back(i);
  }
  std::size_t removed = 0;
  while (!ready.empty()) {
    const auto u = ready.front();
    ready.pop_front();
    ++removed;
    for (const auto v : g.out[u]) {
      if (--g.in_degree[v] == 0) ready.push_back(v);
    }
  }
  if (removed < g.ids.size()) {
    std::vector<std::string> remaining;
    for (std::size_t i = 0; i < g.ids.size(); ++i) {
      if (g.in_degree[i] > 0) remaining.push_back(g.ids[i]);
    }
    std::sort(remaining.begin(), remaining.end());
    errors.push_back({GraphErrorKind::kCycle, remaining,
                      fmt::format("cycle among nodes {{{}}}", fmt::join(remaining, ", "))});
  }
  return errors;
}

std::string describe(const std::vector<GraphError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "; ";
    out += fmt::format("{}: {}", to_string(e.kind), e.message);
  }
  return out;
}

Schedule topo_schedule(const PipelineSpec& spec) {
  if (const auto errors = validate_graph(spec); !errors.empty()) {
    fail(ErrorCode::kInvalidArgument, "invalid pipeline: " + describe(errors));
  }
  auto g = index_graph(spec);
  std::vector<std::size_t> level(g.ids.size(), 0);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < g.ids.size(); ++i) {
    if (g.in_degree[i] == 0) ready.push_back(i);
  }
  std::size_t depth = 0;
  while (!ready.empty()) {
    const auto u = ready.front();
    ready.pop_front();
    depth = std::max(depth, level[u] + 1);
    for (const auto v : g.out[u]) {
      level[v] = std::max(level[v], level[u] + 1);
      if (--g.in_degree[v] == 0) ready.push_back(v);
    }
  }
  Schedule schedule;
  schedule.layers.resize(g.ids.empty() ? 0 : depth);
  for (std::size_t i = 0; i < g.ids.size(); ++i) schedule.layers[level[i]].push_back(g.ids[i]);
  for (auto& layer : schedule.layers) std::sort(layer.begin(), layer.end());
  return schedule;
}

std::vector<std::string> descendants(const PipelineSpec& spec, std::string_view id) {
  const auto g = index_graph(spec);
  const auto start = g.index.find(std::string(id));
  if (start == g.index.end()) return {};
  std::vector<bool> seen(g.ids.size(), false);
  std::vector<std::size_t> stack{start->second};
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (const auto v : g.out[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g.ids.size(); ++i) {
    if (seen[i]) out.push_back(g.ids[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace smartmlops::pipeline
