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

#include "smartmlops/pipeline_yaml.hpp"

#include <charconv>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "smartmlops/config.hpp"
#include "smartmlops/error.hpp"
#include "smartmlops/storage.hpp"

namespace smartmlops {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::kParse, fmt::format("{}: {}", path, what));
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (node.IsNull()) return {};
  if (!node.IsScalar()) schema_error(path, "expected a scalar");
  return node.Scalar();
}

std::vector<std::string> scalar_list(const YAML::Node& node, const std::string& path) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) schema_error(path, "expected a list");
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(scalar(node[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    fail(ErrorCode::kParse, fmt::format("YAML syntax error at line {}, column {}: {}",
                                        e.mark.line + 1, e.mark.column + 1, e.msg));
  }
}

void emit_string_list(YAML::Emitter& out, const std::vector<std::string>& values) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& v : values) out << YAML::DoubleQuoted << v;
  out << YAML::EndSeq;
}

nlohmann::json to_json_value(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& item : node) arr.push_back(to_json_value(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.Scalar()] = to_json_value(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string& s = node.Scalar();
      if (node.Tag() == "!") return s;  // explicitly quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      long long i = 0;
      auto [pi, ei] = std::from_chars(s.data(), s.data() + s.size(), i);
      if (ei == std::errc() && pi == s.data() + s.size() && !s.empty()) return i;
      double d = 0;
      auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
      if (ed == std::errc() && pd == s.data() + s.size() && !s.empty()) return d;
      return s;
    }
  }
  return nullptr;
}

}  // namespace

namespace pipeline {

std::string render_yaml(const PipelineSpec& spec) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "edges" << YAML::Value;
  if (spec.edges.empty()) {
    out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
  } else {
    out << YAML::BeginSeq;
    for (const auto& e : spec.edges) {
      out << YAML::BeginMap << YAML::Key << "from" << YAML::Value << YAML::DoubleQuoted << e.from
          << YAML::Key << "to" << YAML::Value << YAML::DoubleQuoted << e.to << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << spec.name;
  out << YAML::Key << "nodes" << YAML::Value;
  if (spec.nodes.empty()) {
    out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
  } else {
    out << YAML::BeginSeq;
    for (const auto& n : spec.nodes) {
      out << YAML::BeginMap;
      if (!n.command.empty()) {
        out << YAML::Key << "command" << YAML::Value << YAML::DoubleQuoted << n.command;
      }
      out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << n.id;
      out << YAML::Key << "inputs" << YAML::Value;
      emit_string_list(out, n.inputs);
      out << YAML::Key << "kind" << YAML::Value << std::string(to_string(n.kind));
      out << YAML::Key << "outputs" << YAML::Value;
      emit_string_list(out, n.outputs);
      out << YAML::Key << "params" << YAML::Value;
      if (n.params.empty()) {
        out << YAML::Flow << YAML::BeginMap << YAML::EndMap;
      } else {
        out << YAML::BeginMap;
        for (const auto& [k, v] : n.params) {
          out << YAML::Key << YAML::DoubleQuoted << k << YAML::Value << YAML::DoubleQuoted << v;
        }
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  std::string text = out.c_str();
  text.push_back('\n');
  return text;
}

PipelineSpec parse_yaml(std::string_view text) {
  const YAML::Node root = load_yaml(text);
  if (!root.IsMap()) schema_error("<root>", "expected a mapping with keys name, nodes, edges");
  PipelineSpec spec;
  for (const auto& kv : root) {
    const auto key = kv.first.Scalar();
    if (key != "name" && key != "nodes" && key != "edges") schema_error(key, "unknown top-level key");
  }
  if (!root["name"]) schema_error("name", "missing required key");
  spec.name = scalar(root["name"], "name");

  const YAML::Node nodes = root["nodes"];
  if (nodes && !nodes.IsNull()) {
    if (!nodes.IsSequence()) schema_error("nodes", "expected a list");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto path = fmt::format("nodes[{}]", i);
      const YAML::Node n = nodes[i];
      if (!n.IsMap()) schema_error(path, "expected a mapping");
      for (const auto& kv : n) {
        const auto key = kv.first.Scalar();
        if (key != "id" && key != "kind" && key != "params" && key != "inputs" &&
            key != "outputs" && key != "command") {
          schema_error(path + "." + key, "unknown node key");
        }
      }
      StepNode node;
      if (!n["id"]) schema_error(path + ".id", "missing required key");
      node.id = scalar(n["id"], path + ".id");
      if (!n["kind"]) schema_error(path + ".kind", fmt::format("missing required key in node '{}'", node.id));
      const auto kind_text = scalar(n["kind"], path + ".kind");
      const auto kind = parse_step_kind(kind_text);
      if (!kind) {
        schema_error(path + ".kind", fmt::format("unknown node kind '{}' in node '{}'", kind_text, node.id));
      }
      node.kind = *kind;
      if (const YAML::Node params = n["params"]; params && !params.IsNull()) {
        if (!params.IsMap()) schema_error(path + ".params", "expected a mapping");
        for (const auto& kv : params) {
          const auto key = kv.first.Scalar();
          node.params[key] = scalar(kv.second, path + ".params." + key);
        }
      }
      node.inputs = scalar_list(n["inputs"], path + ".inputs");
      node.outputs = scalar_list(n["outputs"], path + ".outputs");
      if (n["command"]) node.command = scalar(n["command"], path + ".command");
      spec.nodes.push_back(std::move(node));
    }
  }

  const YAML::Node edges = root["edges"];
  if (edges && !edges.IsNull()) {
    if (!edges.IsSequence()) schema_error("edges", "expected a list");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto path = fmt::format("edges[{}]", i);
      const YAML::Node e = edges[i];
      if (!e.IsMap() || !e["from"] || !e["to"]) schema_error(path, "expected a mapping with from and to");
      spec.edges.push_back({scalar(e["from"], path + ".from"), scalar(e["to"], path + ".to")});
    }
  }
  return spec;
}

PipelineSpec load_pipeline(const std::filesystem::path& path) {
  return parse_yaml(storage::read_file(path));
}

void save_pipeline(const std::filesystem::path& path, const PipelineSpec& spec) {
  storage::write_file_atomic(path, render_yaml(spec));
}

}  // namespace pipeline

namespace config {

nlohmann::json parse_document(std::string_view text) { return to_json_value(load_yaml(text)); }

nlohmann::json load_document(const std::filesystem::path& path) {
  return parse_document(storage::read_file(path));
}

}  // namespace config

}  // namespace smartmlops
