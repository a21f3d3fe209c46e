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
#include <string>
#include <string_view>

#include "smartmlops/pipeline_graph.hpp"

namespace smartmlops::pipeline {

// Deterministic block-style YAML with keys in sorted order.
std::string render_yaml(const PipelineSpec& spec);

// Parses structure only; graph validity is a separate validate_graph stage.
// Syntax errors carry "line L, column C"; schema errors name the field path,
// e.g. "nodes[2].kind".
PipelineSpec parse_yaml(std::string_view text);

PipelineSpec load_pipeline(const std::filesystem::path& path);
void save_pipeline(const std::filesystem::path& path, const PipelineSpec& spec);

}  // namespace smartmlops::pipeline
