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
#include <string_view>

#include <nlohmann/json.hpp>

namespace smartmlops::config {

// Loads a YAML (or JSON, which is a YAML subset) document into a JSON value.
// Scalars become booleans, integers or doubles where they parse as such.
nlohmann::json load_document(const std::filesystem::path& path);
nlohmann::json parse_document(std::string_view text);

}  // namespace smartmlops::config
