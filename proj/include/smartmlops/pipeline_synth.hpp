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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "smartmlops/pipeline_graph.hpp"

namespace smartmlops::synth {

enum class IntentKind { kTrainModel, kEvaluateModel };

std::string_view to_string(IntentKind kind);

struct SourceLocation {
  std::string file;
  std::size_t line = 0;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

struct Intent {
  IntentKind kind = IntentKind::kTrainModel;
  SourceLocation location;
  std::string dataset;
  std::string target;
  std::string model = "logreg";
  std::map<std::string, std::string> params;  // seed, features

  friend bool operator==(const Intent&, const Intent&) = default;
};

// Directive grammar, after a `#`, `//` or `--` comment prefix:
//   mlops: <train-model|evaluate-model> key=value ...
// with keys from {dataset, target, model, seed, features}. Throws
// Error(kParse) naming file:line for a malformed directive.
std::vector<Intent> scan_text(std::string_view text, const std::string& file);
std::vector<Intent> scan_source(const std::vector<std::filesystem::path>& paths);

// "<file stem>-<kind>-L<line>"
std::string pipeline_name(const Intent& intent);
// "<file stem>_<target>"
std::string model_name(const Intent& intent);

class SynthProvider {
 public:
  virtual ~SynthProvider() = default;
  virtual std::string name() const = 0;
  virtual pipeline::PipelineSpec synthesize(const Intent& intent) const = 0;
};

/// Fixed templates. train-model:
///   ingest -> validate -> features -> train -> evaluate -> register -> deploy_gate
/// plus features -> evaluate. evaluate-model scores the production model:
///   ingest -> validate -> evaluate
class RuleBasedProvider final : public SynthProvider {
 public:
  std::string name() const override { return "rule-based"; }
  pipeline::PipelineSpec synthesize(const Intent& intent) const override;
};

pipeline::PipelineSpec synthesize_pipeline(const Intent& intent);

// Synthesizes every intent and rejects any output that fails validate_graph.
std::vector<pipeline::PipelineSpec> synthesize_all(const std::vector<Intent>& intents,
                                                   const SynthProvider& provider);

}  // namespace smartmlops::synth
