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

#include "smartmlops/pipeline_synth.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "smartmlops/error.hpp"
#include "smartmlops/logreg.hpp"
#include "smartmlops/storage.hpp"

namespace smartmlops::synth {

namespace fs = std::filesystem;
using pipeline::PipelineSpec;
using pipeline::StepKind;
using pipeline::StepNode;

std::string_view to_string(IntentKind kind) {
  return kind == IntentKind::kTrainModel ? "train-model" : "evaluate-model";
}

namespace {

const std::set<std::string, std::less<>> kKeys{"dataset", "target", "model", "seed", "features"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

// Text after the comment prefix, or nullopt if the line is not a comment.
std::optional<std::string_view> comment_body(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  line.remove_prefix(i);
  if (line.starts_with("//") || line.starts_with("--")) {
    line.remove_prefix(2);
  } else if (line.starts_with("#")) {
    line.remove_prefix(1);
  } else {
    return std::nullopt;
  }
  while (!line.empty() && (line.front() == '#' || line.front() == '/' || line.front() == '-')) line.remove_prefix(1);
  while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
  return line;
}

[[noreturn]] void malformed(const std::string& file, std::size_t line, const std::string& why) {
  fail(ErrorCode::kParse, fmt::format("{}:{}: malformed mlops directive: {}", file, line, why));
}

std::string stem_of(const Intent& intent) {
  auto stem = fs::path(intent.location.file).stem().string();
  return stem.empty() ? std::string("pipeline") : stem;
}

StepNode node(std::string id, StepKind kind, std::map<std::string, std::string> params,
              std::vector<std::string> inputs, std::vector<std::string> outputs) {
  StepNode n;
  n.id = std::move(id);
  n.kind = kind;
  n.params = std::move(params);
  n.inputs = std::move(inputs);
  n.outputs = std::move(outputs);
  return n;
}

}  // namespace

std::vector<Intent> scan_text(std::string_view text, const std::string& file) {
  std::vector<Intent> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    const auto body = comment_body(line);
    if (!body || !body->starts_with("mlops:")) {
      if (end == text.size()) break;
      continue;
    }
    const auto tokens = split_ws(body->substr(6));
    if (tokens.empty()) malformed(file, line_no, "missing intent kind");
    Intent intent;
    intent.location = {file, line_no};
    if (tokens[0] == "train-model") {
      intent.kind = IntentKind::kTrainModel;
    } else if (tokens[0] == "evaluate-model") {
      intent.kind = IntentKind::kEvaluateModel;
    } else {
      malformed(file, line_no, fmt::format("unknown intent kind '{}' (expected train-model or evaluate-model)", tokens[0]));
    }
    std::set<std::string, std::less<>> seen;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto eq = tokens[t].find('=');
      if (eq == std::string_view::npos) malformed(file, line_no, fmt::format("expected key=value, got '{}'", tokens[t]));
      const std::string key(tokens[t].substr(0, eq));
      const std::string value(tokens[t].substr(eq + 1));
      if (!kKeys.contains(key)) {
        malformed(file, line_no, fmt::format("unknown key '{}' (allowed: dataset, target, model, seed, features)", key));
      }
      if (value.empty()) malformed(file, line_no, fmt::format("empty value for '{}'", key));
      if (!seen.insert(key).second) malformed(file, line_no, fmt::format("duplicate key '{}'", key));
      if (key == "dataset") {
        intent.dataset = value;
      } else if (key == "target") {
        intent.target = value;
      } else if (key == "model") {
        intent.model = value;
      } else {
        if (key == "seed" && value.find_first_not_of("0123456789") != std::string::npos) {
          malformed(file, line_no, fmt::format("seed must be a nonnegative integer, got '{}'", value));
        }
        intent.params[key] = value;
      }
    }
    if (intent.dataset.empty()) malformed(file, line_no, "missing required key 'dataset'");
    if (intent.target.empty()) malformed(file, line_no, "missing required key 'target'");
    out.push_back(std::move(intent));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<Intent> scan_source(const std::vector<fs::path>& paths) {
  std::vector<Intent> out;
  for (const auto& path : paths) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    for (const auto& file : files) {
      auto found = scan_text(storage::read_file(file), file.string());
      out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
  }
  return out;
}

std::string pipeline_name(const Intent& intent) {
  return fmt::format("{}-{}-L{}", stem_of(intent), to_string(intent.kind), intent.location.line);
}

std::string model_name(const Intent& intent) { return fmt::format("{}_{}", stem_of(intent), intent.target); }

PipelineSpec RuleBasedProvider::synthesize(const Intent& intent) const {
  if (!learn::is_builtin_model_kind(intent.model)) {
    std::string kinds;
    for (const auto k : learn::builtin_model_kinds()) kinds += (kinds.empty() ? "" : ", ") + std::string(k);
    fail(ErrorCode::kInvalidArgument,
         fmt::format("unknown model kind '{}' at {}:{} (builtin kinds: {})", intent.model, intent.location.file,
                     intent.location.line, kinds));
  }
  if (intent.dataset.empty() || intent.target.empty()) {
    fail(ErrorCode::kInvalidArgument, "intent needs both dataset and target");
  }
  const auto seed = intent.params.contains("seed") ? intent.params.at("seed") : std::string("42");
  const auto name = model_name(intent);

  PipelineSpec spec;
  spec.name = pipeline_name(intent);
  spec.nodes.push_back(node("ingest", StepKind::kIngest, {{"dataset", intent.dataset}, {"seed", seed}}, {}, {"raw.csv"}));
  spec.nodes.push_back(node("validate", StepKind::kValidate, {{"max_null_fraction", "0.2"}, {"seed", seed}},
                            {"raw.csv"}, {"validated.csv"}));
  if (intent.kind == IntentKind::kEvaluateModel) {
    spec.nodes.push_back(node("evaluate", StepKind::kEvaluate,
                              {{"model_name", name}, {"target", intent.target}, {"seed", seed}},
                              {"validated.csv"}, {"metrics.json"}));
    spec.edges = {{"ingest", "validate"}, {"validate", "evaluate"}};
    return spec;
  }

  std::map<std::string, std::string> feature_params{{"target", intent.target}, {"dataset_id", name}, {"seed", seed}};
  if (intent.params.contains("features")) feature_params["features"] = intent.params.at("features");
  spec.nodes.push_back(node("features", StepKind::kFeatures, feature_params, {"validated.csv"}, {"features.csv"}));
  spec.nodes.push_back(node("train", StepKind::kTrain,
                            {{"model", intent.model}, {"target", intent.target}, {"seed", seed},
                             {"epochs", "300"}, {"lr", "0.5"}},
                            {"features.csv"}, {"model.bin"}));
  spec.nodes.push_back(node("evaluate", StepKind::kEvaluate, {{"target", intent.target}, {"seed", seed}},
                            {"model.bin", "features.csv"}, {"metrics.json", "evaluated_model.bin"}));
  spec.nodes.push_back(node("register", StepKind::kRegister, {{"model_name", name}},
                            {"evaluated_model.bin", "metrics.json"}, {"registration.json"}));
  spec.nodes.push_back(node("deploy_gate", StepKind::kDeployGate, {{"min_accuracy", "0.5"}},
                            {"registration.json"}, {"deploy.json"}));
  spec.edges = {{"ingest", "validate"}, {"validate", "features"}, {"features", "train"}, {"train", "evaluate"},
                {"evaluate", "register"}, {"register", "deploy_gate"}, {"features", "evaluate"}};
  return spec;
}

PipelineSpec synthesize_pipeline(const Intent& intent) { return RuleBasedProvider{}.synthesize(intent); }

std::vector<PipelineSpec> synthesize_all(const std::vector<Intent>& intents, const SynthProvider& provider) {
  std::vector<PipelineSpec> out;
  for (const auto& intent : intents) {
    auto spec = provider.synthesize(intent);
    if (const auto errors = pipeline::validate_graph(spec); !errors.empty()) {
      fail(ErrorCode::kInvalidArgument,
           fmt::format("provider '{}' produced an invalid pipeline for {}:{}: {}", provider.name(),
                       intent.location.file, intent.location.line, pipeline::describe(errors)));
    }
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace smartmlops::synth
