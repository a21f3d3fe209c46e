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

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "smartmlops/dataset.hpp"
#include "smartmlops/error.hpp"
#include "smartmlops/executor.hpp"
#include "smartmlops/feature_store.hpp"
#include "smartmlops/logreg.hpp"
#include "smartmlops/model_registry.hpp"
#include "smartmlops/storage.hpp"
#include "smartmlops/validation.hpp"

namespace smartmlops::exec {

namespace fs = std::filesystem;
using pipeline::StepKind;

namespace {

double number_param(const StepContext& ctx, const std::string& key, double fallback) {
  const auto text = ctx.node.param(key);
  if (text.empty()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kInvalidArgument, fmt::format("param '{}' must be a number, got '{}'", key, text));
}

std::uint64_t seed_param(const StepContext& ctx) {
  const double s = number_param(ctx, "seed", 42);
  if (s < 0) fail(ErrorCode::kInvalidArgument, "param 'seed' must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::string& first_output(const StepContext& ctx) {
  if (ctx.node.outputs.empty()) fail(ErrorCode::kInvalidArgument, "step declares no output");
  return ctx.node.outputs.front();
}

// Inputs are matched by extension (.csv data, .bin model, .json metrics or
// records); the declared order breaks ties.
std::optional<fs::path> input_with_extension(const StepContext& ctx, std::string_view ext) {
  for (const auto& name : ctx.node.inputs) {
    if (fs::path(name).extension() == ext) return ctx.input(name);
  }
  return std::nullopt;
}

fs::path require_input(const StepContext& ctx, std::string_view ext, std::string_view what) {
  if (auto p = input_with_extension(ctx, ext)) return *p;
  fail(ErrorCode::kInvalidArgument, fmt::format("step needs a {} input (*{})", what, ext));
}

learn::TrainOptions train_options(const StepContext& ctx) {
  learn::TrainOptions opt;
  opt.seed = seed_param(ctx);
  opt.epochs = static_cast<std::size_t>(number_param(ctx, "epochs", static_cast<double>(opt.epochs)));
  opt.lr = number_param(ctx, "lr", opt.lr);
  opt.l2 = number_param(ctx, "l2", opt.l2);
  opt.holdout_fraction = number_param(ctx, "holdout", opt.holdout_fraction);
  return opt;
}

nlohmann::json run_ingest(const StepContext& ctx) {
  const auto source = ctx.node.param("dataset");
  const auto dataset = data::ingest_csv(source);
  if (dataset.row_count() == 0) fail(ErrorCode::kInvalidArgument, fmt::format("dataset '{}' has no rows", source));
  data::write_csv(ctx.output(first_output(ctx)), dataset);
  return {{"rows", dataset.row_count()}, {"columns", dataset.column_names()}};
}

nlohmann::json run_validate(const StepContext& ctx) {
  const auto dataset = data::ingest_csv(ctx.input(ctx.node.inputs.front()));
  const double max_null = number_param(ctx, "max_null_fraction", validation::kMaxNullFraction);
  nlohmann::json report;
  bool passed = dataset.row_count() > 0;
  std::vector<std::string> problems;
  if (!passed) problems.push_back("no rows");

  const auto reference_id = ctx.node.param("reference");
  if (!reference_id.empty()) {
    store::FeatureStore fs_store(ctx.store_root);
    const auto ref = validation::ReferenceSet::latest(fs_store, reference_id, split_list(ctx.node.param("features")));
    drift::DriftThresholds thresholds;
    thresholds.kl_delta = number_param(ctx, "kl_delta", thresholds.kl_delta);
    const auto r = validation::validate_ingest(ref, dataset, thresholds);
    report["drift"] = validation::to_json(r);
    if (!r.passed) {
      passed = false;
      problems.push_back("reference validation failed");
    }
  }
  auto nulls = nlohmann::json::object();
  for (const auto& col : dataset.columns()) {
    const double frac = dataset.row_count() == 0
                            ? 0.0
                            : static_cast<double>(col.null_count()) / static_cast<double>(dataset.row_count());
    nulls[col.name] = frac;
    if (frac > max_null) {
      passed = false;
      problems.push_back(fmt::format("column '{}' null fraction {:.3f} exceeds {:.3f}", col.name, frac, max_null));
    }
  }
  report["null_fractions"] = nulls;
  report["passed"] = passed;
  report["problems"] = problems;
  storage::write_file_atomic(ctx.work_dir / "validation_report.json", report.dump(2) + "\n");
  if (!passed) {
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
    fail(ErrorCode::kFailedPrecondition, "validation failed: " + joined);
  }
  data::write_csv(ctx.output(first_output(ctx)), dataset);
  return {{"rows", dataset.row_count()}};
}

nlohmann::json run_features(const StepContext& ctx) {
  const auto dataset = data::ingest_csv(ctx.input(ctx.node.inputs.front()));
  const auto target = ctx.node.param("target");
  if (dataset.find(target) == nullptr) fail(ErrorCode::kNotFound, fmt::format("target column '{}' not found", target));
  auto features = split_list(ctx.node.param("features"));
  if (features.empty()) {
    for (const auto& name : dataset.column_names()) {
      if (name != target) features.push_back(name);
    }
  }
  nlohmann::json notes = nlohmann::json::object();
  const auto dataset_id = ctx.node.param("dataset_id");
  if (!dataset_id.empty()) {
    const auto bins = static_cast<std::size_t>(number_param(ctx, "bins", drift::kDefaultBinCount));
    store::FeatureStore fs_store(ctx.store_root);
    auto refs = nlohmann::json::array();
    for (const auto& name : features) {
      const auto& col = dataset.at(name);
      // A constant numeric column has no usable binning.
      if (col.type == data::ColumnType::kNumeric) {
        const auto values = col.non_null_numbers();
        if (std::set<double>(values.begin(), values.end()).size() < 2) continue;
      }
      const auto version = fs_store.put_stats(store::compute_feature_stats(dataset_id, col, bins));
      refs.push_back({{"dataset_id", dataset_id}, {"feature", name}, {"version", version}});
    }
    notes["feature_stats"] = refs;
  }
  const auto encoded = learn::encode_features(dataset, target, features);
  data::write_csv(ctx.output(first_output(ctx)), learn::to_dataset(encoded));
  notes["encoded_features"] = encoded.feature_names;
  return notes;
}

nlohmann::json run_train(const StepContext& ctx) {
  const auto target = ctx.node.param("target");
  const auto kind = ctx.node.param("model", "logreg");
  const auto encoded = learn::from_encoded_dataset(data::ingest_csv(ctx.input(ctx.node.inputs.front())), target);
  const auto opt = train_options(ctx);
  const auto result = learn::train_model(kind, encoded, opt);
  storage::write_file_atomic(ctx.output(first_output(ctx)), learn::to_json(result.model).dump(2) + "\n");
  return {{"train_accuracy", result.train_accuracy},
          {"holdout_accuracy", result.holdout_accuracy},
          {"final_loss", result.loss_history.back()}};
}

nlohmann::json run_evaluate(const StepContext& ctx) {
  const auto target = ctx.node.param("target");
  const auto data_path = require_input(ctx, ".csv", "feature table");
  const auto raw = data::ingest_csv(data_path);
  nlohmann::json metrics;
  learn::LogisticModel model;
  if (const auto model_path = input_with_extension(ctx, ".bin")) {
    model = learn::model_from_json(nlohmann::json::parse(storage::read_file(*model_path)));
    const auto encoded = learn::from_encoded_dataset(raw, target);
    const auto opt = train_options(ctx);
    const auto split = learn::holdout_split(encoded.x.rows, opt.holdout_fraction, opt.seed);
    metrics["accuracy"] = learn::holdout_accuracy(model, encoded, opt);
    metrics["holdout_rows"] = split.holdout.size();
    metrics["train_rows"] = split.train.size();
  } else {
    const auto model_name = ctx.node.param("model_name");
    if (model_name.empty()) fail(ErrorCode::kInvalidArgument, "evaluate needs a model input or a model_name param");
    registry::ModelRegistry reg(ctx.store_root);
    const auto prod = reg.production(model_name);
    if (!prod) fail(ErrorCode::kNotFound, fmt::format("model '{}' has no production version", model_name));
    reg.get(model_name, prod->version, true);
    model = learn::model_from_json(nlohmann::json::parse(storage::read_file(reg.artifact_path(model_name, prod->version))));
    const auto x = learn::encode_for_model(raw, model.feature_names);
    const auto y = learn::binary_target(raw.at(target));
    metrics["accuracy"] = learn::accuracy(model, x, y);
    metrics["rows"] = x.rows;
    metrics["model_version"] = prod->version;
  }
  const auto& outputs = ctx.node.outputs;
  for (const auto& name : outputs) {
    const auto ext = fs::path(name).extension();
    if (ext == ".json") storage::write_file_atomic(ctx.output(name), metrics.dump(2) + "\n");
    if (ext == ".bin") storage::write_file_atomic(ctx.output(name), learn::to_json(model).dump(2) + "\n");
  }
  return {{"accuracy", metrics["accuracy"]}};
}

nlohmann::json run_register(const StepContext& ctx) {
  const auto model_name = ctx.node.param("model_name");
  const auto model_path = require_input(ctx, ".bin", "model");
  const auto metrics_doc = nlohmann::json::parse(storage::read_file(require_input(ctx, ".json", "metrics")));
  std::map<std::string, double> metrics;
  for (const auto& [k, v] : metrics_doc.items()) {
    if (v.is_number()) metrics[k] = v.get<double>();
  }
  registry::Lineage lineage;
  lineage.run_id = ctx.run_id;
  std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
  for (const auto& [node_id, notes] : ctx.upstream_notes) {
    if (!notes.contains("feature_stats")) continue;
    for (const auto& s : notes["feature_stats"]) {
      seen.emplace(s.at("dataset_id").get<std::string>(), s.at("feature").get<std::string>(),
                   s.at("version").get<std::uint64_t>());
    }
  }
  for (const auto& [ds, feature, version] : seen) lineage.feature_stats.push_back({ds, feature, version});

  registry::ModelRegistry reg(ctx.store_root);
  if (const auto current = reg.production(model_name)) lineage.parent_version = current->version;
  const auto mv = reg.register_model(model_name, model_path, metrics, lineage);
  const nlohmann::json out{{"model_name", mv.model_name}, {"version", mv.version}, {"artifact_digest", mv.artifact_digest}};
  storage::write_file_atomic(ctx.output(first_output(ctx)), out.dump(2) + "\n");
  return out;
}

nlohmann::json run_deploy_gate(const StepContext& ctx) {
  const auto reg_doc = nlohmann::json::parse(storage::read_file(ctx.input(ctx.node.inputs.front())));
  const auto model_name = reg_doc.at("model_name").get<std::string>();
  const auto version = reg_doc.at("version").get<std::uint64_t>();
  registry::ModelRegistry reg(ctx.store_root);
  const auto mv = reg.get(model_name, version, true);
  const double min_accuracy = number_param(ctx, "min_accuracy", 0.0);
  const auto it = mv.metrics.find("accuracy");
  const double acc = it == mv.metrics.end() ? 0.0 : it->second;
  if (acc < min_accuracy) {
    fail(ErrorCode::kFailedPrecondition,
         fmt::format("deploy gate: accuracy {:.4f} below minimum {:.4f}", acc, min_accuracy));
  }
  const bool promote = ctx.node.param("promote") == "true";
  if (promote) reg.promote(model_name, version, "deploy gate approval");
  const nlohmann::json out{{"model_name", model_name}, {"version", version}, {"approved", true},
                           {"accuracy", acc}, {"promoted", promote}};
  storage::write_file_atomic(ctx.output(first_output(ctx)), out.dump(2) + "\n");
  return out;
}

}  // namespace

RunnerTable builtin_runners() {
  return {{StepKind::kIngest, run_ingest},     {StepKind::kValidate, run_validate},
          {StepKind::kFeatures, run_features}, {StepKind::kTrain, run_train},
          {StepKind::kEvaluate, run_evaluate}, {StepKind::kRegister, run_register},
          {StepKind::kDeployGate, run_deploy_gate}};
}

}  // namespace smartmlops::exec
