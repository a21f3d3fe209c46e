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

#include <gtest/gtest.h>

#include "smartmlops/error.hpp"
#include "smartmlops/executor.hpp"
#include "smartmlops/model_registry.hpp"
#include "smartmlops/pipeline_synth.hpp"
#include "smartmlops/pipeline_yaml.hpp"
#include "test_support.hpp"

using namespace smartmlops;
using namespace smartmlops::synth;

namespace {

std::string parse_error(std::string_view text) {
  try {
    scan_text(text, "src/job.py");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    return e.what();
  }
  ADD_FAILURE() << "no error for: " << text;
  return {};
}

}  // namespace

TEST(ScanText, FindsDirectivesUnderEveryCommentStyle) {
  const auto intents = scan_text(
      "import x\n"
      "# mlops: train-model dataset=d.csv target=y\n"
      "  // mlops: evaluate-model dataset=e.csv target=z model=logreg\n"
      "-- mlops:train-model dataset=f.csv target=w seed=3 features=a,b\n"
      "x = 'mlops: train-model dataset=no target=no'\n",
      "src/job.py");
  ASSERT_EQ(intents.size(), 3u);
  EXPECT_EQ(intents[0].kind, IntentKind::kTrainModel);
  EXPECT_EQ(intents[0].location, (SourceLocation{"src/job.py", 2}));
  EXPECT_EQ(intents[0].dataset, "d.csv");
  EXPECT_EQ(intents[0].model, "logreg");
  EXPECT_EQ(intents[1].kind, IntentKind::kEvaluateModel);
  EXPECT_EQ(intents[1].location.line, 3u);
  EXPECT_EQ(intents[2].params.at("seed"), "3");
  EXPECT_EQ(intents[2].params.at("features"), "a,b");
}

TEST(ScanText, MalformedDirectivesNameFileAndLine) {
  EXPECT_NE(parse_error("\n# mlops: train-model target=y\n").find("src/job.py:2"), std::string::npos);
  EXPECT_NE(parse_error("# mlops: deploy-model dataset=a target=b\n").find("src/job.py:1"), std::string::npos);
  EXPECT_NE(parse_error("# mlops: train-model dataset=a target=b colour=red\n").find("colour"), std::string::npos);
  EXPECT_NE(parse_error("# mlops: train-model dataset=a target=b target=c\n").find("src/job.py:1"),
            std::string::npos);
  EXPECT_NE(parse_error("# mlops: train-model dataset= target=b\n").find("src/job.py:1"), std::string::npos);
  EXPECT_NE(parse_error("# mlops: train-model dataset=a target=b seed=x\n").find("seed"), std::string::npos);
}

TEST(ScanSource, WalksDirectoriesInOrder) {
  smartmlops::testkit::TempDir dir;
  smartmlops::testkit::write_text(dir / "b/two.py", "# mlops: train-model dataset=x target=y\n");
  smartmlops::testkit::write_text(dir / "a/one.sql", "\n\n-- mlops: evaluate-model dataset=x target=y\n");
  smartmlops::testkit::write_text(dir / "plain.txt", "nothing here\n");
  const auto intents = scan_source({dir.path()});
  ASSERT_EQ(intents.size(), 2u);
  EXPECT_EQ(std::filesystem::path(intents[0].location.file).filename(), "one.sql");
  EXPECT_EQ(intents[0].location.line, 3u);
  EXPECT_EQ(pipeline_name(intents[0]), "one-evaluate-model-L3");
  EXPECT_EQ(model_name(intents[1]), "two_y");
}

TEST(RuleBasedProvider, TrainTemplateMatchesHandWrittenPipeline) {
  const auto intents = scan_text("\n\n# mlops: train-model dataset=data/toy.csv target=churn seed=7\n", "churn.py");
  const auto spec = synthesize_pipeline(intents.at(0));
  const auto expected = pipeline::parse_yaml(R"(name: churn-train-model-L3
nodes:
  - id: ingest
    kind: ingest
    params: {dataset: data/toy.csv, seed: "7"}
    outputs: [raw.csv]
  - id: validate
    kind: validate
    params: {max_null_fraction: "0.2", seed: "7"}
    inputs: [raw.csv]
    outputs: [validated.csv]
  - id: features
    kind: features
    params: {target: churn, dataset_id: churn_churn, seed: "7"}
    inputs: [validated.csv]
    outputs: [features.csv]
  - id: train
    kind: train
    params: {model: logreg, target: churn, seed: "7", epochs: "300", lr: "0.5"}
    inputs: [features.csv]
    outputs: [model.bin]
  - id: evaluate
    kind: evaluate
    params: {target: churn, seed: "7"}
    inputs: [model.bin, features.csv]
    outputs: [metrics.json, evaluated_model.bin]
  - id: register
    kind: register
    params: {model_name: churn_churn}
    inputs: [evaluated_model.bin, metrics.json]
    outputs: [registration.json]
  - id: deploy_gate
    kind: deploy_gate
    params: {min_accuracy: "0.5"}
    inputs: [registration.json]
    outputs: [deploy.json]
edges:
  - {from: ingest, to: validate}
  - {from: validate, to: features}
  - {from: features, to: train}
  - {from: train, to: evaluate}
  - {from: evaluate, to: register}
  - {from: register, to: deploy_gate}
  - {from: features, to: evaluate}
)");
  EXPECT_EQ(spec, expected);
  EXPECT_TRUE(pipeline::validate_graph(spec).empty());
  EXPECT_EQ(pipeline::parse_yaml(pipeline::render_yaml(spec)), spec);
}

TEST(RuleBasedProvider, TwoIntentsGiveTwoPipelines) {
  const auto intents = scan_text(
      "# mlops: train-model dataset=a.csv target=y\n# mlops: evaluate-model dataset=a.csv target=y\n", "m.py");
  const auto specs = synthesize_all(intents, RuleBasedProvider{});
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].nodes.size(), 7u);
  EXPECT_EQ(specs[1].nodes.size(), 3u);
  EXPECT_NE(specs[0].name, specs[1].name);
}

TEST(RuleBasedProvider, UnknownModelKindListsBuiltins) {
  const auto intents = scan_text("# mlops: train-model dataset=a.csv target=y model=resnet\n", "m.py");
  try {
    synthesize_pipeline(intents.at(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("resnet"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("logreg"), std::string::npos);
  }
}

TEST(Synth, EndToEndOnToyDataset) {
  smartmlops::testkit::TempDir dir;
  const std::string data = std::string(SMARTMLOPS_DATA_DIR) + "/toy.csv";
  const auto src = smartmlops::testkit::write_text(
      dir / "churn.py",
      "# mlops: train-model dataset=" + data + " target=churn seed=7\n"
      "# mlops: evaluate-model dataset=" + data + " target=churn\n");
  const auto specs = synthesize_all(scan_source({src}), RuleBasedProvider{});
  ASSERT_EQ(specs.size(), 2u);

  exec::ExecutionOptions opts;
  opts.runs_root = dir / "runs";
  opts.store_root = dir / "store";
  const auto train = exec::execute(specs[0], opts);
  ASSERT_TRUE(train.succeeded()) << exec::to_json(train).dump(2);
  registry::ModelRegistry reg(opts.store_root);
  const auto versions = reg.list("churn_churn");
  ASSERT_EQ(versions.size(), 1u);
  EXPECT_EQ(versions[0].stage, registry::Stage::kCandidate);
  EXPECT_EQ(versions[0].lineage.run_id, train.run_id);
  EXPECT_FALSE(versions[0].lineage.feature_stats.empty());
  EXPECT_GT(versions[0].metrics.at("accuracy"), 0.5);

  // Evaluation needs a production model.
  EXPECT_FALSE(exec::execute(specs[1], opts).succeeded());
  reg.promote("churn_churn", 1);
  const auto eval = exec::execute(specs[1], opts);
  EXPECT_TRUE(eval.succeeded()) << exec::to_json(eval).dump(2);
}
