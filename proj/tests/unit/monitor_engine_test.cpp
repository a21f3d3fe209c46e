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

#include <gtest/gtest.h>

#include "smartmlops/drift_harness.hpp"
#include "smartmlops/error.hpp"
#include "smartmlops/model_registry.hpp"
#include "smartmlops/monitor_engine.hpp"
#include "smartmlops/pipeline_yaml.hpp"
#include "test_support.hpp"

using namespace smartmlops;
using namespace smartmlops::monitor;

namespace {

const std::filesystem::path kRetrainPipeline = std::filesystem::path(SMARTMLOPS_SAMPLES_DIR) / "retrain_pipeline.yaml";

MonitorConfig config_in(const smartmlops::testkit::TempDir& dir, const harness::ScenarioConfig& scenario) {
  MonitorConfig c;
  c.session = "test";
  c.store_root = dir / "store";
  c.runs_root = dir / "runs";
  c.model_name = "m";
  c.dataset_id = "m";
  c.target = std::string(harness::kLabelColumn);
  c.features = harness::feature_names(scenario);
  c.retrain_pipeline = kRetrainPipeline;
  return c;
}

harness::ScenarioConfig scenario(std::vector<harness::DriftEvent> events, std::size_t batches = 8) {
  harness::ScenarioConfig s;
  s.seed = 5;
  s.rows_per_batch = 1000;
  s.reference_rows = 2000;
  s.batch_count = batches;
  s.events = std::move(events);
  return s;
}

std::vector<std::size_t> batches_of(const std::vector<MonitorEvent>& events, EventKind kind) {
  std::vector<std::size_t> out;
  for (const auto& e : events) {
    if (e.kind == kind) out.push_back(e.batch);
  }
  return out;
}

}  // namespace

TEST(ScoreBatch, DriftScoreIsMaxPsi) {
  const auto s = scenario({{0, harness::DriftKind::kMeanShift, 1.0, {1}}});
  const auto ref_data = harness::generate_reference(s);
  std::vector<store::FeatureStatsRecord> recs;
  for (const auto& f : harness::feature_names(s)) recs.push_back(store::compute_feature_stats("d", ref_data.at(f)));
  const auto ref = validation::ReferenceSet::from_records(recs);
  const auto score = score_batch(ref, harness::generate_batch(s, 0));
  ASSERT_EQ(score.psi.size(), 4u);
  EXPECT_EQ(score.max_feature, "x1");
  double mx = 0;
  for (const auto& [f, v] : score.psi) mx = std::max(mx, v);
  EXPECT_EQ(score.max_psi, mx);
  EXPECT_GT(score.max_psi, 0.25);
  EXPECT_LT(score.psi.at("x0"), 0.05);
}

TEST(Monitor, NoDriftMeansNoRetraining) {
  smartmlops::testkit::TempDir dir;
  const auto s = scenario({});
  const auto sc = harness::generate_scenario(s);
  const auto result = run(config_in(dir, s), {sc.batches, sc.reference});
  EXPECT_EQ(result.initial_production, 1u);
  EXPECT_EQ(result.final_production, 1u);
  EXPECT_TRUE(batches_of(result.events, EventKind::kRetrainTriggered).empty());
  EXPECT_TRUE(batches_of(result.events, EventKind::kDriftFlagged).empty());
  ASSERT_EQ(result.metrics.size(), 8u);
  for (const auto& m : result.metrics) {
    ASSERT_TRUE(m.accuracy.has_value());
    EXPECT_GT(*m.accuracy, 0.9);
  }
  const auto csv = storage::read_file(result.session_dir / "metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}

TEST(Monitor, MeanShiftTriggersRetrainAndPromotion) {
  smartmlops::testkit::TempDir dir;
  const auto s = scenario({{3, harness::DriftKind::kMeanShift, 3.0, {0}}});
  const auto sc = harness::generate_scenario(s);
  const auto result = run(config_in(dir, s), {sc.batches, sc.reference});
  EXPECT_EQ(batches_of(result.events, EventKind::kDriftFlagged).front(), 3u);
  EXPECT_EQ(batches_of(result.events, EventKind::kRetrainTriggered), (std::vector<std::size_t>{3}));
  EXPECT_EQ(batches_of(result.events, EventKind::kModelPromoted), (std::vector<std::size_t>{3}));
  EXPECT_EQ(result.final_production, 2u);
  // The new reference comes from the shifted data, so later batches look clean.
  for (std::size_t b = 4; b < 8; ++b) EXPECT_LT(result.metrics[b].drift_score, 0.25) << b;
  const auto lineage = registry::ModelRegistry(dir / "store").get("m", 2).lineage;
  EXPECT_EQ(lineage.parent_version, 1u);
  EXPECT_EQ(lineage.feature_stats.size(), 4u);
}

TEST(Monitor, ConceptFlipTriggersThroughPosterior) {
  smartmlops::testkit::TempDir dir;
  const auto s = scenario({{4, harness::DriftKind::kConceptFlip, 1.0, {}}});
  const auto sc = harness::generate_scenario(s);
  const auto result = run(config_in(dir, s), {sc.batches, sc.reference});
  const auto triggers = batches_of(result.events, EventKind::kRetrainTriggered);
  ASSERT_EQ(triggers, (std::vector<std::size_t>{4}));
  EXPECT_TRUE(batches_of(result.events, EventKind::kDriftFlagged).empty());
  EXPECT_GT(*result.metrics[4].posterior, 0.7);
  EXPECT_LT(*result.metrics[3].posterior, 0.7);
  for (std::size_t b = 5; b < 8; ++b) EXPECT_GT(*result.metrics[b].accuracy, 0.9) << b;
}

TEST(Monitor, SabotagedRetrainKeepsProductionAndCoolsDown) {
  smartmlops::testkit::TempDir dir;
  const auto s = scenario({{2, harness::DriftKind::kMeanShift, 3.0, {0}}}, 10);
  const auto sc = harness::generate_scenario(s);
  MonitorEngine engine(config_in(dir, s));
  engine.bootstrap(sc.reference);
  auto broken = pipeline::load_pipeline(kRetrainPipeline);
  broken.find("train")->params["model"] = "nonexistent";
  engine.set_retrain_pipeline(broken);
  for (const auto& b : sc.batches) engine.step(b);
  EXPECT_EQ(engine.production_version(), 1u);
  EXPECT_EQ(registry::ModelRegistry(dir / "store").production("m")->version, 1u);
  EXPECT_EQ(batches_of(engine.events(), EventKind::kRetrainTriggered), (std::vector<std::size_t>{2, 6}));
  EXPECT_EQ(batches_of(engine.events(), EventKind::kRetrainFailed), (std::vector<std::size_t>{2, 6}));
  EXPECT_EQ(batches_of(engine.events(), EventKind::kCooldownSuppressed), (std::vector<std::size_t>{3, 4, 5, 7, 8, 9}));
  EXPECT_TRUE(batches_of(engine.events(), EventKind::kModelPromoted).empty());
}

TEST(Monitor, SchemaViolationIsReported) {
  smartmlops::testkit::TempDir dir;
  const auto s = scenario({}, 1);
  const auto sc = harness::generate_scenario(s);
  MonitorEngine engine(config_in(dir, s));
  engine.bootstrap(sc.reference);
  data::Dataset partial;
  for (const auto& c : sc.batches[0].columns()) {
    if (c.name != "x2") partial.add_column(c);
  }
  const auto out = engine.step(partial);
  EXPECT_EQ(out.events.front().kind, EventKind::kSchemaViolation);
  EXPECT_EQ(out.sample.psi.count("x2"), 0u);
}

TEST(MonitorConfig, RejectsUnknownKeysAndMissingPipeline) {
  EXPECT_THROW(config_from_json({{"model_name", "m"}, {"colour", "red"}}, "."), Error);
  smartmlops::testkit::TempDir dir;
  auto c = config_in(dir, scenario({}));
  c.retrain_pipeline = dir / "missing.yaml";
  EXPECT_THROW(MonitorEngine{c}, Error);
}

TEST(MonitorEvents, JsonRoundTrip) {
  const MonitorEvent e{EventKind::kModelPromoted, 7, {{"version", 3}}};
  const auto back = event_from_json(to_json(e));
  EXPECT_EQ(back.kind, e.kind);
  EXPECT_EQ(back.batch, 7u);
  EXPECT_EQ(back.detail, e.detail);
}
