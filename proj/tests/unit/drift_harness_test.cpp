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
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "smartmlops/drift_harness.hpp"
#include "smartmlops/error.hpp"

using namespace smartmlops;
using namespace smartmlops::harness;

namespace {

ScenarioConfig shifted(double sigma, std::size_t rows = 2000) {
  ScenarioConfig c;
  c.rows_per_batch = rows;
  c.batch_count = 10;
  c.events = {{5, DriftKind::kMeanShift, sigma, {0}}};
  return c;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST(Generator, DeterministicPerSeedAndBatch) {
  const auto c = shifted(1.0, 200);
  EXPECT_EQ(data::to_csv(generate_batch(c, 3)), data::to_csv(generate_batch(c, 3)));
  EXPECT_NE(data::to_csv(generate_batch(c, 3)), data::to_csv(generate_batch(c, 4)));
  EXPECT_NE(data::to_csv(generate_batch(c, 0)), data::to_csv(generate_reference(c)));
  auto other = c;
  other.seed = 43;
  EXPECT_NE(data::to_csv(generate_batch(c, 3)), data::to_csv(generate_batch(other, 3)));
}

TEST(Generator, ColumnsAndGroundTruth) {
  const auto c = shifted(1.0, 100);
  const auto b = generate_batch(c, 0);
  EXPECT_EQ(b.column_names(), (std::vector<std::string>{"x0", "x1", "x2", "c0", "label"}));
  EXPECT_EQ(feature_names(c), (std::vector<std::string>{"x0", "x1", "x2", "c0"}));
  EXPECT_EQ(ground_truth(c), (std::vector<bool>{false, false, false, false, false, true, true, true, true, true}));
  EXPECT_EQ(generate_reference(c).row_count(), 100u);
}

TEST(Generator, MeanShiftMovesOnlyTheTargetFeature) {
  const auto c = shifted(1.0, 20000);
  const auto before = generate_batch(c, 4);
  const auto after = generate_batch(c, 5);
  EXPECT_NEAR(mean(before.at("x0").numbers), 0.0, 0.03);
  EXPECT_NEAR(mean(after.at("x0").numbers), 1.0, 0.03);
  EXPECT_NEAR(mean(after.at("x1").numbers), 0.0, 0.03);
}

TEST(Generator, LabelsFollowWeights) {
  auto c = shifted(1.0, 500);
  c.events.clear();
  const auto w = label_weights(c);
  ASSERT_EQ(w.size(), 3u);
  const auto b = generate_batch(c, 2);
  for (std::size_t i = 0; i < b.row_count(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 3; ++j) s += w[j] * b.at("x" + std::to_string(j)).numbers[i];
    EXPECT_EQ(b.at("label").numbers[i], s > 0 ? 1.0 : 0.0);
  }
}

TEST(Generator, ConceptFlipInvertsLabelRuleOnly) {
  ScenarioConfig c;
  c.rows_per_batch = 500;
  c.batch_count = 4;
  c.events = {{2, DriftKind::kConceptFlip, 1.0, {}}};
  const auto w = label_weights(c);
  const auto b = generate_batch(c, 3);
  for (std::size_t i = 0; i < b.row_count(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 3; ++j) s += w[j] * b.at("x" + std::to_string(j)).numbers[i];
    EXPECT_EQ(b.at("label").numbers[i], s > 0 ? 0.0 : 1.0);
  }
}

TEST(Generator, CategoryRebalanceFavoursFirstCategory) {
  ScenarioConfig c;
  c.rows_per_batch = 8000;
  c.batch_count = 2;
  c.events = {{1, DriftKind::kCategoryRebalance, 0.5, {0}}};
  auto share = [](const data::Dataset& d) {
    const auto& labels = d.at("c0").labels;
    return static_cast<double>(std::count(labels.begin(), labels.end(), std::optional<std::string>("k0"))) /
           labels.size();
  };
  EXPECT_NEAR(share(generate_batch(c, 0)), 0.25, 0.03);
  EXPECT_GT(share(generate_batch(c, 1)), 0.5);
}

TEST(Config, ValidationAndJson) {
  ScenarioConfig bad;
  bad.numeric_features = 0;
  bad.categorical_features = 0;
  EXPECT_THROW(bad.validate(), Error);
  auto c = shifted(2.0);
  c.events.push_back({7, DriftKind::kConceptFlip, 1.0, {}});
  const auto back = scenario_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  auto j = to_json(c);
  j["colour"] = "red";
  EXPECT_THROW(scenario_from_json(j), Error);
}

TEST(Dda, ThreeSigmaIsPerfect) {
  auto c = shifted(3.0);
  const auto r = run_dda_scenario(c, {});
  EXPECT_EQ(r.total(), 10u);
  EXPECT_DOUBLE_EQ(r.dda(), 1.0);
  EXPECT_EQ(r.fp, 0u);
}

TEST(Dda, NullScenarioHasNoAlarms) {
  ScenarioConfig c;
  c.rows_per_batch = 5000;
  c.batch_count = 10;
  const auto r = run_dda_scenario(c, {});
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.false_positive_rate(), 0.0);
  EXPECT_DOUBLE_EQ(r.dda(), 1.0);
}

TEST(Dda, ParallelMonteCarloEqualsSerial) {
  auto c = shifted(0.5, 1000);
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
  const auto s = serial::run_dda_monte_carlo(c, seeds, {});
  const auto p = parallel::run_dda_monte_carlo(c, seeds, {});
  EXPECT_EQ(to_json(s), to_json(p));
  EXPECT_EQ(decisions_csv(s), decisions_csv(p));
  EXPECT_EQ(s.total(), 60u);
}
