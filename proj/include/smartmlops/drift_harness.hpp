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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/dataset.hpp"
#include "smartmlops/drift_metrics.hpp"

namespace smartmlops::harness {

enum class DriftKind { kMeanShift, kCategoryRebalance, kConceptFlip };

std::string_view to_string(DriftKind kind);
DriftKind parse_drift_kind(std::string_view text);

/// Active from `batch` onward. Magnitude is in reference standard deviations
/// for mean_shift, probability mass moved onto the first category for
/// category_rebalance, and unused for concept_flip. Empty `features` means
/// feature 0 for shifts and every numeric feature for concept_flip.
struct DriftEvent {
  std::size_t batch = 0;
  DriftKind kind = DriftKind::kMeanShift;
  double magnitude = 1.0;
  std::vector<std::size_t> features;
};

/// Columns: x0..x{n-1} ~ N(0,1), c0..c{m-1} uniform over k0..k{c-1}, and a
/// 0/1 `label` = [w . x > 0] with w ~ N(0,1) drawn once per seed.
struct ScenarioConfig {
  std::uint64_t seed = 42;
  std::size_t numeric_features = 3;
  std::size_t categorical_features = 1;
  std::size_t categories = 4;
  std::size_t rows_per_batch = 1000;
  std::size_t reference_rows = 0;  // 0 means rows_per_batch
  std::size_t batch_count = 20;
  std::vector<DriftEvent> events;

  void validate() const;
};

struct Scenario {
  data::Dataset reference;
  std::vector<data::Dataset> batches;
  std::vector<bool> drifted;  // ground truth per batch
  std::vector<double> label_weights;
};

inline constexpr std::string_view kLabelColumn = "label";

std::vector<double> label_weights(const ScenarioConfig& config);
// Batch `index` of the stream; the reference sample is generated separately.
data::Dataset generate_batch(const ScenarioConfig& config, std::size_t index);
data::Dataset generate_reference(const ScenarioConfig& config);
std::vector<bool> ground_truth(const ScenarioConfig& config);
Scenario generate_scenario(const ScenarioConfig& config);
std::vector<std::string> feature_names(const ScenarioConfig& config);

struct BatchDecision {
  std::uint64_t seed = 0;
  std::size_t batch = 0;
  double drift_score = 0.0;
  bool flagged = false;
  bool truth = false;
};

struct DdaResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::vector<BatchDecision> decisions;

  std::size_t total() const { return tp + fp + tn + fn; }
  double dda() const;
  // FP / (FP + TN); zero when there are no negatives.
  double false_positive_rate() const;
  void merge(const DdaResult& other);
};

struct DdaOptions {
  drift::DriftThresholds thresholds;
  std::size_t bins = drift::kDefaultBinCount;
  double epsilon = drift::kDefaultEpsilon;
};

// Reference stats from the reference sample; per batch, flagged iff the
// maximum per-feature PSI exceeds the PSI threshold.
DdaResult run_dda_scenario(const ScenarioConfig& config, const DdaOptions& options);

namespace serial {
DdaResult run_dda_monte_carlo(ScenarioConfig config, const std::vector<std::uint64_t>& seeds,
                              const DdaOptions& options);
}
namespace parallel {
// Seeds run concurrently; results are merged in seed order.
DdaResult run_dda_monte_carlo(ScenarioConfig config, const std::vector<std::uint64_t>& seeds,
                              const DdaOptions& options);
}

nlohmann::json to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DdaResult& result);
std::string decisions_csv(const DdaResult& result);

}  // namespace smartmlops::harness
