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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/dataset.hpp"
#include "smartmlops/drift_metrics.hpp"
#include "smartmlops/feature_store.hpp"

namespace smartmlops::validation {

// A monitored feature whose null share exceeds this fails validation outright.
inline constexpr double kMaxNullFraction = 0.20;

/// Frozen reference statistics for the monitored features, keyed by name.
struct ReferenceSet {
  std::vector<std::string> monitored;
  std::map<std::string, store::FeatureStatsRecord> stats;

  static ReferenceSet from_records(std::vector<store::FeatureStatsRecord> records);
  static ReferenceSet latest(const store::FeatureStore& store, const std::string& dataset_id,
                             std::vector<std::string> features = {});
};

struct ValidationReport {
  std::vector<data::SchemaViolation> schema_violations;
  std::vector<drift::DriftReport> drift_reports;
  std::vector<std::string> flagged_features;
  bool passed = true;
};

// Schema implied by a reference set: monitored names and types only, nulls
// allowed (they are policed by the null-fraction rule instead).
data::SchemaSpec schema_from_reference(const ReferenceSet& reference);

// Bins each monitored column of `incoming` with its frozen reference binning
// and reports KL/PSI. Passes iff there are no schema violations and no
// feature is KL-flagged. Throws Error(kNotFound) when a monitored feature has
// no reference stats.
ValidationReport validate_ingest(const ReferenceSet& reference, const data::Dataset& incoming,
                                 const drift::DriftThresholds& thresholds,
                                 const std::optional<data::SchemaSpec>& schema = std::nullopt);

// Binned distribution of one column under a reference binning; nulls dropped.
// Returns nullopt when the column has no non-null values.
std::optional<drift::BinnedDistribution> bin_column(const data::Column& column,
                                                    const drift::Binning& binning);

nlohmann::json to_json(const ValidationReport& report);

}  // namespace smartmlops::validation
