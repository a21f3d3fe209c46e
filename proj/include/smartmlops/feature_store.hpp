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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/dataset.hpp"
#include "smartmlops/drift_metrics.hpp"
#include "smartmlops/storage.hpp"
#include "smartmlops/timestamp.hpp"

namespace smartmlops::store {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Moments&, const Moments&) = default;
};

/// Frozen reference statistics for one feature of one dataset. Records are
/// immutable once published; a new put creates the next version.
struct FeatureStatsRecord {
  std::string dataset_id;
  std::string feature;
  std::uint64_t version = 0;
  drift::Binning binning;
  std::vector<double> proportions;
  std::optional<Moments> moments;  // numeric features only
  std::uint64_t sample_count = 0;
  Timestamp created_at{};

  drift::BinnedDistribution distribution() const;
  void validate() const;

  friend bool operator==(const FeatureStatsRecord&, const FeatureStatsRecord&) = default;
};

struct StatsSummary {
  std::string feature;
  std::uint64_t latest_version = 0;
  Timestamp created_at{};
};

// Reference statistics of one column: binning fitted on the non-null values,
// their proportions, and moments for numeric columns. A numeric column with
// fewer distinct values than `bins` gets at most one bin per distinct value.
FeatureStatsRecord compute_feature_stats(std::string dataset_id, const data::Column& column,
                                         std::size_t bins = drift::kDefaultBinCount);

nlohmann::json to_json(const FeatureStatsRecord& record);
FeatureStatsRecord stats_from_json(const nlohmann::json& j);

/// On-disk layout under `root`:
///   features/<dataset_id>/<feature>/<version>.json
///   features/<dataset_id>/index.json   feature -> latest version
///   features/<dataset_id>/.lock        writer lock
/// Writers are serialised per dataset; readers never take the lock.
class FeatureStore {
 public:
  explicit FeatureStore(std::filesystem::path root);

  // Assigns the next version, stamps created_at if unset, and publishes the
  // record. The index is replaced last, so a crash leaves the old latest.
  std::uint64_t put_stats(FeatureStatsRecord record);

  FeatureStatsRecord get_stats(const std::string& dataset_id, const std::string& feature,
                               std::optional<std::uint64_t> version = std::nullopt) const;
  std::vector<StatsSummary> list_stats(const std::string& dataset_id) const;
  std::vector<std::string> list_datasets() const;

  void set_fault_hook(storage::FaultHook hook) { hook_ = std::move(hook); }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path dataset_dir(const std::string& dataset_id) const;
  nlohmann::json read_index(const std::string& dataset_id) const;

  std::filesystem::path root_;
  storage::FaultHook hook_;
};

}  // namespace smartmlops::store
