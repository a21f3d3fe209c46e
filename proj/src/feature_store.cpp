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

#include "smartmlops/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "smartmlops/error.hpp"

namespace smartmlops::store {

namespace fs = std::filesystem;

drift::BinnedDistribution FeatureStatsRecord::distribution() const {
  return {binning, proportions, sample_count};
}

void FeatureStatsRecord::validate() const {
  if (dataset_id.empty() || feature.empty()) {
    fail(ErrorCode::kInvalidArgument, "feature stats need a dataset id and a feature name");
  }
  distribution().validate();
  if (moments && binning.kind != drift::BinKind::kNumeric) {
    fail(ErrorCode::kInvalidArgument, "moments are only valid for numeric features");
  }
}

FeatureStatsRecord compute_feature_stats(std::string dataset_id, const data::Column& column,
                                         std::size_t bins) {
  FeatureStatsRecord rec;
  rec.dataset_id = std::move(dataset_id);
  rec.feature = column.name;
  if (column.type == data::ColumnType::kNumeric) {
    const auto values = column.non_null_numbers();
    const std::set<double> distinct(values.begin(), values.end());
    rec.binning = drift::build_reference_binning(std::span<const double>(values), std::min(bins, distinct.size()));
    const auto dist = drift::bin_distribution(std::span<const double>(values), rec.binning);
    rec.proportions = dist.proportions;
    rec.sample_count = dist.sample_count;
    Moments m;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    m.min = *lo;
    m.max = *hi;
    double sum = 0.0;
    for (const double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (const double v : values) sq += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(sq / static_cast<double>(values.size()));
    rec.moments = m;
  } else {
    const auto labels = column.non_null_labels();
    rec.binning = drift::build_reference_binning(std::span<const std::string>(labels), bins);
    const auto dist = drift::bin_distribution(std::span<const std::string>(labels), rec.binning);
    rec.proportions = dist.proportions;
    rec.sample_count = dist.sample_count;
  }
  return rec;
}

nlohmann::json to_json(const FeatureStatsRecord& r) {
  nlohmann::json j{{"dataset_id", r.dataset_id},
                   {"feature", r.feature},
                   {"version", r.version},
                   {"binning", drift::to_json(r.binning)},
                   {"proportions", r.proportions},
                   {"sample_count", r.sample_count},
                   {"created_at", format_timestamp(r.created_at)}};
  if (r.moments) {
    j["moments"] = {{"mean", r.moments->mean}, {"std", r.moments->std},
                    {"min", r.moments->min}, {"max", r.moments->max}};
  } else {
    j["moments"] = nullptr;
  }
  return j;
}

FeatureStatsRecord stats_from_json(const nlohmann::json& j) {
  FeatureStatsRecord r;
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.feature = j.at("feature").get<std::string>();
  r.version = j.at("version").get<std::uint64_t>();
  r.binning = drift::binning_from_json(j.at("binning"));
  r.proportions = j.at("proportions").get<std::vector<double>>();
  r.sample_count = j.at("sample_count").get<std::uint64_t>();
  r.created_at = parse_timestamp(j.at("created_at").get<std::string>());
  if (j.contains("moments") && !j["moments"].is_null()) {
    const auto& m = j["moments"];
    r.moments = Moments{m.at("mean").get<double>(), m.at("std").get<double>(),
                        m.at("min").get<double>(), m.at("max").get<double>()};
  }
  return r;
}

FeatureStore::FeatureStore(fs::path root) : root_(std::move(root)) {}

fs::path FeatureStore::dataset_dir(const std::string& dataset_id) const {
  return root_ / "features" / storage::encode_path_component(dataset_id);
}

nlohmann::json FeatureStore::read_index(const std::string& dataset_id) const {
  const auto path = dataset_dir(dataset_id) / "index.json";
  if (!fs::exists(path)) return nlohmann::json::object();
  return nlohmann::json::parse(storage::read_file(path));
}

std::uint64_t FeatureStore::put_stats(FeatureStatsRecord record) {
  record.validate();
  if (record.created_at == Timestamp{}) record.created_at = now();
  const auto dir = dataset_dir(record.dataset_id);
  storage::FileLock lock(dir / ".lock");

  auto index = read_index(record.dataset_id);
  const std::uint64_t latest = index.value(record.feature, std::uint64_t{0});
  record.version = latest + 1;
  // A file at this version can only be an unpublished leftover from a crash,
  // so overwriting it does not touch any published record.
  const auto feature_dir = dir / storage::encode_path_component(record.feature);
  storage::write_file_atomic(feature_dir / fmt::format("{}.json", record.version),
                             to_json(record).dump(2) + "\n", hook_);
  index[record.feature] = record.version;
  storage::write_file_atomic(dir / "index.json", index.dump(2) + "\n", hook_);
  return record.version;
}

FeatureStatsRecord FeatureStore::get_stats(const std::string& dataset_id, const std::string& feature,
                                           std::optional<std::uint64_t> version) const {
  const auto index = read_index(dataset_id);
  if (!index.contains(feature)) {
    fail(ErrorCode::kNotFound, fmt::format("no stats for feature '{}' in dataset '{}'", feature, dataset_id));
  }
  const auto latest = index[feature].get<std::uint64_t>();
  const auto v = version.value_or(latest);
  if (v == 0 || v > latest) {
    fail(ErrorCode::kNotFound,
         fmt::format("no version {} of feature '{}' in dataset '{}'", v, feature, dataset_id));
  }
  const auto path = dataset_dir(dataset_id) / storage::encode_path_component(feature) /
                    fmt::format("{}.json", v);
  if (!fs::exists(path)) fail(ErrorCode::kNotFound, fmt::format("missing stats file '{}'", path.string()));
  return stats_from_json(nlohmann::json::parse(storage::read_file(path)));
}

std::vector<StatsSummary> FeatureStore::list_stats(const std::string& dataset_id) const {
  std::vector<StatsSummary> out;
  const auto index = read_index(dataset_id);
  for (const auto& [feature, version] : index.items()) {
    const auto rec = get_stats(dataset_id, feature, version.get<std::uint64_t>());
    out.push_back({feature, rec.version, rec.created_at});
  }
  std::sort(out.begin(), out.end(),
            [](const StatsSummary& a, const StatsSummary& b) { return a.feature < b.feature; });
  return out;
}

std::vector<std::string> FeatureStore::list_datasets() const {
  std::vector<std::string> out;
  const auto dir = root_ / "features";
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "index.json")) {
      out.push_back(storage::decode_path_component(entry.path().filename().string()));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace smartmlops::store
