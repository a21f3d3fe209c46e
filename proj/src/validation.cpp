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

#include "smartmlops/validation.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "smartmlops/error.hpp"

namespace smartmlops::validation {

ReferenceSet ReferenceSet::from_records(std::vector<store::FeatureStatsRecord> records) {
  ReferenceSet ref;
  for (auto& r : records) {
    ref.monitored.push_back(r.feature);
    ref.stats.emplace(r.feature, std::move(r));
  }
  return ref;
}

ReferenceSet ReferenceSet::latest(const store::FeatureStore& store, const std::string& dataset_id,
                                  std::vector<std::string> features) {
  if (features.empty()) {
    for (const auto& s : store.list_stats(dataset_id)) features.push_back(s.feature);
  }
  if (features.empty()) {
    fail(ErrorCode::kNotFound, fmt::format("no reference stats stored for dataset '{}'", dataset_id));
  }
  std::vector<store::FeatureStatsRecord> records;
  for (const auto& f : features) records.push_back(store.get_stats(dataset_id, f));
  return from_records(std::move(records));
}

data::SchemaSpec schema_from_reference(const ReferenceSet& reference) {
  data::SchemaSpec schema;
  for (const auto& f : reference.monitored) {
    const auto& rec = reference.stats.at(f);
    data::ColumnSchema cs;
    cs.name = f;
    cs.type = rec.binning.kind == drift::BinKind::kNumeric ? data::ColumnType::kNumeric
                                                           : data::ColumnType::kCategorical;
    cs.nullable = true;
    schema.columns.push_back(std::move(cs));
  }
  return schema;
}

std::optional<drift::BinnedDistribution> bin_column(const data::Column& column,
                                                    const drift::Binning& binning) {
  if (binning.kind == drift::BinKind::kNumeric) {
    if (column.type != data::ColumnType::kNumeric) return std::nullopt;
    const auto values = column.non_null_numbers();
    if (values.empty()) return std::nullopt;
    return drift::bin_distribution(std::span<const double>(values), binning);
  }
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!column.is_null(r)) labels.push_back(column.cell_text(r));
  }
  if (labels.empty()) return std::nullopt;
  return drift::bin_distribution(std::span<const std::string>(labels), binning);
}

ValidationReport validate_ingest(const ReferenceSet& reference, const data::Dataset& incoming,
                                 const drift::DriftThresholds& thresholds,
                                 const std::optional<data::SchemaSpec>& schema) {
  thresholds.validate();
  for (const auto& f : reference.monitored) {
    if (!reference.stats.contains(f)) {
      fail(ErrorCode::kNotFound, fmt::format("no reference stats for monitored feature '{}'", f));
    }
  }

  ValidationReport report;
  report.schema_violations =
      data::check_schema(incoming, schema ? *schema : schema_from_reference(reference));

  for (const auto& f : reference.monitored) {
    const auto* column = incoming.find(f);
    if (column == nullptr) continue;  // already a missing-column violation
    const std::size_t nulls = column->null_count();
    if (incoming.row_count() > 0 &&
        static_cast<double>(nulls) > kMaxNullFraction * static_cast<double>(incoming.row_count())) {
      report.schema_violations.push_back(
          {f, "null-fraction",
           fmt::format("{} of {} values are null (limit {:.0f}%)", nulls, incoming.row_count(),
                       kMaxNullFraction * 100),
           nulls});
    }
    const auto& ref = reference.stats.at(f);
    const auto current = bin_column(*column, ref.binning);
    if (!current) continue;
    auto drift_report = drift::evaluate_drift(f, ref.distribution(), *current, thresholds);
    if (drift_report.kl_flagged) report.flagged_features.push_back(f);
    report.drift_reports.push_back(std::move(drift_report));
  }
  report.passed = report.schema_violations.empty() && report.flagged_features.empty();
  return report;
}

nlohmann::json to_json(const ValidationReport& report) {
  auto violations = nlohmann::json::array();
  for (const auto& v : report.schema_violations) violations.push_back(data::to_json(v));
  auto drift_reports = nlohmann::json::array();
  for (const auto& d : report.drift_reports) drift_reports.push_back(drift::to_json(d));
  return {{"schema_violations", violations},
          {"drift_reports", drift_reports},
          {"flagged_features", report.flagged_features},
          {"passed", report.passed}};
}

}  // namespace smartmlops::validation
