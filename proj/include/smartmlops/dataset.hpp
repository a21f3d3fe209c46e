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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace smartmlops::data {

enum class ColumnType { kNumeric, kCategorical };

std::string_view to_string(ColumnType type);

/// One typed column. Numeric nulls are NaN; categorical nulls are nullopt.
struct Column {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  std::vector<double> numbers;
  std::vector<std::optional<std::string>> labels;

  static Column numeric(std::string name, std::vector<double> values);
  static Column categorical(std::string name, std::vector<std::optional<std::string>> values);

  std::size_t size() const;
  bool is_null(std::size_t row) const;
  std::size_t null_count() const;
  std::vector<double> non_null_numbers() const;
  std::vector<std::string> non_null_labels() const;
  std::string cell_text(std::size_t row) const;
};

class Dataset {
 public:
  Dataset() = default;

  // Throws Error(kInvalidArgument) on a length mismatch or duplicate name.
  void add_column(Column column);

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t row_count() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }
  const Column* find(std::string_view name) const;
  const Column& at(std::string_view name) const;
  std::vector<std::string> column_names() const;

  // Rows [begin, end) of every column.
  Dataset slice(std::size_t begin, std::size_t end) const;
  Dataset select_rows(const std::vector<std::size_t>& rows) const;
  // Appends rows of a dataset with the same column names and types.
  void append(const Dataset& other);

 private:
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

// RFC-4180-style parsing: comma separator, header row, double-quote escaping.
// Empty or "" fields are nulls. A column whose non-null fields all parse as
// finite numbers is numeric; otherwise it is categorical.
Dataset parse_csv(std::string_view text, std::string_view source = "<memory>");
Dataset ingest_csv(const std::filesystem::path& path);
std::string to_csv(const Dataset& dataset);
void write_csv(const std::filesystem::path& path, const Dataset& dataset);

struct ColumnSchema {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  bool nullable = false;
  std::optional<std::pair<double, double>> range;
  std::optional<std::set<std::string>> allowed;
};

struct SchemaSpec {
  std::vector<ColumnSchema> columns;

  const ColumnSchema* find(std::string_view name) const;
};

struct SchemaViolation {
  std::string column;
  std::string rule;  // missing-column, extra-column, type-mismatch, out-of-range, ...
  std::string detail;
  std::size_t count = 0;
};

SchemaSpec infer_schema(const Dataset& dataset);
std::vector<SchemaViolation> check_schema(const Dataset& dataset, const SchemaSpec& schema);

nlohmann::json to_json(const SchemaSpec& schema);
SchemaSpec schema_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SchemaViolation& violation);

}  // namespace smartmlops::data
