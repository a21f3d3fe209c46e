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

#include "smartmlops/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "smartmlops/error.hpp"
#include "smartmlops/storage.hpp"

namespace smartmlops::data {

namespace {

constexpr double kNull = std::numeric_limits<double>::quiet_NaN();

std::optional<double> parse_number(std::string_view s) {
  // from_chars rejects leading '+' and whitespace; trim both.
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Splits CSV text into records of optional fields (nullopt = null).
std::vector<std::vector<std::optional<std::string>>> split_records(
    std::string_view text, std::string_view source, std::vector<std::size_t>& record_lines) {
  std::vector<std::vector<std::optional<std::string>>> records;
  std::size_t record_start = 1;
  std::vector<std::optional<std::string>> record;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    if (field.empty()) {
      record.emplace_back(std::nullopt);  // empty and "" are both null
    } else {
      record.emplace_back(field);
    }
    field.clear();
    field_was_quoted = false;
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && !record.front().has_value();
    if (!blank) {
      records.push_back(std::move(record));
      record_lines.push_back(record_start);
    }
    record.clear();
  };

  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || field_was_quoted) {
          fail(ErrorCode::kParse, fmt::format("{}:{}: unexpected quote inside field", source, line));
        }
        quoted = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_start = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) fail(ErrorCode::kParse, fmt::format("{}:{}: unterminated quoted field", source, line));
  if (!field.empty() || !record.empty() || field_was_quoted) end_record();
  return records;
}

}  // namespace

std::string_view to_string(ColumnType type) {
  return type == ColumnType::kNumeric ? "numeric" : "categorical";
}

Column Column::numeric(std::string name, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.type = ColumnType::kNumeric;
  c.numbers = std::move(values);
  return c;
}

Column Column::categorical(std::string name, std::vector<std::optional<std::string>> values) {
  Column c;
  c.name = std::move(name);
  c.type = ColumnType::kCategorical;
  c.labels = std::move(values);
  return c;
}

std::size_t Column::size() const {
  return type == ColumnType::kNumeric ? numbers.size() : labels.size();
}

bool Column::is_null(std::size_t row) const {
  return type == ColumnType::kNumeric ? std::isnan(numbers[row]) : !labels[row].has_value();
}

std::size_t Column::null_count() const {
  std::size_t n = 0;
  for (std::size_t r = 0; r < size(); ++r) n += is_null(r) ? 1 : 0;
  return n;
}

std::vector<double> Column::non_null_numbers() const {
  std::vector<double> out;
  out.reserve(numbers.size());
  for (const double v : numbers) {
    if (!std::isnan(v)) out.push_back(v);
  }
  return out;
}

std::vector<std::string> Column::non_null_labels() const {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& v : labels) {
    if (v) out.push_back(*v);
  }
  return out;
}

std::string Column::cell_text(std::size_t row) const {
  if (is_null(row)) return {};
  if (type == ColumnType::kNumeric) return fmt::format("{}", numbers[row]);
  return *labels[row];
}

void Dataset::add_column(Column column) {
  if (find(column.name) != nullptr) {
    fail(ErrorCode::kInvalidArgument, fmt::format("duplicate column '{}'", column.name));
  }
  if (!columns_.empty() && column.size() != rows_) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("column '{}' has {} rows, expected {}", column.name, column.size(), rows_));
  }
  rows_ = column.size();
  columns_.push_back(std::move(column));
}

const Column* Dataset::find(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Column& Dataset::at(std::string_view name) const {
  const auto* c = find(name);
  if (c == nullptr) fail(ErrorCode::kNotFound, fmt::format("no column named '{}'", name));
  return *c;
}

std::vector<std::string> Dataset::column_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) names.push_back(c.name);
  return names;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, rows_);
  std::vector<std::size_t> rows;
  for (std::size_t r = begin; r < end; ++r) rows.push_back(r);
  return select_rows(rows);
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  Dataset out;
  for (const auto& c : columns_) {
    Column copy;
    copy.name = c.name;
    copy.type = c.type;
    for (const auto r : rows) {
      if (c.type == ColumnType::kNumeric) {
        copy.numbers.push_back(c.numbers.at(r));
      } else {
        copy.labels.push_back(c.labels.at(r));
      }
    }
    out.add_column(std::move(copy));
  }
  return out;
}

void Dataset::append(const Dataset& other) {
  if (columns_.empty()) {
    *this = other;
    return;
  }
  if (other.columns_.size() != columns_.size()) {
    fail(ErrorCode::kInvalidArgument, "cannot append datasets with different columns");
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& src = other.columns_[i];
    auto& dst = columns_[i];
    if (src.name != dst.name || src.type != dst.type) {
      fail(ErrorCode::kInvalidArgument,
           fmt::format("cannot append: column {} is '{}' ({}) vs '{}' ({})", i, dst.name,
                       to_string(dst.type), src.name, to_string(src.type)));
    }
    dst.numbers.insert(dst.numbers.end(), src.numbers.begin(), src.numbers.end());
    dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  }
  rows_ += other.rows_;
}

Dataset parse_csv(std::string_view text, std::string_view source) {
  std::vector<std::size_t> lines;
  auto records = split_records(text, source, lines);
  if (records.empty()) fail(ErrorCode::kParse, fmt::format("{}: empty file (no header row)", source));
  const auto& header = records.front();
  const std::size_t width = header.size();

  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      fail(ErrorCode::kParse, fmt::format("{}:{}: ragged row with {} fields, header has {}",
                                          source, lines[r], records[r].size(), width));
    }
  }

  Dataset ds;
  for (std::size_t c = 0; c < width; ++c) {
    const std::string name = header[c].value_or("");
    if (name.empty()) fail(ErrorCode::kParse, fmt::format("{}:1: empty column name at position {}", source, c + 1));
    bool numeric = true;
    std::vector<double> numbers;
    numbers.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size() && numeric; ++r) {
      const auto& cell = records[r][c];
      if (!cell) {
        numbers.push_back(kNull);
        continue;
      }
      const auto v = parse_number(*cell);
      if (!v) {
        numeric = false;
      } else {
        numbers.push_back(*v);
      }
    }
    if (numeric) {
      ds.add_column(Column::numeric(name, std::move(numbers)));
    } else {
      std::vector<std::optional<std::string>> labels;
      labels.reserve(records.size() - 1);
      for (std::size_t r = 1; r < records.size(); ++r) labels.push_back(records[r][c]);
      ds.add_column(Column::categorical(name, std::move(labels)));
    }
  }
  return ds;
}

Dataset ingest_csv(const std::filesystem::path& path) {
  const std::string text = storage::read_file(path);
  return parse_csv(text, path.string());
}

std::string to_csv(const Dataset& dataset) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  };
  std::string out;
  const auto& cols = dataset.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c > 0) out.push_back(',');
    out += quote(cols[c].name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c > 0) out.push_back(',');
      out += quote(cols[c].cell_text(r));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& dataset) {
  storage::write_file_atomic(path, to_csv(dataset));
}

const ColumnSchema* SchemaSpec::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

SchemaSpec infer_schema(const Dataset& dataset) {
  if (dataset.row_count() == 0) fail(ErrorCode::kInvalidArgument, "cannot infer a schema from an empty dataset");
  SchemaSpec schema;
  for (const auto& col : dataset.columns()) {
    ColumnSchema cs;
    cs.name = col.name;
    cs.type = col.type;
    cs.nullable = col.null_count() > 0;
    if (col.type == ColumnType::kNumeric) {
      const auto values = col.non_null_numbers();
      if (!values.empty()) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        cs.range = std::make_pair(*lo, *hi);
      }
    } else {
      const auto labels = col.non_null_labels();
      cs.allowed = std::set<std::string>(labels.begin(), labels.end());
    }
    schema.columns.push_back(std::move(cs));
  }
  return schema;
}

std::vector<SchemaViolation> check_schema(const Dataset& dataset, const SchemaSpec& schema) {
  std::vector<SchemaViolation> out;
  for (const auto& cs : schema.columns) {
    const Column* col = dataset.find(cs.name);
    if (col == nullptr) {
      out.push_back({cs.name, "missing-column", "column declared in schema is absent", 0});
      continue;
    }
    if (col->type != cs.type) {
      // An all-numeric column is still a valid categorical column.
      if (!(cs.type == ColumnType::kCategorical && col->type == ColumnType::kNumeric)) {
        out.push_back({cs.name, "type-mismatch",
                       fmt::format("expected {}, found {}", to_string(cs.type), to_string(col->type)), 0});
        continue;
      }
    }
    const std::size_t nulls = col->null_count();
    if (!cs.nullable && nulls > 0) {
      out.push_back({cs.name, "unexpected-null", fmt::format("{} null values", nulls), nulls});
    }
    if (cs.type == ColumnType::kNumeric && cs.range) {
      std::size_t outside = 0;
      for (const double v : col->numbers) {
        if (!std::isnan(v) && (v < cs.range->first || v > cs.range->second)) ++outside;
      }
      if (outside > 0) {
        out.push_back({cs.name, "out-of-range",
                       fmt::format("{} values outside [{}, {}]", outside, cs.range->first, cs.range->second),
                       outside});
      }
    }
    if (cs.type == ColumnType::kCategorical && cs.allowed) {
      std::size_t disallowed = 0;
      std::set<std::string> examples;
      for (std::size_t r = 0; r < col->size(); ++r) {
        if (col->is_null(r)) continue;
        const std::string label = col->cell_text(r);
        if (!cs.allowed->contains(label)) {
          ++disallowed;
          if (examples.size() < 5) examples.insert(label);
        }
      }
      if (disallowed > 0) {
        std::string list;
        for (const auto& e : examples) list += (list.empty() ? "" : ", ") + e;
        out.push_back({cs.name, "disallowed-category",
                       fmt::format("{} values not in allowed set (e.g. {})", disallowed, list), disallowed});
      }
    }
  }
  for (const auto& col : dataset.columns()) {
    if (schema.find(col.name) == nullptr) {
      out.push_back({col.name, "extra-column", "column not declared in schema", 0});
    }
  }
  return out;
}

nlohmann::json to_json(const SchemaSpec& schema) {
  auto cols = nlohmann::json::array();
  for (const auto& c : schema.columns) {
    nlohmann::json j{{"name", c.name}, {"type", to_string(c.type)}, {"nullable", c.nullable}};
    if (c.range) j["range"] = {c.range->first, c.range->second};
    if (c.allowed) j["allowed"] = *c.allowed;
    cols.push_back(std::move(j));
  }
  return {{"columns", cols}};
}

SchemaSpec schema_from_json(const nlohmann::json& j) {
  SchemaSpec schema;
  for (const auto& c : j.at("columns")) {
    ColumnSchema cs;
    cs.name = c.at("name").get<std::string>();
    const auto type = c.at("type").get<std::string>();
    if (type == "numeric") {
      cs.type = ColumnType::kNumeric;
    } else if (type == "categorical") {
      cs.type = ColumnType::kCategorical;
    } else {
      fail(ErrorCode::kParse, fmt::format("columns.{}.type: unknown type '{}'", cs.name, type));
    }
    cs.nullable = c.value("nullable", false);
    if (c.contains("range")) cs.range = std::make_pair(c["range"][0].get<double>(), c["range"][1].get<double>());
    if (c.contains("allowed")) cs.allowed = c["allowed"].get<std::set<std::string>>();
    if (schema.find(cs.name) != nullptr) fail(ErrorCode::kParse, fmt::format("duplicate schema column '{}'", cs.name));
    schema.columns.push_back(std::move(cs));
  }
  return schema;
}

nlohmann::json to_json(const SchemaViolation& v) {
  return {{"column", v.column}, {"rule", v.rule}, {"detail", v.detail}, {"count", v.count}};
}

}  // namespace smartmlops::data
