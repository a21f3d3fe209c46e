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

#include "smartmlops/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "smartmlops/error.hpp"

namespace smartmlops::learn {

namespace {

std::vector<double> standardize_row(const LogisticModel& m, std::span<const double> raw) {
  std::vector<double> out(raw.size());
  for (std::size_t c = 0; c < raw.size(); ++c) {
    const double v = std::isnan(raw[c]) ? m.center[c] : raw[c];
    out[c] = (v - m.center[c]) / m.scale[c];
  }
  return out;
}

Matrix standardize(const LogisticModel& m, const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double v = std::isnan(x.at(r, c)) ? m.center[c] : x.at(r, c);
      out.at(r, c) = (v - m.center[c]) / m.scale[c];
    }
  }
  return out;
}

void fit_standardization(LogisticModel& m, const Matrix& x) {
  m.center.assign(x.cols, 0.0);
  m.scale.assign(x.cols, 1.0);
  for (std::size_t c = 0; c < x.cols; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if (!std::isnan(x.at(r, c))) {
        sum += x.at(r, c);
        ++n;
      }
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    double sq = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      if (!std::isnan(x.at(r, c))) sq += (x.at(r, c) - mean) * (x.at(r, c) - mean);
    }
    const double sd = n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    m.center[c] = mean;
    m.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
}

std::vector<double> select(std::span<const double> v, const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(v[r]);
  return out;
}

void require_two_classes(std::span<const double> y, std::string_view what) {
  const bool has0 = std::find(y.begin(), y.end(), 0.0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1.0) != y.end();
  if (!has0 || !has1) {
    fail(ErrorCode::kInvalidArgument, fmt::format("degenerate single-class {}", what));
  }
}

}  // namespace

const std::vector<std::string_view>& builtin_model_kinds() {
  static const std::vector<std::string_view> kinds = {"logreg", "majority"};
  return kinds;
}

bool is_builtin_model_kind(std::string_view kind) {
  const auto& k = builtin_model_kinds();
  return std::find(k.begin(), k.end(), kind) != k.end();
}

Matrix Matrix::select_rows(const std::vector<std::size_t>& rows_to_keep) const {
  Matrix out(rows_to_keep.size(), cols);
  for (std::size_t i = 0; i < rows_to_keep.size(); ++i) {
    const auto src = row(rows_to_keep[i]);
    std::copy(src.begin(), src.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  return out;
}

double LogisticModel::predict_proba(std::span<const double> raw_row) const {
  const auto z_row = standardize_row(*this, raw_row);
  double z = bias;
  for (std::size_t c = 0; c < z_row.size(); ++c) z += weights[c] * z_row[c];
  return kernels::sigmoid(z);
}

Split holdout_split(std::size_t n, double holdout_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto holdout_n = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
  Split split;
  split.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout_n));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(holdout_n), order.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::vector<double> binary_target(const data::Column& column) {
  std::vector<double> y;
  y.reserve(column.size());
  if (column.null_count() > 0) {
    fail(ErrorCode::kInvalidArgument, fmt::format("target '{}' contains nulls", column.name));
  }
  if (column.type == data::ColumnType::kNumeric) {
    for (const double v : column.numbers) {
      if (v != 0.0 && v != 1.0) {
        fail(ErrorCode::kInvalidArgument,
             fmt::format("non-binary target '{}': value {} is not 0 or 1", column.name, v));
      }
      y.push_back(v);
    }
  } else {
    const auto labels = column.non_null_labels();
    const std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() > 2) {
      fail(ErrorCode::kInvalidArgument,
           fmt::format("non-binary target '{}': {} distinct labels", column.name, distinct.size()));
    }
    const std::string& positive = *distinct.rbegin();
    for (const auto& l : labels) y.push_back(distinct.size() == 2 && l == positive ? 1.0 : 0.0);
  }
  require_two_classes(y, fmt::format("target '{}'", column.name));
  return y;
}

EncodedData encode_features(const data::Dataset& dataset, const std::string& target,
                            const std::vector<std::string>& features) {
  EncodedData out;
  out.target = target;
  out.y = binary_target(dataset.at(target));
  std::vector<std::string> use = features;
  if (use.empty()) {
    for (const auto& c : dataset.columns()) {
      if (c.name != target) use.push_back(c.name);
    }
  }
  for (const auto& name : use) {
    const auto& col = dataset.at(name);
    if (col.type == data::ColumnType::kNumeric) {
      out.feature_names.push_back(name);
    } else {
      const auto labels = col.non_null_labels();
      for (const auto& l : std::set<std::string>(labels.begin(), labels.end())) {
        out.feature_names.push_back(name + "=" + l);
      }
    }
  }
  out.x = encode_for_model(dataset, out.feature_names);
  return out;
}

Matrix encode_for_model(const data::Dataset& dataset, std::span<const std::string> feature_names) {
  Matrix x(dataset.row_count(), feature_names.size());
  for (std::size_t c = 0; c < feature_names.size(); ++c) {
    const auto& name = feature_names[c];
    if (const auto* col = dataset.find(name); col != nullptr && col->type == data::ColumnType::kNumeric) {
      for (std::size_t r = 0; r < x.rows; ++r) x.at(r, c) = col->numbers[r];
      continue;
    }
    const auto eq = name.find('=');
    const data::Column* col = eq == std::string::npos ? nullptr : dataset.find(name.substr(0, eq));
    if (col == nullptr) {
      fail(ErrorCode::kNotFound, fmt::format("model feature '{}' has no matching column", name));
    }
    const std::string label = name.substr(eq + 1);
    for (std::size_t r = 0; r < x.rows; ++r) {
      x.at(r, c) = (!col->is_null(r) && col->cell_text(r) == label) ? 1.0 : 0.0;
    }
  }
  return x;
}

data::Dataset to_dataset(const EncodedData& encoded) {
  data::Dataset ds;
  for (std::size_t c = 0; c < encoded.x.cols; ++c) {
    std::vector<double> values(encoded.x.rows);
    for (std::size_t r = 0; r < encoded.x.rows; ++r) values[r] = encoded.x.at(r, c);
    ds.add_column(data::Column::numeric(encoded.feature_names[c], std::move(values)));
  }
  ds.add_column(data::Column::numeric(encoded.target, encoded.y));
  return ds;
}

EncodedData from_encoded_dataset(const data::Dataset& dataset, const std::string& target) {
  EncodedData out;
  out.target = target;
  out.y = binary_target(dataset.at(target));
  for (const auto& c : dataset.columns()) {
    if (c.name == target) continue;
    if (c.type != data::ColumnType::kNumeric) {
      fail(ErrorCode::kInvalidArgument, fmt::format("encoded column '{}' is not numeric", c.name));
    }
    out.feature_names.push_back(c.name);
  }
  out.x = encode_for_model(dataset, out.feature_names);
  return out;
}

kernels::LossGrad loss_and_gradient(const Matrix& standardized_x, std::span<const double> y,
                                    std::span<const double> w, double b, double l2) {
  return kernels::parallel::logistic_loss_grad(standardized_x.view(), y, w, b, l2);
}

TrainResult train_model(std::string_view kind, const EncodedData& data, const TrainOptions& options) {
  if (!is_builtin_model_kind(kind)) {
    fail(ErrorCode::kInvalidArgument, fmt::format("unknown model kind '{}'", kind));
  }
  if (data.x.rows != data.y.size() || data.x.rows < 2) {
    fail(ErrorCode::kInvalidArgument, "training data needs at least two labelled rows");
  }
  if (!(options.lr > 0.0) || !(options.holdout_fraction >= 0.0 && options.holdout_fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "learning rate must be positive and holdout fraction in [0,1)");
  }
  require_two_classes(data.y, "target");
  const auto split = holdout_split(data.x.rows, options.holdout_fraction, options.seed);
  const Matrix x_train = data.x.select_rows(split.train);
  const auto y_train = select(data.y, split.train);
  require_two_classes(y_train, "training split");

  TrainResult result;
  LogisticModel& m = result.model;
  m.kind = std::string(kind);
  m.target = data.target;
  m.feature_names = data.feature_names;
  fit_standardization(m, x_train);
  m.weights.assign(x_train.cols, 0.0);

  if (kind == "majority") {
    double positives = 0.0;
    for (const double v : y_train) positives += v;
    m.bias = positives * 2.0 >= static_cast<double>(y_train.size()) ? 1.0 : -1.0;
  } else {
    const Matrix z_train = standardize(m, x_train);
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
      const auto lg = loss_and_gradient(z_train, y_train, m.weights, m.bias, options.l2);
      result.loss_history.push_back(lg.loss);
      for (std::size_t c = 0; c < m.weights.size(); ++c) m.weights[c] -= options.lr * lg.grad_w[c];
      m.bias -= options.lr * lg.grad_b;
    }
    result.loss_history.push_back(loss_and_gradient(z_train, y_train, m.weights, m.bias, options.l2).loss);
  }

  result.train_rows = split.train.size();
  result.holdout_rows = split.holdout.size();
  result.train_accuracy = accuracy(m, x_train, y_train);
  result.holdout_accuracy = split.holdout.empty()
                                ? result.train_accuracy
                                : accuracy(m, data.x.select_rows(split.holdout), select(data.y, split.holdout));
  return result;
}

TrainResult builtin_train_logreg(const data::Dataset& dataset, const std::string& target,
                                 const TrainOptions& options) {
  return train_model("logreg", encode_features(dataset, target), options);
}

double accuracy(const LogisticModel& model, const Matrix& x, std::span<const double> y) {
  if (x.rows == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    correct += static_cast<double>(model.predict(x.row(r))) == y[r] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows);
}

double holdout_accuracy(const LogisticModel& model, const EncodedData& data, const TrainOptions& options) {
  const auto split = holdout_split(data.x.rows, options.holdout_fraction, options.seed);
  const auto& rows = split.holdout.empty() ? split.train : split.holdout;
  const Matrix x = encode_for_model(to_dataset(data), model.feature_names).select_rows(rows);
  return accuracy(model, x, select(data.y, rows));
}

nlohmann::json to_json(const LogisticModel& m) {
  return {{"kind", m.kind},       {"target", m.target}, {"feature_names", m.feature_names},
          {"center", m.center},   {"scale", m.scale},   {"weights", m.weights},
          {"bias", m.bias}};
}

LogisticModel model_from_json(const nlohmann::json& j) {
  LogisticModel m;
  m.kind = j.at("kind").get<std::string>();
  m.target = j.value("target", std::string{});
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.center = j.at("center").get<std::vector<double>>();
  m.scale = j.at("scale").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  const auto n = m.feature_names.size();
  if (m.center.size() != n || m.scale.size() != n || m.weights.size() != n) {
    fail(ErrorCode::kParse, "model artifact has inconsistent vector lengths");
  }
  return m;
}

}  // namespace smartmlops::learn
