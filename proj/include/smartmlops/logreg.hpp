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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "smartmlops/dataset.hpp"
#include "smartmlops/kernels.hpp"

namespace smartmlops::learn {

const std::vector<std::string_view>& builtin_model_kinds();
bool is_builtin_model_kind(std::string_view kind);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  kernels::MatrixView view() const { return {values, rows, cols}; }
  Matrix select_rows(const std::vector<std::size_t>& rows) const;
};

struct TrainOptions {
  std::uint64_t seed = 42;
  std::size_t epochs = 300;
  double lr = 0.5;
  double l2 = 0.0;
  double holdout_fraction = 0.2;
};

/// Features are standardised with the training split's centre and scale before
/// the linear score; nulls (NaN) are imputed with the centre.
struct LogisticModel {
  std::string kind = "logreg";
  std::string target;
  std::vector<std::string> feature_names;
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<double> weights;
  double bias = 0.0;

  double predict_proba(std::span<const double> raw_row) const;
  int predict(std::span<const double> raw_row) const { return predict_proba(raw_row) >= 0.5 ? 1 : 0; }
};

struct TrainResult {
  LogisticModel model;
  double holdout_accuracy = 0.0;
  double train_accuracy = 0.0;
  std::vector<double> loss_history;  // loss before each epoch, plus the final loss
  std::size_t train_rows = 0;
  std::size_t holdout_rows = 0;
};

struct EncodedData {
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::string target;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> holdout;
};

// Seeded shuffle; the first round(n*fraction) shuffled rows form the holdout.
Split holdout_split(std::size_t n, double holdout_fraction, std::uint64_t seed);

// 0/1 numeric target, or a two-label categorical target (sorted: first -> 0).
std::vector<double> binary_target(const data::Column& column);

// Numeric features pass through; categorical features become one indicator
// column per observed label, named "<column>=<label>". Empty `features`
// means every column except the target.
EncodedData encode_features(const data::Dataset& dataset, const std::string& target,
                            const std::vector<std::string>& features = {});
// Rebuilds the matrix for a trained model's feature names from raw data.
Matrix encode_for_model(const data::Dataset& dataset, std::span<const std::string> feature_names);

// Round-trips an encoded matrix through a plain numeric dataset (features.csv).
data::Dataset to_dataset(const EncodedData& encoded);
EncodedData from_encoded_dataset(const data::Dataset& dataset, const std::string& target);

TrainResult train_model(std::string_view kind, const EncodedData& data, const TrainOptions& options);
TrainResult builtin_train_logreg(const data::Dataset& dataset, const std::string& target,
                                 const TrainOptions& options);

double accuracy(const LogisticModel& model, const Matrix& x, std::span<const double> y);
// Accuracy on the holdout rows chosen by `options` (same split as training).
double holdout_accuracy(const LogisticModel& model, const EncodedData& data, const TrainOptions& options);

// Mean log loss (+ L2) and gradient in standardised coordinates.
kernels::LossGrad loss_and_gradient(const Matrix& standardized_x, std::span<const double> y,
                                    std::span<const double> w, double b, double l2);

nlohmann::json to_json(const LogisticModel& model);
LogisticModel model_from_json(const nlohmann::json& j);

}  // namespace smartmlops::learn
