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

// Data-parallel inner loops. Each kernel has a plain serial implementation,
// kept as the reference the OpenMP version is tested and benchmarked against.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smartmlops::kernels {

// Row-major dense matrix view.
struct MatrixView {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::span<const double> row(std::size_t r) const { return values.subspan(r * cols, cols); }
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

// Bin index of `value` given the interior edges of a numeric binning. Values
// equal to an edge belong to the bin above it.
std::size_t bin_index(std::span<const double> interior_edges, double value);

// Mean logistic loss with an optional L2 penalty, plus its gradient.
//   loss = mean(softplus(z) - y*z) + l2/2 * |w|^2,  z = x.w + b
double stable_softplus(double z);
double sigmoid(double z);

namespace serial {

void bin_counts(std::span<const double> values, std::span<const double> interior_edges,
                std::span<std::uint64_t> counts);

LossGrad logistic_loss_grad(MatrixView x, std::span<const double> y, std::span<const double> w,
                            double b, double l2);

}  // namespace serial

namespace parallel {

void bin_counts(std::span<const double> values, std::span<const double> interior_edges,
                std::span<std::uint64_t> counts);

// Partial sums are taken over fixed-size row chunks and combined in chunk
// order, so the result does not depend on the thread count.
LossGrad logistic_loss_grad(MatrixView x, std::span<const double> y, std::span<const double> w,
                            double b, double l2);

}  // namespace parallel

int max_threads();

}  // namespace smartmlops::kernels
