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

#include "smartmlops/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace smartmlops::kernels {

namespace {

constexpr std::size_t kRowChunk = 2048;

}  // namespace

std::size_t bin_index(std::span<const double> interior_edges, double value) {
  return static_cast<std::size_t>(
      std::upper_bound(interior_edges.begin(), interior_edges.end(), value) -
      interior_edges.begin());
}

double stable_softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

int max_threads() { return omp_get_max_threads(); }

namespace serial {

void bin_counts(std::span<const double> values, std::span<const double> interior_edges,
                std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  for (const double v : values) ++counts[bin_index(interior_edges, v)];
}

LossGrad logistic_loss_grad(MatrixView x, std::span<const double> y, std::span<const double> w,
                            double b, double l2) {
  LossGrad out;
  out.grad_w.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto row = x.row(r);
    double z = b;
    for (std::size_t c = 0; c < x.cols; ++c) z += row[c] * w[c];
    out.loss += stable_softplus(z) - y[r] * z;
    const double residual = sigmoid(z) - y[r];
    for (std::size_t c = 0; c < x.cols; ++c) out.grad_w[c] += residual * row[c];
    out.grad_b += residual;
  }
  const double n = static_cast<double>(std::max<std::size_t>(x.rows, 1));
  out.loss /= n;
  out.grad_b /= n;
  double wsq = 0.0;
  for (std::size_t c = 0; c < x.cols; ++c) {
    out.grad_w[c] = out.grad_w[c] / n + l2 * w[c];
    wsq += w[c] * w[c];
  }
  out.loss += 0.5 * l2 * wsq;
  return out;
}

}  // namespace serial

namespace parallel {

void bin_counts(std::span<const double> values, std::span<const double> interior_edges,
                std::span<std::uint64_t> counts) {
  std::fill(counts.begin(), counts.end(), 0);
  const std::size_t k = counts.size();
  const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(k, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      ++local[bin_index(interior_edges, values[static_cast<std::size_t>(i)])];
    }
#pragma omp critical(smartmlops_bin_counts)
    for (std::size_t j = 0; j < k; ++j) counts[j] += local[j];
  }
}

LossGrad logistic_loss_grad(MatrixView x, std::span<const double> y, std::span<const double> w,
                            double b, double l2) {
  const std::size_t cols = x.cols;
  const std::size_t chunks = (x.rows + kRowChunk - 1) / kRowChunk;
  // Per chunk: [loss, grad_b, grad_w...]
  std::vector<double> partial(chunks * (cols + 2), 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(chunks); ++ci) {
    const auto chunk = static_cast<std::size_t>(ci);
    double* acc = partial.data() + chunk * (cols + 2);
    const std::size_t end = std::min(x.rows, (chunk + 1) * kRowChunk);
    for (std::size_t r = chunk * kRowChunk; r < end; ++r) {
      const auto row = x.row(r);
      double z = b;
      for (std::size_t c = 0; c < cols; ++c) z += row[c] * w[c];
      acc[0] += stable_softplus(z) - y[r] * z;
      const double residual = sigmoid(z) - y[r];
      acc[1] += residual;
      for (std::size_t c = 0; c < cols; ++c) acc[2 + c] += residual * row[c];
    }
  }

  LossGrad out;
  out.grad_w.assign(cols, 0.0);
  for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
    const double* acc = partial.data() + chunk * (cols + 2);
    out.loss += acc[0];
    out.grad_b += acc[1];
    for (std::size_t c = 0; c < cols; ++c) out.grad_w[c] += acc[2 + c];
  }
  const double n = static_cast<double>(std::max<std::size_t>(x.rows, 1));
  out.loss /= n;
  out.grad_b /= n;
  double wsq = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    out.grad_w[c] = out.grad_w[c] / n + l2 * w[c];
    wsq += w[c] * w[c];
  }
  out.loss += 0.5 * l2 * wsq;
  return out;
}

}  // namespace parallel

}  // namespace smartmlops::kernels
