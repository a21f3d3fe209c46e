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

#include "smartmlops/drift_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "smartmlops/error.hpp"
#include "smartmlops/kernels.hpp"

namespace smartmlops::drift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSumTolerance = 1e-9;
constexpr double kNegativeRoundOff = 1e-12;

void require_same_binning(const BinnedDistribution& p, const BinnedDistribution& q) {
  if (!(p.binning == q.binning) || p.proportions.size() != q.proportions.size()) {
    fail(ErrorCode::kInvalidArgument, "binning mismatch between compared distributions");
  }
}

double clamp_round_off(double value) {
  return (value < 0.0 && value >= -kNegativeRoundOff) ? 0.0 : value;
}

}  // namespace

std::string_view to_string(BinKind kind) {
  return kind == BinKind::kNumeric ? "numeric" : "categorical";
}

BinKind parse_bin_kind(std::string_view text) {
  if (text == "numeric") return BinKind::kNumeric;
  if (text == "categorical") return BinKind::kCategorical;
  fail(ErrorCode::kParse, fmt::format("unknown binning kind '{}'", text));
}

std::size_t Binning::bin_count() const {
  if (kind == BinKind::kNumeric) return edges.empty() ? 0 : edges.size() - 1;
  return categories.size() + 1;
}

std::span<const double> Binning::interior_edges() const {
  if (edges.size() < 2) return {};
  return std::span<const double>(edges).subspan(1, edges.size() - 2);
}

std::size_t Binning::bin_of(double value) const {
  return kernels::bin_index(interior_edges(), value);
}

std::size_t Binning::bin_of(std::string_view label) const {
  const auto it = std::lower_bound(categories.begin(), categories.end(), label);
  if (it != categories.end() && *it == label) {
    return static_cast<std::size_t>(it - categories.begin());
  }
  return categories.size();
}

void Binning::validate() const {
  if (bin_count() < 2) fail(ErrorCode::kInvalidArgument, "binning needs at least two bins");
  if (kind == BinKind::kNumeric) {
    if (edges.front() != -kInf || edges.back() != kInf) {
      fail(ErrorCode::kInvalidArgument, "outermost numeric edges must be -inf and +inf");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (!(edges[i - 1] < edges[i])) {
        fail(ErrorCode::kInvalidArgument, "numeric bin edges must be strictly ascending");
      }
    }
  } else {
    for (std::size_t i = 1; i < categories.size(); ++i) {
      if (!(categories[i - 1] < categories[i])) {
        fail(ErrorCode::kInvalidArgument, "category labels must be unique and sorted");
      }
    }
  }
}

void BinnedDistribution::validate() const {
  binning.validate();
  if (proportions.size() != binning.bin_count()) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("expected {} proportions, got {}", binning.bin_count(), proportions.size()));
  }
  double sum = 0.0;
  for (const double p : proportions) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      fail(ErrorCode::kInvalidArgument, "proportions must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    fail(ErrorCode::kInvalidArgument, fmt::format("proportions sum to {}, not 1", sum));
  }
}

void DriftThresholds::validate() const {
  if (!(kl_delta > 0.0) || !(psi_threshold > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "drift thresholds must be strictly positive");
  }
}

Binning build_reference_binning(std::span<const double> values, std::size_t k) {
  if (k < 2) fail(ErrorCode::kInvalidArgument, "bin count k must be at least 2");
  std::vector<double> sorted(values.begin(), values.end());
  for (const double v : sorted) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "reference values must be finite");
  }
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct_count = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++distinct_count;
  }
  if (distinct_count < k) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("too few distinct values: {} distinct for {} bins", distinct_count, k));
  }

  const std::size_t n = sorted.size();
  Binning binning;
  binning.kind = BinKind::kNumeric;
  binning.edges.push_back(-kInf);
  for (std::size_t j = 1; j < k; ++j) {
    // Boundary between the j-th and (j+1)-th equal-count group.
    auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(j * n) / static_cast<double>(k)));
    idx = std::clamp<std::size_t>(idx, 1, n - 1);
    const double edge = sorted[idx - 1] + (sorted[idx] - sorted[idx - 1]) / 2.0;
    if (edge > binning.edges.back()) binning.edges.push_back(edge);
  }
  binning.edges.push_back(kInf);
  if (binning.bin_count() < 2) {
    fail(ErrorCode::kInvalidArgument, "too few distinct values: quantile edges collapsed");
  }
  return binning;
}

Binning build_reference_binning(std::span<const std::string> labels, std::size_t k) {
  if (k < 2) fail(ErrorCode::kInvalidArgument, "bin count k must be at least 2");
  if (labels.empty()) fail(ErrorCode::kInvalidArgument, "too few distinct values: no labels");
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const auto& label : labels) ++counts[label];
  Binning binning;
  binning.kind = BinKind::kCategorical;
  const double n = static_cast<double>(labels.size());
  for (const auto& [label, count] : counts) {
    if (static_cast<double>(count) >= kRareLabelFraction * n) binning.categories.push_back(label);
  }
  if (binning.categories.empty()) {
    fail(ErrorCode::kInvalidArgument, "too few distinct values: every label is rare");
  }
  return binning;
}

BinnedDistribution from_counts(const Binning& binning, std::span<const std::uint64_t> counts) {
  BinnedDistribution out;
  out.binning = binning;
  out.sample_count = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (out.sample_count == 0) fail(ErrorCode::kInvalidArgument, "cannot bin an empty sample");
  out.proportions.reserve(counts.size());
  const double n = static_cast<double>(out.sample_count);
  for (const auto c : counts) out.proportions.push_back(static_cast<double>(c) / n);
  return out;
}

BinnedDistribution bin_distribution(std::span<const double> values, const Binning& binning) {
  if (binning.kind != BinKind::kNumeric) {
    fail(ErrorCode::kInvalidArgument, "numeric values given for a categorical binning");
  }
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "cannot bin an empty sample");
  for (const double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "values to bin must be finite");
  }
  std::vector<std::uint64_t> counts(binning.bin_count(), 0);
  kernels::parallel::bin_counts(values, binning.interior_edges(), counts);
  return from_counts(binning, counts);
}

BinnedDistribution bin_distribution(std::span<const std::string> labels, const Binning& binning) {
  if (binning.kind != BinKind::kCategorical) {
    fail(ErrorCode::kInvalidArgument, "labels given for a numeric binning");
  }
  if (labels.empty()) fail(ErrorCode::kInvalidArgument, "cannot bin an empty sample");
  std::vector<std::uint64_t> counts(binning.bin_count(), 0);
  for (const auto& label : labels) ++counts[binning.bin_of(label)];
  return from_counts(binning, counts);
}

std::vector<double> smooth(std::span<const double> proportions, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon must be positive");
  std::vector<double> out(proportions.begin(), proportions.end());
  double sum = 0.0;
  for (double& p : out) {
    if (p < epsilon) p = epsilon;
    sum += p;
  }
  for (double& p : out) p /= sum;
  return out;
}

double kl_divergence(const BinnedDistribution& p, const BinnedDistribution& q, double epsilon) {
  require_same_binning(p, q);
  const auto ps = smooth(p.proportions, epsilon);
  const auto qs = smooth(q.proportions, epsilon);
  double total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) total += ps[i] * std::log(ps[i] / qs[i]);
  return clamp_round_off(total);
}

PsiResult psi(const BinnedDistribution& p, const BinnedDistribution& q, double epsilon) {
  require_same_binning(p, q);
  const auto ps = smooth(p.proportions, epsilon);
  const auto qs = smooth(q.proportions, epsilon);
  PsiResult out;
  out.per_bin_terms.reserve(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    // (p-q) and ln(p/q) share a sign, so every term is >= 0.
    const double term = (ps[i] - qs[i]) * std::log(ps[i] / qs[i]);
    out.per_bin_terms.push_back(term);
    out.total += term;
  }
  out.total = clamp_round_off(out.total);
  return out;
}

DriftReport evaluate_drift(std::string feature, const BinnedDistribution& reference,
                           const BinnedDistribution& current, const DriftThresholds& thresholds,
                           double epsilon) {
  thresholds.validate();
  DriftReport report;
  report.feature = std::move(feature);
  report.kl = kl_divergence(reference, current, epsilon);
  auto psi_result = psi(reference, current, epsilon);
  report.psi = psi_result.total;
  report.per_bin_psi_terms = std::move(psi_result.per_bin_terms);
  report.kl_flagged = report.kl > thresholds.kl_delta;
  report.psi_flagged = report.psi > thresholds.psi_threshold;
  report.thresholds = thresholds;
  return report;
}

nlohmann::json to_json(const Binning& binning) {
  nlohmann::json j;
  j["kind"] = to_string(binning.kind);
  if (binning.kind == BinKind::kNumeric) {
    // +-inf are implicit; JSON has no representation for them.
    const auto inner = binning.interior_edges();
    j["interior_edges"] = std::vector<double>(inner.begin(), inner.end());
  } else {
    j["categories"] = binning.categories;
  }
  return j;
}

Binning binning_from_json(const nlohmann::json& j) {
  Binning binning;
  binning.kind = parse_bin_kind(j.at("kind").get<std::string>());
  if (binning.kind == BinKind::kNumeric) {
    binning.edges.push_back(-kInf);
    for (const auto& e : j.at("interior_edges")) binning.edges.push_back(e.get<double>());
    binning.edges.push_back(kInf);
  } else {
    binning.categories = j.at("categories").get<std::vector<std::string>>();
  }
  binning.validate();
  return binning;
}

nlohmann::json to_json(const DriftThresholds& thresholds) {
  return {{"kl_delta", thresholds.kl_delta}, {"psi_threshold", thresholds.psi_threshold}};
}

DriftThresholds thresholds_from_json(const nlohmann::json& j) {
  DriftThresholds t;
  t.kl_delta = j.value("kl_delta", t.kl_delta);
  t.psi_threshold = j.value("psi_threshold", t.psi_threshold);
  t.validate();
  return t;
}

nlohmann::json to_json(const DriftReport& report) {
  return {{"feature", report.feature},
          {"kl", report.kl},
          {"psi", report.psi},
          {"per_bin_psi_terms", report.per_bin_psi_terms},
          {"kl_flagged", report.kl_flagged},
          {"psi_flagged", report.psi_flagged},
          {"thresholds", to_json(report.thresholds)}};
}

}  // namespace smartmlops::drift
