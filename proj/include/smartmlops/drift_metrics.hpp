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

namespace smartmlops::drift {

inline constexpr std::size_t kDefaultBinCount = 10;
inline constexpr double kDefaultEpsilon = 1e-6;
// Labels rarer than this fraction of the reference sample share the "other" bin.
inline constexpr double kRareLabelFraction = 0.01;
inline constexpr std::string_view kOtherBin = "other";

enum class BinKind { kNumeric, kCategorical };

std::string_view to_string(BinKind kind);
BinKind parse_bin_kind(std::string_view text);

/// Bin layout shared by a reference sample and every sample compared to it.
///
/// Numeric: `edges` holds k+1 strictly ascending boundaries whose outermost
/// values are -inf and +inf. Categorical: one bin per entry of `categories`
/// followed by the reserved "other" bin that absorbs rare and unseen labels.
struct Binning {
  BinKind kind = BinKind::kNumeric;
  std::vector<double> edges;
  std::vector<std::string> categories;

  std::size_t bin_count() const;
  std::span<const double> interior_edges() const;
  std::size_t bin_of(double value) const;
  std::size_t bin_of(std::string_view label) const;

  // Throws Error(kInvalidArgument) when the invariants do not hold.
  void validate() const;

  friend bool operator==(const Binning&, const Binning&) = default;
};

struct BinnedDistribution {
  Binning binning;
  std::vector<double> proportions;
  std::uint64_t sample_count = 0;

  void validate() const;

  friend bool operator==(const BinnedDistribution&, const BinnedDistribution&) = default;
};

struct DriftThresholds {
  double kl_delta = 0.1;
  double psi_threshold = 0.25;

  void validate() const;
};

struct PsiResult {
  double total = 0.0;
  std::vector<double> per_bin_terms;
};

struct DriftReport {
  std::string feature;
  double kl = 0.0;
  double psi = 0.0;
  std::vector<double> per_bin_psi_terms;
  bool kl_flagged = false;
  bool psi_flagged = false;
  DriftThresholds thresholds;
};

// Equal-frequency bins from reference quantiles. Needs at least k distinct
// values; coincident quantile edges are merged, so the result may hold fewer
// than k bins but never fewer than two.
Binning build_reference_binning(std::span<const double> values,
                                std::size_t k = kDefaultBinCount);
// One bin per label holding at least kRareLabelFraction of the sample, in
// lexicographic order, plus "other".
Binning build_reference_binning(std::span<const std::string> labels,
                                std::size_t k = kDefaultBinCount);

BinnedDistribution bin_distribution(std::span<const double> values, const Binning& binning);
BinnedDistribution bin_distribution(std::span<const std::string> labels, const Binning& binning);
BinnedDistribution from_counts(const Binning& binning, std::span<const std::uint64_t> counts);

// Proportions below epsilon are raised to epsilon, then the vector is
// renormalised to sum to one.
std::vector<double> smooth(std::span<const double> proportions, double epsilon);

double kl_divergence(const BinnedDistribution& p, const BinnedDistribution& q,
                     double epsilon = kDefaultEpsilon);
PsiResult psi(const BinnedDistribution& p, const BinnedDistribution& q,
              double epsilon = kDefaultEpsilon);

DriftReport evaluate_drift(std::string feature, const BinnedDistribution& reference,
                           const BinnedDistribution& current, const DriftThresholds& thresholds,
                           double epsilon = kDefaultEpsilon);

nlohmann::json to_json(const Binning& binning);
Binning binning_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DriftThresholds& thresholds);
DriftThresholds thresholds_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DriftReport& report);

}  // namespace smartmlops::drift
