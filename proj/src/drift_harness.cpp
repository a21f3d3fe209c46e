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

#include "smartmlops/drift_harness.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <fmt/format.h>

#include "smartmlops/error.hpp"
#include "smartmlops/feature_store.hpp"
#include "smartmlops/monitor_engine.hpp"
#include "smartmlops/validation.hpp"

namespace smartmlops::harness {

namespace {

constexpr std::uint64_t kWeightsTag = 0x5745494748545300ULL;
constexpr std::uint64_t kReferenceTag = 0x5245464552454e43ULL;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

std::vector<std::size_t> targets_of(const DriftEvent& e, const ScenarioConfig& c) {
  if (!e.features.empty()) return e.features;
  if (e.kind == DriftKind::kConceptFlip) {
    std::vector<std::size_t> all(c.numeric_features);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  return {0};
}

// Draws `rows` rows with every event whose batch <= active_until applied.
data::Dataset draw(const ScenarioConfig& c, std::size_t rows, std::mt19937_64 rng,
                   std::optional<std::size_t> active_until) {
  std::vector<double> shift(c.numeric_features, 0.0);
  std::vector<double> weights = label_weights(c);
  std::vector<std::vector<double>> cat_probs(c.categorical_features,
                                             std::vector<double>(c.categories, 1.0 / static_cast<double>(c.categories)));
  if (active_until) {
    for (const auto& e : c.events) {
      if (e.batch > *active_until) continue;
      for (const auto f : targets_of(e, c)) {
        switch (e.kind) {
          case DriftKind::kMeanShift: shift[f] += e.magnitude; break;
          case DriftKind::kConceptFlip: weights[f] = -weights[f]; break;
          case DriftKind::kCategoryRebalance: {
            auto& p = cat_probs[f];
            for (std::size_t k = 1; k < p.size(); ++k) p[k] *= (1.0 - e.magnitude);
            p[0] += e.magnitude * (1.0 - p[0]);
            break;
          }
        }
      }
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> x(c.numeric_features, std::vector<double>(rows));
  std::vector<std::vector<std::optional<std::string>>> cats(c.categorical_features,
                                                            std::vector<std::optional<std::string>>(rows));
  std::vector<double> label(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double score = 0.0;
    for (std::size_t f = 0; f < c.numeric_features; ++f) {
      const double z = normal(rng);
      x[f][r] = z + shift[f];
      score += weights[f] * x[f][r];
    }
    for (std::size_t f = 0; f < c.categorical_features; ++f) {
      double u = unit(rng);
      std::size_t k = 0;
      while (k + 1 < c.categories && u >= cat_probs[f][k]) u -= cat_probs[f][k++];
      cats[f][r] = fmt::format("k{}", k);
    }
    label[r] = score > 0.0 ? 1.0 : 0.0;
  }

  data::Dataset ds;
  for (std::size_t f = 0; f < c.numeric_features; ++f) ds.add_column(data::Column::numeric(fmt::format("x{}", f), std::move(x[f])));
  for (std::size_t f = 0; f < c.categorical_features; ++f) {
    ds.add_column(data::Column::categorical(fmt::format("c{}", f), std::move(cats[f])));
  }
  ds.add_column(data::Column::numeric(std::string(kLabelColumn), std::move(label)));
  return ds;
}

}  // namespace

std::string_view to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::kMeanShift: return "mean_shift";
    case DriftKind::kCategoryRebalance: return "category_rebalance";
    case DriftKind::kConceptFlip: return "concept_flip";
  }
  return "unknown";
}

DriftKind parse_drift_kind(std::string_view text) {
  for (const auto k : {DriftKind::kMeanShift, DriftKind::kCategoryRebalance, DriftKind::kConceptFlip}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::kInvalidArgument,
       fmt::format("unknown drift kind '{}' (expected mean_shift, category_rebalance or concept_flip)", text));
}

void ScenarioConfig::validate() const {
  if (numeric_features == 0) fail(ErrorCode::kInvalidArgument, "scenario needs at least one numeric feature");
  if (categorical_features > 0 && categories < 2) {
    fail(ErrorCode::kInvalidArgument, "categorical features need at least two categories");
  }
  if (rows_per_batch == 0 || batch_count == 0) fail(ErrorCode::kInvalidArgument, "rows_per_batch and batch_count must be positive");
  for (const auto& e : events) {
    if (e.batch >= batch_count) {
      fail(ErrorCode::kInvalidArgument, fmt::format("drift event at batch {} is outside 0..{}", e.batch, batch_count - 1));
    }
    if (!(e.magnitude > 0.0)) fail(ErrorCode::kInvalidArgument, "drift magnitude must be positive");
    if (e.kind == DriftKind::kCategoryRebalance && e.magnitude > 1.0) {
      fail(ErrorCode::kInvalidArgument, "category_rebalance magnitude is a probability mass in (0, 1]");
    }
    const std::size_t limit = e.kind == DriftKind::kCategoryRebalance ? categorical_features : numeric_features;
    for (const auto f : e.features) {
      if (f >= limit) fail(ErrorCode::kInvalidArgument, fmt::format("drift event targets missing feature {}", f));
    }
    if (e.kind == DriftKind::kCategoryRebalance && categorical_features == 0) {
      fail(ErrorCode::kInvalidArgument, "category_rebalance needs a categorical feature");
    }
  }
}

std::vector<double> label_weights(const ScenarioConfig& config) {
  auto rng = stream_rng(config.seed, kWeightsTag);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(config.numeric_features);
  for (auto& v : w) v = normal(rng);
  return w;
}

data::Dataset generate_batch(const ScenarioConfig& config, std::size_t index) {
  config.validate();
  if (index >= config.batch_count) fail(ErrorCode::kInvalidArgument, fmt::format("batch {} out of range", index));
  return draw(config, config.rows_per_batch, stream_rng(config.seed, index), index);
}

data::Dataset generate_reference(const ScenarioConfig& config) {
  config.validate();
  const auto rows = config.reference_rows == 0 ? config.rows_per_batch : config.reference_rows;
  return draw(config, rows, stream_rng(config.seed, kReferenceTag), std::nullopt);
}

std::vector<bool> ground_truth(const ScenarioConfig& config) {
  std::vector<bool> truth(config.batch_count, false);
  for (const auto& e : config.events) {
    for (std::size_t b = e.batch; b < config.batch_count; ++b) truth[b] = true;
  }
  return truth;
}

Scenario generate_scenario(const ScenarioConfig& config) {
  Scenario s;
  s.reference = generate_reference(config);
  for (std::size_t b = 0; b < config.batch_count; ++b) s.batches.push_back(generate_batch(config, b));
  s.drifted = ground_truth(config);
  s.label_weights = label_weights(config);
  return s;
}

std::vector<std::string> feature_names(const ScenarioConfig& config) {
  std::vector<std::string> out;
  for (std::size_t f = 0; f < config.numeric_features; ++f) out.push_back(fmt::format("x{}", f));
  for (std::size_t f = 0; f < config.categorical_features; ++f) out.push_back(fmt::format("c{}", f));
  return out;
}

double DdaResult::dda() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

double DdaResult::false_positive_rate() const {
  return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn);
}

void DdaResult::merge(const DdaResult& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  decisions.insert(decisions.end(), other.decisions.begin(), other.decisions.end());
}

DdaResult run_dda_scenario(const ScenarioConfig& config, const DdaOptions& options) {
  config.validate();
  options.thresholds.validate();
  const auto reference = generate_reference(config);
  std::vector<store::FeatureStatsRecord> records;
  for (const auto& name : feature_names(config)) {
    records.push_back(store::compute_feature_stats("scenario", reference.at(name), options.bins));
  }
  const auto ref = validation::ReferenceSet::from_records(std::move(records));
  const auto truth = ground_truth(config);

  DdaResult result;
  for (std::size_t b = 0; b < config.batch_count; ++b) {
    const auto score = monitor::score_batch(ref, generate_batch(config, b), options.epsilon);
    BatchDecision d{config.seed, b, score.max_psi, score.max_psi > options.thresholds.psi_threshold, truth[b]};
    if (d.flagged && d.truth) ++result.tp;
    if (d.flagged && !d.truth) ++result.fp;
    if (!d.flagged && !d.truth) ++result.tn;
    if (!d.flagged && d.truth) ++result.fn;
    result.decisions.push_back(d);
  }
  return result;
}

namespace serial {
DdaResult run_dda_monte_carlo(ScenarioConfig config, const std::vector<std::uint64_t>& seeds,
                              const DdaOptions& options) {
  DdaResult total;
  for (const auto seed : seeds) {
    config.seed = seed;
    total.merge(run_dda_scenario(config, options));
  }
  return total;
}
}  // namespace serial

namespace parallel {
DdaResult run_dda_monte_carlo(ScenarioConfig config, const std::vector<std::uint64_t>& seeds,
                              const DdaOptions& options) {
  config.validate();
  std::vector<DdaResult> per_seed(seeds.size());
  std::vector<std::string> errors(seeds.size());
  const auto n = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      auto c = config;
      c.seed = seeds[static_cast<std::size_t>(i)];
      per_seed[static_cast<std::size_t>(i)] = run_dda_scenario(c, options);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) fail(ErrorCode::kInvalidArgument, e);
  }
  DdaResult total;
  for (const auto& r : per_seed) total.merge(r);
  return total;
}
}  // namespace parallel

nlohmann::json to_json(const ScenarioConfig& c) {
  auto events = nlohmann::json::array();
  for (const auto& e : c.events) {
    events.push_back({{"batch", e.batch}, {"kind", to_string(e.kind)}, {"magnitude", e.magnitude}, {"features", e.features}});
  }
  return {{"seed", c.seed},
          {"numeric_features", c.numeric_features},
          {"categorical_features", c.categorical_features},
          {"categories", c.categories},
          {"rows_per_batch", c.rows_per_batch},
          {"reference_rows", c.reference_rows},
          {"batch_count", c.batch_count},
          {"events", events}};
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKnown{"seed", "numeric_features", "categorical_features", "categories",
                                            "rows_per_batch", "reference_rows", "batch_count", "events"};
  if (!j.is_object()) fail(ErrorCode::kParse, "scenario must be a mapping");
  for (const auto& [k, v] : j.items()) {
    if (!kKnown.contains(k)) fail(ErrorCode::kParse, fmt::format("scenario: unknown key '{}'", k));
  }
  ScenarioConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.numeric_features = j.value("numeric_features", c.numeric_features);
    c.categorical_features = j.value("categorical_features", c.categorical_features);
    c.categories = j.value("categories", c.categories);
    c.rows_per_batch = j.value("rows_per_batch", c.rows_per_batch);
    c.reference_rows = j.value("reference_rows", c.reference_rows);
    c.batch_count = j.value("batch_count", c.batch_count);
    for (const auto& e : j.value("events", nlohmann::json::array())) {
      DriftEvent ev;
      ev.batch = e.at("batch").get<std::size_t>();
      ev.kind = parse_drift_kind(e.at("kind").get<std::string>());
      ev.magnitude = e.value("magnitude", 1.0);
      ev.features = e.value("features", std::vector<std::size_t>{});
      c.events.push_back(std::move(ev));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, fmt::format("scenario: {}", e.what()));
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const DdaResult& r) {
  return {{"tp", r.tp},   {"fp", r.fp},       {"tn", r.tn}, {"fn", r.fn}, {"total", r.total()},
          {"dda", r.dda()}, {"false_positive_rate", r.false_positive_rate()}};
}

std::string decisions_csv(const DdaResult& r) {
  std::string out = "seed,batch,drift_score,flagged,truth\n";
  for (const auto& d : r.decisions) {
    out += fmt::format("{},{},{},{},{}\n", d.seed, d.batch, d.drift_score, d.flagged ? 1 : 0, d.truth ? 1 : 0);
  }
  return out;
}

}  // namespace smartmlops::harness
