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

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "smartmlops/timestamp.hpp"

namespace smartmlops::policy {

struct GaussianLikelihood {
  double mean = 0.0;
  double stddev = 1.0;

  double density(double x) const;
  double log_density(double x) const;
};

/// Observed degradation s_t: reference metric minus current metric, so a
/// positive value means the model got worse.
struct DegradationSignal {
  double s_t = 0.0;
  Timestamp observed_at{};
};

struct PolicyConfig {
  double prior_retrain = 0.5;
  GaussianLikelihood retrain_needed{0.05, 0.02};
  GaussianLikelihood healthy{0.0, 0.02};
  double posterior_threshold = 0.7;
  bool sequential = false;

  void validate() const;
};

struct RetrainDecision {
  double posterior = 0.0;
  bool trigger = false;
  std::string rationale;
  // Set in sequential mode: the prior to use for the next observation.
  std::optional<double> next_prior;
};

// Bayes rule on explicit likelihood values:
//   l1*prior / (l1*prior + l0*(1-prior))
// Returns the prior unchanged when l1 == l0. Throws
// Error(kDegenerateEvidence) when the denominator vanishes.
double posterior_from_likelihoods(double l1, double l0, double prior);

// Same rule over the configured Gaussians, evaluated in log space so far-tail
// signals saturate towards 0 or 1 instead of underflowing to 0/0.
double posterior_retrain(const DegradationSignal& signal, const PolicyConfig& config);

RetrainDecision decide(const DegradationSignal& signal, const PolicyConfig& config);
RetrainDecision decide_from_likelihoods(double l1, double l0, const PolicyConfig& config);

/// Feeds each posterior back as the next prior. One instance per monitored
/// model stream; not safe for concurrent use.
class SequentialPolicy {
 public:
  explicit SequentialPolicy(PolicyConfig config);

  RetrainDecision observe(const DegradationSignal& signal);
  void reset();
  double prior() const { return prior_; }
  const PolicyConfig& config() const { return config_; }

 private:
  PolicyConfig config_;
  double prior_;
};

nlohmann::json to_json(const PolicyConfig& config);
PolicyConfig policy_from_json(const nlohmann::json& j);

}  // namespace smartmlops::policy
