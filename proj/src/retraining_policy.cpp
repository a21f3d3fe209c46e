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

#include "smartmlops/retraining_policy.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "smartmlops/error.hpp"

namespace smartmlops::policy {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

RetrainDecision make_decision(double posterior, double s_t, bool have_signal,
                              const PolicyConfig& config) {
  RetrainDecision d;
  d.posterior = posterior;
  d.trigger = posterior > config.posterior_threshold;
  d.rationale = have_signal
                    ? fmt::format("P(retrain | s_t={:.6g}) = {:.6f} {} threshold {:.3f}", s_t,
                                  posterior, d.trigger ? ">" : "<=", config.posterior_threshold)
                    : fmt::format("P(retrain | evidence) = {:.6f} {} threshold {:.3f}", posterior,
                                  d.trigger ? ">" : "<=", config.posterior_threshold);
  if (config.sequential) d.next_prior = posterior;
  return d;
}

}  // namespace

double GaussianLikelihood::density(double x) const { return std::exp(log_density(x)); }

double GaussianLikelihood::log_density(double x) const {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - 0.5 * std::log(2.0 * std::numbers::pi);
}

void PolicyConfig::validate() const {
  if (!is_probability(prior_retrain) || !is_probability(posterior_threshold)) {
    fail(ErrorCode::kInvalidArgument, "policy probabilities must lie in [0,1]");
  }
  if (!(retrain_needed.stddev > 0.0) || !(healthy.stddev > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "likelihood standard deviations must be positive");
  }
  if (!std::isfinite(retrain_needed.mean) || !std::isfinite(healthy.mean)) {
    fail(ErrorCode::kInvalidArgument, "likelihood means must be finite");
  }
}

double posterior_from_likelihoods(double l1, double l0, double prior) {
  if (!(l1 >= 0.0) || !(l0 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l0)) {
    fail(ErrorCode::kInvalidArgument, "likelihoods must be finite and nonnegative");
  }
  if (!is_probability(prior)) fail(ErrorCode::kInvalidArgument, "prior must lie in [0,1]");
  if (l1 == 0.0 && l0 == 0.0) {
    fail(ErrorCode::kDegenerateEvidence, "both likelihoods are zero; posterior undefined");
  }
  if (l1 == l0) return prior;
  const double numerator = l1 * prior;
  const double denominator = numerator + l0 * (1.0 - prior);
  if (denominator == 0.0) {
    fail(ErrorCode::kDegenerateEvidence, "evidence has zero probability under the prior");
  }
  return numerator / denominator;
}

double posterior_retrain(const DegradationSignal& signal, const PolicyConfig& config) {
  config.validate();
  if (!std::isfinite(signal.s_t)) fail(ErrorCode::kInvalidArgument, "s_t must be finite");
  const double prior = config.prior_retrain;
  const double ll1 = config.retrain_needed.log_density(signal.s_t);
  const double ll0 = config.healthy.log_density(signal.s_t);
  if (ll1 == ll0) return prior;
  if (prior == 0.0) return 0.0;
  if (prior == 1.0) return 1.0;
  const double log_odds = std::log(prior) - std::log1p(-prior) + ll1 - ll0;
  return log_odds >= 0 ? 1.0 / (1.0 + std::exp(-log_odds))
                       : std::exp(log_odds) / (1.0 + std::exp(log_odds));
}

RetrainDecision decide(const DegradationSignal& signal, const PolicyConfig& config) {
  return make_decision(posterior_retrain(signal, config), signal.s_t, true, config);
}

RetrainDecision decide_from_likelihoods(double l1, double l0, const PolicyConfig& config) {
  config.validate();
  return make_decision(posterior_from_likelihoods(l1, l0, config.prior_retrain), 0.0, false,
                       config);
}

SequentialPolicy::SequentialPolicy(PolicyConfig config)
    : config_(std::move(config)), prior_(config_.prior_retrain) {
  config_.validate();
}

RetrainDecision SequentialPolicy::observe(const DegradationSignal& signal) {
  PolicyConfig step = config_;
  step.prior_retrain = prior_;
  auto decision = decide(signal, step);
  if (config_.sequential) prior_ = decision.posterior;
  return decision;
}

void SequentialPolicy::reset() { prior_ = config_.prior_retrain; }

nlohmann::json to_json(const PolicyConfig& config) {
  return {{"prior_retrain", config.prior_retrain},
          {"mu1", config.retrain_needed.mean},
          {"sigma1", config.retrain_needed.stddev},
          {"mu0", config.healthy.mean},
          {"sigma0", config.healthy.stddev},
          {"posterior_threshold", config.posterior_threshold},
          {"sequential", config.sequential}};
}

PolicyConfig policy_from_json(const nlohmann::json& j) {
  PolicyConfig c;
  c.prior_retrain = j.value("prior_retrain", c.prior_retrain);
  c.retrain_needed.mean = j.value("mu1", c.retrain_needed.mean);
  c.retrain_needed.stddev = j.value("sigma1", c.retrain_needed.stddev);
  c.healthy.mean = j.value("mu0", c.healthy.mean);
  c.healthy.stddev = j.value("sigma0", c.healthy.stddev);
  c.posterior_threshold = j.value("posterior_threshold", c.posterior_threshold);
  c.sequential = j.value("sequential", c.sequential);
  c.validate();
  return c;
}

}  // namespace smartmlops::policy
