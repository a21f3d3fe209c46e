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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "smartmlops/error.hpp"
#include "smartmlops/retraining_policy.hpp"

using namespace smartmlops;
using namespace smartmlops::policy;

TEST(Posterior, HandEvaluations) {
  EXPECT_NEAR(posterior_from_likelihoods(0.8, 0.2, 0.5), 0.8, 1e-12);
  EXPECT_NEAR(posterior_from_likelihoods(0.9, 0.1, 0.3), 0.27 / 0.34, 1e-12);
  EXPECT_NEAR(posterior_from_likelihoods(0.9, 0.1, 0.3), 0.7941176470588235, 1e-12);
}

TEST(Posterior, EqualLikelihoodsReturnPrior) {
  for (const double prior : {0.0, 0.1, 0.5, 0.93, 1.0}) {
    EXPECT_EQ(posterior_from_likelihoods(0.4, 0.4, prior), prior);
  }
}

TEST(Posterior, ExtremePriors) {
  EXPECT_EQ(posterior_from_likelihoods(0.9, 0.1, 0.0), 0.0);
  EXPECT_EQ(posterior_from_likelihoods(0.9, 0.1, 1.0), 1.0);
  PolicyConfig c;
  c.prior_retrain = 0.0;
  const auto d = decide({0.2, {}}, c);
  EXPECT_EQ(d.posterior, 0.0);
  EXPECT_FALSE(d.trigger);
}

TEST(Posterior, DegenerateEvidence) {
  try {
    posterior_from_likelihoods(0.0, 0.0, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateEvidence);
  }
}

TEST(Posterior, ComplementRule) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double l1 = u(rng), l0 = u(rng), prior = u(rng) * 0.999;
    const double r1 = posterior_from_likelihoods(l1, l0, prior);
    const double r0 = posterior_from_likelihoods(l0, l1, 1.0 - prior);
    EXPECT_NEAR(r1 + r0, 1.0, 1e-12);
  }
}

TEST(Decide, TriggerIsStrictlyAboveThreshold) {
  PolicyConfig c;
  c.prior_retrain = 0.3;
  const auto d = decide_from_likelihoods(0.9, 0.1, c);
  EXPECT_TRUE(d.trigger);
  EXPECT_NEAR(d.posterior, 0.794118, 1e-6);
  c.prior_retrain = 0.7;
  EXPECT_FALSE(decide_from_likelihoods(0.5, 0.5, c).trigger);  // exactly 0.7
}

TEST(Decide, GaussianDefaultsAtHealthyMean) {
  const PolicyConfig c;
  const auto d = decide({0.0, {}}, c);
  EXPECT_NEAR(d.posterior, 0.04208772791561882, 1e-12);
  EXPECT_LT(d.posterior, 0.5);
  EXPECT_FALSE(d.trigger);
}

TEST(Decide, GaussianMatchesExplicitLikelihoods) {
  const PolicyConfig c;
  for (const double s : {-0.02, 0.0, 0.01, 0.025, 0.04, 0.08}) {
    const double l1 = c.retrain_needed.density(s);
    const double l0 = c.healthy.density(s);
    EXPECT_NEAR(posterior_retrain({s, {}}, c), posterior_from_likelihoods(l1, l0, c.prior_retrain), 1e-12);
  }
}

TEST(Decide, FarTailSaturatesInsteadOfFailing) {
  const PolicyConfig c;
  EXPECT_NEAR(posterior_retrain({0.9, {}}, c), 1.0, 1e-12);
  EXPECT_NEAR(posterior_retrain({-0.9, {}}, c), 0.0, 1e-12);
}

TEST(Posterior, MonotoneInSignal) {
  const PolicyConfig c;
  double prev = -1.0;
  for (int i = -50; i <= 150; ++i) {
    const double p = posterior_retrain({i * 0.001, {}}, c);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(Sequential, StrongSignalsNondecreasing) {
  PolicyConfig c;
  c.sequential = true;
  SequentialPolicy seq(c);
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto d = seq.observe({0.04, {}});
    EXPECT_GE(d.posterior, prev);
    ASSERT_TRUE(d.next_prior.has_value());
    EXPECT_EQ(*d.next_prior, d.posterior);
    prev = d.posterior;
  }
  seq.reset();
  EXPECT_EQ(seq.prior(), c.prior_retrain);
}

TEST(Config, ValidationAndJson) {
  PolicyConfig c;
  c.healthy.stddev = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.prior_retrain = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.posterior_threshold = 0.8;
  c.sequential = true;
  const auto back = policy_from_json(to_json(c));
  EXPECT_EQ(back.posterior_threshold, 0.8);
  EXPECT_TRUE(back.sequential);
  EXPECT_EQ(back.retrain_needed.mean, 0.05);
}
